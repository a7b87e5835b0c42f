#include "lidkit/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/bytestream.h>
#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/utf8.h>

#include <algorithm>

#include "lidkit/errors.hpp"

namespace lidkit::unicode {
namespace {

// Walks `utf8` one scalar at a time, reporting each scalar together with
// the byte range it occupied.
template <typename Fn>
void for_each_scalar(std::string_view utf8, Fn&& fn) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const int32_t length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) c = 0xFFFD;
    fn(static_cast<char32_t>(c), static_cast<size_t>(start),
       static_cast<size_t>(i));
  }
}

bool all_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return static_cast<unsigned char>(c) < 0x80;
  });
}

}  // namespace

std::u32string decode(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  for_each_scalar(utf8, [&](char32_t c, size_t, size_t) { out.push_back(c); });
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) append_utf8(out, c);
  return out;
}

std::string nfc(std::string_view utf8) {
  if (all_ascii(utf8)) return std::string(utf8);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(Error::Kind::Data, "ICU NFC normalizer unavailable");
  }
  // Re-encode first so ill-formed input is repaired the same way decode()
  // repairs it.
  const std::string clean = encode(decode(utf8));
  std::string out;
  icu::StringByteSink<std::string> sink(&out);
  normalizer->normalizeUTF8(0, icu::StringPiece(clean.data(), clean.size()),
                            sink, nullptr, status);
  if (U_FAILURE(status)) {
    throw Error(Error::Kind::Data, "NFC normalization failed");
  }
  return out;
}

bool is_whitespace(char32_t cp) {
  return u_isUWhiteSpace(static_cast<UChar32>(cp));
}

bool is_letter(char32_t cp) {
  return (U_GET_GC_MASK(static_cast<UChar32>(cp)) & U_GC_L_MASK) != 0;
}

std::string script_code(char32_t cp) {
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode code = uscript_getScript(static_cast<UChar32>(cp), &status);
  if (U_FAILURE(status)) return "Zzzz";
  const char* name = uscript_getShortName(code);
  return name ? std::string(name) : std::string("Zzzz");
}

std::string_view trim(std::string_view utf8) {
  size_t begin = utf8.size();
  size_t end = 0;
  for_each_scalar(utf8, [&](char32_t c, size_t from, size_t to) {
    if (is_whitespace(c)) return;
    begin = std::min(begin, from);
    end = to;
  });
  if (begin >= end) return {};
  return utf8.substr(begin, end - begin);
}

std::vector<std::string> split_whitespace(std::string_view utf8) {
  std::vector<std::string> tokens;
  size_t token_start = 0;
  bool in_token = false;
  for_each_scalar(utf8, [&](char32_t c, size_t from, size_t) {
    if (is_whitespace(c)) {
      if (in_token) tokens.emplace_back(utf8.substr(token_start, from - token_start));
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      token_start = from;
    }
  });
  if (in_token) tokens.emplace_back(utf8.substr(token_start));
  return tokens;
}

}  // namespace lidkit::unicode
