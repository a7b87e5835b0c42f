#pragma once

// Thin UTF-8 helpers over ICU. Everything in the toolkit that needs a
// Unicode property (whitespace, letter category, script, NFC) goes
// through here so the ICU dependency stays in one translation unit.

#include <string>
#include <string_view>
#include <vector>

namespace lidkit::unicode {

/// Decodes UTF-8 into scalar values. Ill-formed sequences become U+FFFD.
std::u32string decode(std::string_view utf8);

void append_utf8(std::string& out, char32_t cp);
std::string encode(std::u32string_view text);

/// Canonical composition (NFC).
std::string nfc(std::string_view utf8);

bool is_whitespace(char32_t cp);
bool is_letter(char32_t cp);

/// ISO 15924 code of the Unicode Script property, e.g. "Latn", "Cyrl".
/// Common is "Zyyy", Inherited is "Zinh".
std::string script_code(char32_t cp);

/// Strips leading and trailing Unicode whitespace.
std::string_view trim(std::string_view utf8);

/// Splits on runs of Unicode whitespace; never yields empty pieces.
std::vector<std::string> split_whitespace(std::string_view utf8);

}  // namespace lidkit::unicode
