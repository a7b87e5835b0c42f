#include "lidkit/features.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "lidkit/errors.hpp"
#include "lidkit/unicode.hpp"

namespace lidkit {
namespace {

constexpr std::uint32_t kFnvOffset = 2166136261u;
constexpr std::uint32_t kFnvPrime = 16777619u;

// Byte offsets of every scalar boundary in `utf8`, including 0 and size().
std::vector<size_t> scalar_boundaries(std::string_view utf8) {
  std::vector<size_t> bounds;
  bounds.reserve(utf8.size() + 1);
  for (size_t i = 0; i < utf8.size(); ++i) {
    // Continuation bytes are 10xxxxxx.
    if ((static_cast<unsigned char>(utf8[i]) & 0xC0) != 0x80) bounds.push_back(i);
  }
  bounds.push_back(utf8.size());
  return bounds;
}

template <typename Emit>
void for_each_char_ngram(const std::string& wrapped, std::uint32_t minn,
                         std::uint32_t maxn, Emit&& emit) {
  const std::vector<size_t> bounds = scalar_boundaries(wrapped);
  const size_t length = bounds.size() - 1;
  for (size_t start = 0; start < length; ++start) {
    for (size_t n = minn; n <= maxn && start + n <= length; ++n) {
      emit(std::string_view(wrapped).substr(bounds[start], bounds[start + n] - bounds[start]));
    }
  }
}

std::string wrap(std::string_view word) {
  std::string wrapped;
  wrapped.reserve(word.size() + 2);
  wrapped.push_back('<');
  wrapped.append(word);
  wrapped.push_back('>');
  return wrapped;
}

}  // namespace

void FeatureConfig::validate() const {
  if (minn < 1 || minn > maxn) throw ValidationError("need 1 <= minn <= maxn");
  if (bucket < 1) throw ValidationError("bucket must be >= 1");
  if (word_ngrams < 1) throw ValidationError("wordNgrams must be >= 1");
}

Vocabulary::Vocabulary(std::vector<VocabEntry> words, std::vector<Label> labels)
    : words_(std::move(words)), labels_(std::move(labels)) {
  word_index_.reserve(words_.size());
  for (size_t i = 0; i < words_.size(); ++i) {
    if (!word_index_.emplace(words_[i].word, i).second) {
      throw ValidationError("duplicate vocabulary word: " + words_[i].word);
    }
  }
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (i > 0 && !(labels_[i - 1] < labels_[i])) {
      throw ValidationError("labels must be sorted and unique");
    }
    label_index_.emplace(labels_[i], i);
  }
}

std::optional<FeatureId> Vocabulary::word_id(std::string_view word) const {
  auto it = word_index_.find(word);
  if (it == word_index_.end()) return std::nullopt;
  return static_cast<FeatureId>(it->second);
}

std::optional<std::size_t> Vocabulary::label_id(std::string_view label) const {
  auto it = label_index_.find(label);
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> tokenize(std::string_view text) {
  return unicode::split_whitespace(text);
}

Vocabulary build_vocab(std::span<const LabeledLine> lines, const FeatureConfig& config) {
  config.validate();
  std::unordered_map<std::string, std::uint64_t> word_counts;
  std::map<Label, std::uint64_t> label_counts;
  for (const auto& line : lines) {
    ++label_counts[line.label];
    for (auto& token : tokenize(line.text)) ++word_counts[std::move(token)];
  }

  std::vector<VocabEntry> words;
  for (auto& [word, count] : word_counts) {
    if (count >= config.min_count) words.push_back({word, count});
  }
  std::sort(words.begin(), words.end(), [](const VocabEntry& a, const VocabEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.word < b.word;
  });

  std::vector<Label> labels;
  for (const auto& [label, count] : label_counts) {
    if (count >= config.min_count_label) labels.push_back(label);
  }
  if (labels.empty()) throw NoLabels();
  return Vocabulary(std::move(words), std::move(labels));
}

std::vector<std::string> char_ngrams(std::string_view word, std::uint32_t minn,
                                     std::uint32_t maxn) {
  if (minn > maxn) throw ValidationError("need minn <= maxn");
  std::vector<std::string> grams;
  for_each_char_ngram(wrap(word), minn, maxn,
                      [&](std::string_view g) { grams.emplace_back(g); });
  return grams;
}

std::uint32_t fnv1a(std::string_view bytes) noexcept {
  std::uint32_t h = kFnvOffset;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

FeatureBag featurize(std::string_view text, const Vocabulary& vocab,
                     const FeatureConfig& config) {
  const auto offset = static_cast<FeatureId>(vocab.word_count());
  const std::vector<std::string> tokens = tokenize(text);
  FeatureBag bag;
  bag.reserve(tokens.size() * 16);
  for (const auto& token : tokens) {
    if (auto id = vocab.word_id(token)) bag.push_back(*id);
    for_each_char_ngram(wrap(token), config.minn, config.maxn, [&](std::string_view g) {
      bag.push_back(offset + hash_ngram(g, config.bucket));
    });
  }
  for (std::uint32_t n = 2; n <= config.word_ngrams; ++n) {
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (size_t k = 1; k < n; ++k) gram.append(" ").append(tokens[i + k]);
      bag.push_back(offset + hash_ngram(gram, config.bucket));
    }
  }
  return bag;
}

}  // namespace lidkit
