#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lidkit/corpus.hpp"
#include "lidkit/label.hpp"

namespace lidkit {

/// Input feature space of the classifier. Defaults are the production
/// settings: words seen at least 1000 times, character n-grams of length
/// 2..5 hashed into one million buckets.
struct FeatureConfig {
  std::uint64_t min_count = 1000;
  std::uint64_t min_count_label = 0;
  std::uint32_t word_ngrams = 1;
  std::uint32_t bucket = 1'000'000;
  std::uint32_t minn = 2;
  std::uint32_t maxn = 5;

  void validate() const;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

using FeatureId = std::uint32_t;

/// Multiset of feature ids for one sentence. Ids below the vocabulary size
/// are words; the rest are hashed n-grams offset by the vocabulary size.
using FeatureBag = std::vector<FeatureId>;

struct VocabEntry {
  std::string word;
  std::uint64_t count = 0;

  friend bool operator==(const VocabEntry&, const VocabEntry&) = default;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Takes the tables as-is (used by the model loader). Throws
  /// ValidationError on duplicate words or unsorted/duplicate labels.
  Vocabulary(std::vector<VocabEntry> words, std::vector<Label> labels);

  const std::vector<VocabEntry>& words() const noexcept { return words_; }
  const std::vector<Label>& labels() const noexcept { return labels_; }
  std::size_t word_count() const noexcept { return words_.size(); }
  std::size_t label_count() const noexcept { return labels_.size(); }

  std::optional<FeatureId> word_id(std::string_view word) const;
  std::optional<std::size_t> label_id(std::string_view label) const;

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  using Index = std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>>;

  std::vector<VocabEntry> words_;
  std::vector<Label> labels_;
  Index word_index_;
  Index label_index_;
};

/// Whitespace tokenizer shared by features and contamination checks.
std::vector<std::string> tokenize(std::string_view text);

/// Words with count >= min_count, most frequent first (ties lexicographic);
/// labels with count >= min_count_label, sorted. Throws NoLabels when no
/// label survives.
Vocabulary build_vocab(std::span<const LabeledLine> lines, const FeatureConfig& config);

/// Substrings of "<word>" with minn..maxn scalar values, shortest first at
/// each start position, start positions left to right.
std::vector<std::string> char_ngrams(std::string_view word, std::uint32_t minn,
                                     std::uint32_t maxn);

/// 32-bit FNV-1a over raw bytes. Part of the model file contract.
std::uint32_t fnv1a(std::string_view bytes) noexcept;

inline std::uint32_t hash_ngram(std::string_view ngram, std::uint32_t bucket) noexcept {
  return fnv1a(ngram) % bucket;
}

FeatureBag featurize(std::string_view text, const Vocabulary& vocab,
                     const FeatureConfig& config);

}  // namespace lidkit
