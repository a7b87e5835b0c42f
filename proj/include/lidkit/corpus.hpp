#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lidkit/label.hpp"

namespace lidkit {

/// One sentence with its language. Build through make_line() so the text
/// is NFC-normalized and trimmed and the label is checked.
struct LabeledLine {
  Label label;
  std::string text;

  friend bool operator==(const LabeledLine&, const LabeledLine&) = default;
};

/// Normalizes `text` (NFC, trim) and validates both fields.
/// Throws CorpusFormatError when the text is empty after trimming or the
/// label is empty or contains whitespace.
LabeledLine make_line(std::string_view label, std::string_view text);

/// Parses one `__label__<code> <text>` line.
LabeledLine parse_corpus_line(std::string_view raw);

/// Reads a whole corpus. Blank lines are skipped; any other line lacking the
/// label prefix is rejected with its 1-based line number in the message.
std::vector<LabeledLine> read_corpus(std::istream& in);
std::vector<LabeledLine> read_corpus_file(const std::string& path);

void write_corpus(std::ostream& out, std::span<const LabeledLine> lines);

struct CorpusStats {
  std::map<Label, std::uint64_t> per_label_counts;
  std::uint64_t total = 0;
};

CorpusStats corpus_stats(std::span<const LabeledLine> lines);

struct ScriptProfile {
  std::map<std::string, std::uint64_t> letter_counts;
  std::string dominant_script = "Zyyy";
  double purity = 0.0;
};

/// Counts letters by Unicode Script, ignoring Common and Inherited.
ScriptProfile detect_script(std::string_view text);

using ScriptExpectations = std::map<Label, std::set<std::string>>;

struct ScriptFilterResult {
  std::vector<LabeledLine> kept;
  std::size_t dropped = 0;
};

/// Keeps a line iff its dominant script is expected for its label and its
/// purity reaches `min_purity`. Labels missing from `expected` pass.
ScriptFilterResult filter_by_script(std::span<const LabeledLine> lines,
                                    const ScriptExpectations& expected,
                                    double min_purity = 1.0);

/// Drops exact duplicate texts across all labels, keeping first occurrences.
std::vector<LabeledLine> dedup(std::span<const LabeledLine> lines);

struct SplitConfig {
  double train_fraction = 0.85;
  std::size_t test_cap = 1000;
  std::uint64_t seed = 0;
};

struct TrainTestSplit {
  std::vector<LabeledLine> train;
  std::vector<LabeledLine> test;
};

/// Per label: floor(train_fraction * n) random lines go to train; of the
/// remaining r lines, min(test_cap, r) are sampled into test. Both outputs
/// keep the input order. Each label draws from its own generator seeded by
/// (seed, label), so the result does not depend on how labels interleave.
TrainTestSplit split_train_test(std::span<const LabeledLine> lines,
                                const SplitConfig& config = {});

/// Contiguous word 4-grams over whitespace tokens, each joined by one space.
std::vector<std::string> word_four_grams(std::string_view text);

/// Inverted index from word 4-gram to the (sorted) ids of training sentences
/// containing it. Immutable after construction.
class FourGramIndex {
 public:
  explicit FourGramIndex(std::span<const LabeledLine> train);

  /// True iff one indexed sentence contains every gram in `grams`.
  /// An empty gram list is never contained.
  bool contained_in_one(std::span<const std::string> grams) const;

  std::size_t sentence_count() const noexcept { return sentence_count_; }

 private:
  std::unordered_map<std::string, std::vector<std::uint32_t>> postings_;
  std::size_t sentence_count_ = 0;
};

/// Fraction of contaminated test sentences per label present in `test`.
/// Sentences with fewer than four words are never contaminated.
std::map<Label, double> contamination_rate(std::span<const LabeledLine> test,
                                           std::span<const LabeledLine> train);

}  // namespace lidkit
