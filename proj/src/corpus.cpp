#include "lidkit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_set>

#include "lidkit/errors.hpp"
#include "lidkit/unicode.hpp"

namespace lidkit {

LabeledLine make_line(std::string_view label, std::string_view text) {
  if (label.empty()) throw CorpusFormatError("empty label");
  for (char32_t c : unicode::decode(label)) {
    if (unicode::is_whitespace(c)) {
      throw CorpusFormatError("label contains whitespace: '" + std::string(label) + "'");
    }
  }
  std::string normalized = unicode::nfc(text);
  std::string trimmed(unicode::trim(normalized));
  if (trimmed.empty()) {
    throw CorpusFormatError("empty text for label '" + std::string(label) + "'");
  }
  return LabeledLine{Label(label), std::move(trimmed)};
}

LabeledLine parse_corpus_line(std::string_view raw) {
  if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
  if (!raw.starts_with(kLabelPrefix)) {
    throw CorpusFormatError("missing __label__ prefix");
  }
  raw.remove_prefix(kLabelPrefix.size());
  const size_t space = raw.find_first_of(" \t");
  if (space == std::string_view::npos) {
    throw CorpusFormatError("label without text");
  }
  return make_line(raw.substr(0, space), raw.substr(space + 1));
}

std::vector<LabeledLine> read_corpus(std::istream& in) {
  std::vector<LabeledLine> lines;
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (unicode::trim(raw).empty()) continue;
    try {
      lines.push_back(parse_corpus_line(raw));
    } catch (const CorpusFormatError& e) {
      throw CorpusFormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lines;
}

std::vector<LabeledLine> read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus: " + path);
  return read_corpus(in);
}

void write_corpus(std::ostream& out, std::span<const LabeledLine> lines) {
  for (const auto& line : lines) {
    out << kLabelPrefix << line.label << ' ' << line.text << '\n';
  }
}

CorpusStats corpus_stats(std::span<const LabeledLine> lines) {
  CorpusStats stats;
  for (const auto& line : lines) ++stats.per_label_counts[line.label];
  stats.total = lines.size();
  return stats;
}

ScriptProfile detect_script(std::string_view text) {
  ScriptProfile profile;
  std::uint64_t letters = 0;
  for (char32_t c : unicode::decode(text)) {
    if (!unicode::is_letter(c)) continue;
    std::string script = unicode::script_code(c);
    if (script == "Zyyy" || script == "Zinh") continue;
    ++profile.letter_counts[script];
    ++letters;
  }
  if (letters == 0) return profile;

  // std::map iterates lexicographically and only a strictly larger count
  // replaces the leader, so ties go to the smaller script name.
  std::uint64_t best = 0;
  for (const auto& [script, count] : profile.letter_counts) {
    if (count > best) {
      best = count;
      profile.dominant_script = script;
    }
  }
  profile.purity = static_cast<double>(best) / static_cast<double>(letters);
  return profile;
}

ScriptFilterResult filter_by_script(std::span<const LabeledLine> lines,
                                    const ScriptExpectations& expected,
                                    double min_purity) {
  if (!(min_purity >= 0.0 && min_purity <= 1.0)) {
    throw ValidationError("min_purity must lie in [0,1]");
  }
  ScriptFilterResult result;
  for (const auto& line : lines) {
    auto it = expected.find(line.label);
    if (it == expected.end()) {
      result.kept.push_back(line);
      continue;
    }
    const ScriptProfile profile = detect_script(line.text);
    if (it->second.contains(profile.dominant_script) && profile.purity >= min_purity) {
      result.kept.push_back(line);
    } else {
      ++result.dropped;
    }
  }
  return result;
}

std::vector<LabeledLine> dedup(std::span<const LabeledLine> lines) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(lines.size());
  std::vector<LabeledLine> out;
  for (const auto& line : lines) {
    if (seen.insert(line.text).second) out.push_back(line);
  }
  return out;
}

TrainTestSplit split_train_test(std::span<const LabeledLine> lines,
                                const SplitConfig& config) {
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw ValidationError("train_fraction must lie in (0,1)");
  }
  if (config.test_cap < 1) throw ValidationError("test_cap must be >= 1");

  std::map<Label, std::vector<size_t>> by_label;
  for (size_t i = 0; i < lines.size(); ++i) by_label[lines[i].label].push_back(i);

  std::vector<char> destination(lines.size(), 0);  // 0 dropped, 1 train, 2 test
  for (auto& [label, indices] : by_label) {
    std::vector<std::uint32_t> seed_words = {
        static_cast<std::uint32_t>(config.seed),
        static_cast<std::uint32_t>(config.seed >> 32)};
    for (unsigned char c : label) seed_words.push_back(c);
    std::seed_seq seq(seed_words.begin(), seed_words.end());
    std::mt19937_64 rng(seq);

    std::shuffle(indices.begin(), indices.end(), rng);
    const size_t n = indices.size();
    const auto n_train = static_cast<size_t>(
        std::floor(config.train_fraction * static_cast<double>(n)));
    const size_t n_test = std::min(config.test_cap, n - n_train);
    // The tail after n_train is already a uniform permutation of the
    // remainder, so its prefix is a uniform sample without replacement.
    for (size_t k = 0; k < n_train; ++k) destination[indices[k]] = 1;
    for (size_t k = n_train; k < n_train + n_test; ++k) destination[indices[k]] = 2;
  }

  TrainTestSplit split;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (destination[i] == 1) split.train.push_back(lines[i]);
    if (destination[i] == 2) split.test.push_back(lines[i]);
  }
  return split;
}

std::vector<std::string> word_four_grams(std::string_view text) {
  const std::vector<std::string> words = unicode::split_whitespace(text);
  std::vector<std::string> grams;
  if (words.size() < 4) return grams;
  grams.reserve(words.size() - 3);
  for (size_t i = 0; i + 4 <= words.size(); ++i) {
    grams.push_back(words[i] + ' ' + words[i + 1] + ' ' + words[i + 2] + ' ' + words[i + 3]);
  }
  return grams;
}

FourGramIndex::FourGramIndex(std::span<const LabeledLine> train)
    : sentence_count_(train.size()) {
  for (size_t id = 0; id < train.size(); ++id) {
    for (auto& gram : word_four_grams(train[id].text)) {
      auto& list = postings_[std::move(gram)];
      // Ids arrive in increasing order; skip repeats within one sentence.
      if (list.empty() || list.back() != id) list.push_back(static_cast<std::uint32_t>(id));
    }
  }
}

bool FourGramIndex::contained_in_one(std::span<const std::string> grams) const {
  if (grams.empty()) return false;
  std::vector<const std::vector<std::uint32_t>*> lists;
  lists.reserve(grams.size());
  for (const auto& gram : grams) {
    auto it = postings_.find(gram);
    if (it == postings_.end()) return false;
    lists.push_back(&it->second);
  }
  std::sort(lists.begin(), lists.end(),
            [](const auto* a, const auto* b) { return a->size() < b->size(); });

  std::vector<std::uint32_t> candidates = *lists.front();
  std::vector<std::uint32_t> next;
  for (size_t k = 1; k < lists.size() && !candidates.empty(); ++k) {
    next.clear();
    std::set_intersection(candidates.begin(), candidates.end(), lists[k]->begin(),
                          lists[k]->end(), std::back_inserter(next));
    candidates.swap(next);
  }
  return !candidates.empty();
}

std::map<Label, double> contamination_rate(std::span<const LabeledLine> test,
                                           std::span<const LabeledLine> train) {
  const FourGramIndex index(train);
  std::map<Label, std::pair<std::uint64_t, std::uint64_t>> tallies;  // (contaminated, total)
  for (const auto& line : test) {
    auto& [hits, total] = tallies[line.label];
    ++total;
    if (index.contained_in_one(word_four_grams(line.text))) ++hits;
  }
  std::map<Label, double> rates;
  for (const auto& [label, tally] : tallies) {
    rates[label] = static_cast<double>(tally.first) / static_cast<double>(tally.second);
  }
  return rates;
}

}  // namespace lidkit
