#include "lidkit/decision.hpp"

#include <fstream>
#include <istream>

#include "lidkit/errors.hpp"
#include "lidkit/unicode.hpp"

namespace lidkit {

void DecisionConfig::validate() const {
  if (base_set.empty()) throw ValidationError("base set must not be empty");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in [0,1]");
}

DecisionConfig DecisionConfig::set_unknown(std::span<const Label> model_labels, double theta) {
  DecisionConfig config{{model_labels.begin(), model_labels.end()}, theta, Scenario::SetUnknown};
  config.validate();
  return config;
}

DecisionConfig DecisionConfig::set_known(std::set<Label> benchmark_labels, double theta) {
  DecisionConfig config{std::move(benchmark_labels), theta, Scenario::SetKnown};
  config.validate();
  return config;
}

std::optional<Label> decide(const PredictionDist& dist, const DecisionConfig& config) {
  const Label* best = nullptr;
  double best_prob = -1.0;
  // std::set iterates in label order; strict '>' keeps the first of a tie.
  for (const Label& label : config.base_set) {
    if (!dist.contains(label)) continue;
    const double p = dist.prob(label);
    if (p > best_prob) {
      best_prob = p;
      best = &label;
    }
  }
  if (best == nullptr || best_prob < config.theta) return std::nullopt;
  return *best;
}

LanguageHierarchy::LanguageHierarchy(std::map<Label, Label> macro_of)
    : macro_of_(std::move(macro_of)) {
  for (const auto& [variety, macro] : macro_of_) {
    if (variety == macro) throw ValidationError("label is its own macrolanguage: " + variety);
    if (macro_of_.contains(macro)) {
      throw ValidationError("macrolanguage " + macro + " is also listed as a variety");
    }
  }
}

const Label& LanguageHierarchy::target(const Label& label) const {
  auto it = macro_of_.find(label);
  return it == macro_of_.end() ? label : it->second;
}

PredictionDist rollup(const PredictionDist& dist, const LanguageHierarchy& hierarchy) {
  if (hierarchy.empty()) return dist;
  // Group members per target: the target itself first, then varieties in
  // label order (dist labels are sorted).
  std::map<Label, std::vector<size_t>> members;
  const auto labels = dist.labels();
  for (size_t i = 0; i < labels.size(); ++i) {
    if (hierarchy.target(labels[i]) == labels[i]) members[labels[i]].push_back(i);
  }
  for (size_t i = 0; i < labels.size(); ++i) {
    const Label& t = hierarchy.target(labels[i]);
    if (t != labels[i]) members[t].push_back(i);
  }

  const auto probs = dist.probs();
  std::vector<Label> out_labels;
  std::vector<double> out_probs;
  out_labels.reserve(members.size());
  out_probs.reserve(members.size());
  for (const auto& [label, indices] : members) {
    double p = 0.0;
    for (size_t i : indices) p += probs[i];
    out_labels.push_back(label);
    out_probs.push_back(p);
  }
  return PredictionDist(std::move(out_labels), std::move(out_probs));
}

Label LabelMap::apply(const Label& label, MapMode mode) const {
  auto it = rules.find(label);
  if (it != rules.end()) return it->second;
  if (mode == MapMode::Strict) throw UnmappedLabel(label);
  return label;
}

std::vector<Label> map_labels(std::span<const Label> labels, const LabelMap& map,
                              MapMode mode) {
  std::vector<Label> out;
  out.reserve(labels.size());
  for (const auto& label : labels) out.push_back(map.apply(label, mode));
  return out;
}

namespace {

// Splits a TSV row after stripping comments; empty when the row is blank.
std::vector<std::string> tsv_fields(std::string line) {
  if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    fields.emplace_back(unicode::trim(std::string_view(line).substr(start, tab - start)));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (fields.size() == 1 && fields[0].empty()) fields.clear();
  return fields;
}

}  // namespace

std::map<Label, Label> read_label_pairs(std::istream& in) {
  std::map<Label, Label> pairs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = tsv_fields(line);
    if (fields.empty()) continue;
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
      throw DataError("line " + std::to_string(line_no) + ": expected source<TAB>target");
    }
    auto [it, inserted] = pairs.emplace(fields[0], fields[1]);
    if (!inserted && it->second != fields[1]) {
      throw DataError("line " + std::to_string(line_no) + ": conflicting rule for " + fields[0]);
    }
  }
  return pairs;
}

std::map<Label, Label> read_label_pairs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mapping file: " + path);
  return read_label_pairs(in);
}

LanguageHierarchy load_hierarchy(const std::string& path) {
  return LanguageHierarchy(read_label_pairs_file(path));
}

LabelMap load_label_map(const std::string& path) {
  return LabelMap{read_label_pairs_file(path)};
}

std::set<Label> read_label_set_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label set: " + path);
  std::set<Label> labels;
  std::string line;
  while (std::getline(in, line)) {
    const auto fields = tsv_fields(line);
    if (!fields.empty() && !fields[0].empty()) labels.insert(fields[0]);
  }
  return labels;
}

}  // namespace lidkit
