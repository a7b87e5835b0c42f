#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lidkit/label.hpp"
#include "lidkit/prediction.hpp"

namespace lidkit {

enum class Scenario {
  SetKnown,    // benchmark language set known: B restricted to it
  SetUnknown,  // B is every label the model knows
};

struct DecisionConfig {
  std::set<Label> base_set;
  double theta = 0.0;
  Scenario scenario = Scenario::SetUnknown;

  /// B non-empty and theta in [0,1].
  void validate() const;

  static DecisionConfig set_unknown(std::span<const Label> model_labels, double theta);
  static DecisionConfig set_known(std::set<Label> benchmark_labels, double theta);
};

/// Thresholded argmax over the base set. Returns nullopt (undetermined)
/// when the largest raw probability inside B is below theta; otherwise the
/// label attaining it, ties to the lexicographically smallest. The mass is
/// not renormalized over B. Labels of B outside the distribution count as 0.
std::optional<Label> decide(const PredictionDist& dist, const DecisionConfig& config);

/// Variety -> macrolanguage links. A macrolanguage may not itself be a
/// variety of something, so rollups are one level deep.
class LanguageHierarchy {
 public:
  LanguageHierarchy() = default;
  /// Throws ValidationError when a macrolanguage also appears as a variety
  /// or a label is its own macrolanguage.
  explicit LanguageHierarchy(std::map<Label, Label> macro_of);

  const std::map<Label, Label>& macro_of() const noexcept { return macro_of_; }
  bool empty() const noexcept { return macro_of_.empty(); }

  /// The label a probability mass rolls into: its macrolanguage, or itself.
  const Label& target(const Label& label) const;

 private:
  std::map<Label, Label> macro_of_;
};

/// Adds each variety's probability to its macrolanguage and drops the
/// variety. Each macrolanguage's new value is summed in a fixed order: its
/// own probability (0 when absent) first, then its varieties in label order.
PredictionDist rollup(const PredictionDist& dist, const LanguageHierarchy& hierarchy);

enum class MapMode { Strict, Lenient };

/// Many-to-one relabeling between code schemes.
struct LabelMap {
  std::map<Label, Label> rules;

  Label apply(const Label& label, MapMode mode) const;
};

/// Applies `map` element-wise. Strict mode throws UnmappedLabel for a label
/// with no rule; lenient mode passes it through.
std::vector<Label> map_labels(std::span<const Label> labels, const LabelMap& map,
                              MapMode mode = MapMode::Strict);

/// Reads `source<TAB>target` rows; '#' starts a comment, blank lines skip.
std::map<Label, Label> read_label_pairs(std::istream& in);
std::map<Label, Label> read_label_pairs_file(const std::string& path);

LanguageHierarchy load_hierarchy(const std::string& path);
LabelMap load_label_map(const std::string& path);

/// One label per line ('#' comments allowed); first TSV column is used.
std::set<Label> read_label_set_file(const std::string& path);

}  // namespace lidkit
