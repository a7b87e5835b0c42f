#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "lidkit/corpus.hpp"
#include "lidkit/label.hpp"

namespace lidkit {

/// A system output for one sentence; nullopt means undetermined.
using Prediction = std::optional<Label>;

struct LabelCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  LabelCounts& operator+=(const LabelCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

// 0/0 is defined as 0 for all three ratios.
double f1(const LabelCounts& c);
double fpr(const LabelCounts& c);
double cleanness(const LabelCounts& c);

struct EvalScope {
  std::set<Label> labels;
};

/// One-vs-rest counts for every label of a scope. Mergeable: counts of
/// disjoint shards add up to the counts of their union.
struct ConfusionCounts {
  std::map<Label, LabelCounts> per_label;
  std::uint64_t total = 0;

  /// Throws ValidationError for a label outside the counted scope.
  const LabelCounts& at(const Label& label) const;
  void merge(const ConfusionCounts& other);
};

/// Undetermined predictions are negative for every label. Throws
/// InputMismatch when the sequences differ in length.
ConfusionCounts confusion(std::span<const Label> gold, std::span<const Prediction> pred,
                          const EvalScope& scope);

/// Unweighted means over the scope's labels.
double f1_macro(const ConfusionCounts& counts, const EvalScope& scope);
double fpr_macro(const ConfusionCounts& counts, const EvalScope& scope);
double cleanness(const ConfusionCounts& counts, const Label& label);

/// Label -> replication factor (integral, >= 1).
using SkewFactors = std::map<Label, std::uint64_t>;

/// Positions to read, in order, to replicate every row whose label has
/// factor k exactly k times (replicas adjacent). Shared by the line and
/// the aligned gold/prediction variants.
std::vector<std::size_t> skew_indices(std::span<const Label> labels, const SkewFactors& factors);

std::vector<LabeledLine> skew_testset(std::span<const LabeledLine> test,
                                      const SkewFactors& factors);

/// Labels common to two models and a benchmark; throws EmptyScope if none.
EvalScope intersect_scope(const std::set<Label>& model_a, const std::set<Label>& model_b,
                          const std::set<Label>& benchmark);

struct ScoredPrediction {
  Prediction label;
  double confidence = 0.0;
};

struct CalibrationBin {
  double lo = 0.0;
  double hi = 0.0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;
  std::uint64_t count = 0;
};

struct CalibrationBins {
  std::vector<CalibrationBin> bins;
  std::uint64_t total = 0;

  /// Count-weighted mean |accuracy - confidence| over bins.
  double expected_calibration_error() const;
};

/// Equal-width bins over [0,1]: the first is [0, 1/n], the others
/// (i/n, (i+1)/n]. A prediction is correct when it equals the gold label.
CalibrationBins reliability(std::span<const ScoredPrediction> predictions,
                            std::span<const Label> gold, std::size_t n_bins);

/// Header row, one row per scope label, then a `__macro__` row holding
/// summed counts and the macro-averaged ratios.
void write_report(std::ostream& out, const ConfusionCounts& counts, const EvalScope& scope);

void write_calibration(std::ostream& out, const CalibrationBins& bins);

}  // namespace lidkit
