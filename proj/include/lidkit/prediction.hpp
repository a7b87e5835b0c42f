#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lidkit/label.hpp"

namespace lidkit {

/// Per-label probabilities for one sentence. Labels are kept sorted and
/// unique so lookups are binary searches and iteration order is fixed.
class PredictionDist {
 public:
  PredictionDist() = default;

  /// Sorts by label. Throws ValidationError on duplicate labels, a
  /// probability outside [0,1] or a total mass further than 1e-6 from 1.
  static PredictionDist from_pairs(std::vector<std::pair<Label, double>> entries);

  /// Trusted constructor for already-sorted parallel arrays (model output).
  PredictionDist(std::vector<Label> sorted_labels, std::vector<double> probs);

  std::span<const Label> labels() const noexcept { return labels_; }
  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool contains(std::string_view label) const;

  /// Probability of `label`, 0 when the label is outside the universe.
  double prob(std::string_view label) const;

  /// Sum of probabilities in label order.
  double mass() const;

 private:
  std::vector<Label> labels_;
  std::vector<double> probs_;
};

struct ScoredLabel {
  Label label;
  double prob = 0.0;

  friend bool operator==(const ScoredLabel&, const ScoredLabel&) = default;
};

/// Highest `k` entries, ties broken by label order.
std::vector<ScoredLabel> top_k(const PredictionDist& dist, std::size_t k);

}  // namespace lidkit
