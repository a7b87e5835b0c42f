#include "lidkit/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lidkit/errors.hpp"

namespace lidkit {

PredictionDist PredictionDist::from_pairs(std::vector<std::pair<Label, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Label> labels;
  std::vector<double> probs;
  labels.reserve(entries.size());
  probs.reserve(entries.size());
  for (auto& [label, p] : entries) {
    if (!labels.empty() && labels.back() == label) {
      throw ValidationError("duplicate label in distribution: " + label);
    }
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("probability outside [0,1] for " + label);
    }
    labels.push_back(std::move(label));
    probs.push_back(p);
  }
  PredictionDist dist(std::move(labels), std::move(probs));
  if (std::abs(dist.mass() - 1.0) > 1e-6) {
    throw ValidationError("distribution does not sum to 1");
  }
  return dist;
}

PredictionDist::PredictionDist(std::vector<Label> sorted_labels, std::vector<double> probs)
    : labels_(std::move(sorted_labels)), probs_(std::move(probs)) {
  if (labels_.size() != probs_.size()) {
    throw ValidationError("label and probability arrays differ in length");
  }
}

bool PredictionDist::contains(std::string_view label) const {
  return std::binary_search(labels_.begin(), labels_.end(), label);
}

double PredictionDist::prob(std::string_view label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return 0.0;
  return probs_[static_cast<size_t>(it - labels_.begin())];
}

double PredictionDist::mass() const {
  return std::accumulate(probs_.begin(), probs_.end(), 0.0);
}

std::vector<ScoredLabel> top_k(const PredictionDist& dist, std::size_t k) {
  std::vector<size_t> order(dist.size());
  std::iota(order.begin(), order.end(), size_t{0});
  k = std::min(k, order.size());
  const auto probs = dist.probs();
  // Labels are sorted, so index order doubles as the lexicographic tie-break.
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](size_t a, size_t b) {
                      if (probs[a] != probs[b]) return probs[a] > probs[b];
                      return a < b;
                    });
  std::vector<ScoredLabel> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) out.push_back({dist.labels()[order[i]], probs[order[i]]});
  return out;
}

}  // namespace lidkit
