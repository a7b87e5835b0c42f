#include "lidkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "lidkit/errors.hpp"

namespace lidkit {
namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

double f1(const LabelCounts& c) { return ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn); }
double fpr(const LabelCounts& c) { return ratio(c.fp, c.fp + c.tn); }
double cleanness(const LabelCounts& c) { return ratio(c.tp, c.tp + c.fp); }

const LabelCounts& ConfusionCounts::at(const Label& label) const {
  auto it = per_label.find(label);
  if (it == per_label.end()) throw ValidationError("label not in counts: " + label);
  return it->second;
}

void ConfusionCounts::merge(const ConfusionCounts& other) {
  for (const auto& [label, c] : other.per_label) per_label[label] += c;
  total += other.total;
}

ConfusionCounts confusion(std::span<const Label> gold, std::span<const Prediction> pred,
                          const EvalScope& scope) {
  if (gold.size() != pred.size()) {
    throw InputMismatch("gold has " + std::to_string(gold.size()) + " rows, predictions " +
                        std::to_string(pred.size()));
  }
  ConfusionCounts counts;
  counts.total = gold.size();
  for (const auto& label : scope.labels) counts.per_label[label];

  // Per row only the gold and predicted labels can leave TN; everything
  // else is a true negative, filled in at the end.
  for (size_t i = 0; i < gold.size(); ++i) {
    const Label& g = gold[i];
    const Prediction& p = pred[i];
    auto git = counts.per_label.find(g);
    if (p && *p == g) {
      if (git != counts.per_label.end()) ++git->second.tp;
      continue;
    }
    if (git != counts.per_label.end()) ++git->second.fn;
    if (p) {
      auto pit = counts.per_label.find(*p);
      if (pit != counts.per_label.end()) ++pit->second.fp;
    }
  }
  for (auto& [label, c] : counts.per_label) c.tn = counts.total - c.tp - c.fp - c.fn;
  return counts;
}

double f1_macro(const ConfusionCounts& counts, const EvalScope& scope) {
  if (scope.labels.empty()) throw EmptyScope();
  double sum = 0.0;
  for (const auto& label : scope.labels) sum += f1(counts.at(label));
  return sum / static_cast<double>(scope.labels.size());
}

double fpr_macro(const ConfusionCounts& counts, const EvalScope& scope) {
  if (scope.labels.empty()) throw EmptyScope();
  double sum = 0.0;
  for (const auto& label : scope.labels) sum += fpr(counts.at(label));
  return sum / static_cast<double>(scope.labels.size());
}

double cleanness(const ConfusionCounts& counts, const Label& label) {
  return cleanness(counts.at(label));
}

std::vector<std::size_t> skew_indices(std::span<const Label> labels, const SkewFactors& factors) {
  for (const auto& [label, k] : factors) {
    if (k < 1) throw ValidationError("skew factor for " + label + " must be >= 1");
  }
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    auto it = factors.find(labels[i]);
    const std::uint64_t k = it == factors.end() ? 1 : it->second;
    out.insert(out.end(), k, i);
  }
  return out;
}

std::vector<LabeledLine> skew_testset(std::span<const LabeledLine> test,
                                      const SkewFactors& factors) {
  std::vector<Label> labels;
  labels.reserve(test.size());
  for (const auto& line : test) labels.push_back(line.label);
  std::vector<LabeledLine> out;
  for (size_t i : skew_indices(labels, factors)) out.push_back(test[i]);
  return out;
}

EvalScope intersect_scope(const std::set<Label>& model_a, const std::set<Label>& model_b,
                          const std::set<Label>& benchmark) {
  std::set<Label> ab;
  std::set_intersection(model_a.begin(), model_a.end(), model_b.begin(), model_b.end(),
                        std::inserter(ab, ab.end()));
  EvalScope scope;
  std::set_intersection(ab.begin(), ab.end(), benchmark.begin(), benchmark.end(),
                        std::inserter(scope.labels, scope.labels.end()));
  if (scope.labels.empty()) throw EmptyScope();
  return scope;
}

double CalibrationBins::expected_calibration_error() const {
  if (total == 0) return 0.0;
  double ece = 0.0;
  for (const auto& bin : bins) {
    ece += static_cast<double>(bin.count) * std::abs(bin.accuracy - bin.mean_confidence);
  }
  return ece / static_cast<double>(total);
}

CalibrationBins reliability(std::span<const ScoredPrediction> predictions,
                            std::span<const Label> gold, std::size_t n_bins) {
  if (n_bins < 1) throw ValidationError("n_bins must be >= 1");
  if (predictions.size() != gold.size()) {
    throw InputMismatch("predictions and gold differ in length");
  }
  std::vector<double> conf_sum(n_bins, 0.0);
  std::vector<std::uint64_t> correct(n_bins, 0);
  std::vector<std::uint64_t> count(n_bins, 0);
  const double n = static_cast<double>(n_bins);
  for (size_t i = 0; i < predictions.size(); ++i) {
    const double c = predictions[i].confidence;
    if (!(c >= 0.0 && c <= 1.0)) throw ValidationError("confidence outside [0,1]");
    // ceil(c*n)-1 realizes right-closed bins; c == 0 belongs to the first.
    auto bin = static_cast<std::ptrdiff_t>(std::ceil(c * n)) - 1;
    bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(n_bins) - 1);
    conf_sum[bin] += c;
    ++count[bin];
    if (predictions[i].label && *predictions[i].label == gold[i]) ++correct[bin];
  }

  CalibrationBins out;
  out.total = predictions.size();
  for (size_t b = 0; b < n_bins; ++b) {
    CalibrationBin bin;
    bin.lo = static_cast<double>(b) / n;
    bin.hi = static_cast<double>(b + 1) / n;
    bin.count = count[b];
    if (count[b] > 0) {
      bin.mean_confidence = conf_sum[b] / static_cast<double>(count[b]);
      bin.accuracy = static_cast<double>(correct[b]) / static_cast<double>(count[b]);
    }
    out.bins.push_back(bin);
  }
  return out;
}

void write_report(std::ostream& out, const ConfusionCounts& counts, const EvalScope& scope) {
  out << "label\tTP\tFP\tFN\tTN\tF1\tFPR\tcl\n";
  LabelCounts sum;
  double cl_sum = 0.0;
  for (const auto& label : scope.labels) {
    const LabelCounts& c = counts.at(label);
    sum += c;
    cl_sum += cleanness(c);
    out << label << '\t' << c.tp << '\t' << c.fp << '\t' << c.fn << '\t' << c.tn << '\t'
        << fmt(f1(c)) << '\t' << fmt(fpr(c)) << '\t' << fmt(cleanness(c)) << '\n';
  }
  const double n = static_cast<double>(std::max<size_t>(scope.labels.size(), 1));
  out << "__macro__\t" << sum.tp << '\t' << sum.fp << '\t' << sum.fn << '\t' << sum.tn << '\t'
      << fmt(f1_macro(counts, scope)) << '\t' << fmt(fpr_macro(counts, scope)) << '\t'
      << fmt(cl_sum / n) << '\n';
}

void write_calibration(std::ostream& out, const CalibrationBins& bins) {
  out << "bin_lo\tbin_hi\tmean_conf\taccuracy\tn\n";
  for (const auto& bin : bins.bins) {
    out << fmt(bin.lo) << '\t' << fmt(bin.hi) << '\t' << fmt(bin.mean_confidence) << '\t'
        << fmt(bin.accuracy) << '\t' << bin.count << '\n';
  }
}

}  // namespace lidkit
