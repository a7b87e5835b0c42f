#pragma once

// Numerical core of the classifier: dense matrices, the bag-mean sentence
// vector, a stable softmax, the per-example cross-entropy gradient and the
// SGD update. Templated on the scalar so the gradient can be checked in
// double precision against the same code that trains in float.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lidkit/errors.hpp"
#include "lidkit/features.hpp"

namespace lidkit {

template <typename Real>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Real fill = Real(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<Real> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const Real> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  Real& at(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  Real at(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::vector<Real>& data() noexcept { return data_; }
  const std::vector<Real>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

/// Multiplicity-weighted mean of the embedding rows named by `bag`,
/// accumulated in double. Throws NoFeatures on an empty bag.
template <typename Real>
std::vector<double> mean_embedding(const Matrix<Real>& input, std::span<const FeatureId> bag) {
  if (bag.empty()) throw NoFeatures();
  std::vector<double> hidden(input.cols(), 0.0);
  for (FeatureId id : bag) {
    const auto row = input.row(id);
    for (std::size_t c = 0; c < hidden.size(); ++c) hidden[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(bag.size());
  for (double& h : hidden) h *= inv;
  return hidden;
}

/// In-place softmax with max subtraction; finite for any finite logits.
inline void softmax_inplace(std::span<double> logits) {
  if (logits.empty()) return;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& z : logits) {
    z = std::exp(z - peak);
    total += z;
  }
  for (double& z : logits) z /= total;
}

template <typename Real>
std::vector<double> output_logits(const Matrix<Real>& output, std::span<const double> hidden) {
  std::vector<double> logits(output.rows(), 0.0);
  for (std::size_t j = 0; j < output.rows(); ++j) {
    const auto row = output.row(j);
    double z = 0.0;
    for (std::size_t c = 0; c < hidden.size(); ++c) z += static_cast<double>(row[c]) * hidden[c];
    logits[j] = z;
  }
  return logits;
}

/// Gradient of -log softmax(W h)[target] with h the bag mean.
struct ExampleGradient {
  double loss = 0.0;
  std::vector<double> hidden;        // d loss / d h
  Matrix<double> output;             // d loss / d W
  std::size_t bag_size = 0;

  /// d loss / d E_f for one embedding row: each occurrence of f in the bag
  /// contributes hidden / |bag|.
  std::vector<double> input_row(std::size_t multiplicity) const {
    std::vector<double> g(hidden);
    const double scale = static_cast<double>(multiplicity) / static_cast<double>(bag_size);
    for (double& v : g) v *= scale;
    return g;
  }
};

template <typename Real>
ExampleGradient example_gradient(const Matrix<Real>& input, const Matrix<Real>& output,
                                 std::span<const FeatureId> bag, std::size_t target) {
  const std::vector<double> h = mean_embedding(input, bag);
  std::vector<double> p = output_logits(output, h);
  softmax_inplace(p);

  ExampleGradient grad;
  grad.bag_size = bag.size();
  grad.loss = -std::log(std::max(p[target], 1e-300));
  grad.hidden.assign(h.size(), 0.0);
  grad.output = Matrix<double>(output.rows(), output.cols());
  for (std::size_t j = 0; j < output.rows(); ++j) {
    const double delta = p[j] - (j == target ? 1.0 : 0.0);
    const auto w = output.row(j);
    auto gw = grad.output.row(j);
    for (std::size_t c = 0; c < h.size(); ++c) {
      grad.hidden[c] += delta * static_cast<double>(w[c]);
      gw[c] = delta * h[c];
    }
  }
  return grad;
}

namespace detail {

// Element access for the SGD step. The shared variant is used by lock-free
// parallel training: relaxed atomics make the races well-defined without
// ordering them.
template <bool Shared, typename Real>
inline Real load(Real& x) noexcept {
  if constexpr (Shared) {
    return std::atomic_ref<Real>(x).load(std::memory_order_relaxed);
  } else {
    return x;
  }
}

template <bool Shared, typename Real>
inline void store(Real& x, Real v) noexcept {
  if constexpr (Shared) {
    std::atomic_ref<Real>(x).store(v, std::memory_order_relaxed);
  } else {
    x = v;
  }
}

}  // namespace detail

/// Scratch buffers reused across SGD steps.
struct SgdScratch {
  std::vector<double> hidden;
  std::vector<double> hidden_grad;
  std::vector<double> probs;
};

/// One plain SGD step on (bag, target) with learning rate `lr`; returns the
/// example loss before the update. Output rows see the hidden vector, the
/// hidden gradient is taken against pre-update output rows, and every bag
/// occurrence moves its embedding row by -lr * hidden_grad / |bag|.
template <bool Shared = false, typename Real>
double sgd_step(Matrix<Real>& input, Matrix<Real>& output, std::span<const FeatureId> bag,
                std::size_t target, double lr, SgdScratch& scratch) {
  if (bag.empty()) throw NoFeatures();
  const std::size_t dim = input.cols();
  auto& h = scratch.hidden;
  h.assign(dim, 0.0);
  for (FeatureId id : bag) {
    auto row = input.row(id);
    for (std::size_t c = 0; c < dim; ++c) h[c] += detail::load<Shared>(row[c]);
  }
  const double inv_bag = 1.0 / static_cast<double>(bag.size());
  for (double& v : h) v *= inv_bag;

  auto& p = scratch.probs;
  p.assign(output.rows(), 0.0);
  for (std::size_t j = 0; j < output.rows(); ++j) {
    auto w = output.row(j);
    double z = 0.0;
    for (std::size_t c = 0; c < dim; ++c) z += static_cast<double>(detail::load<Shared>(w[c])) * h[c];
    p[j] = z;
  }
  softmax_inplace(p);
  const double loss = -std::log(std::max(p[target], 1e-300));

  auto& gh = scratch.hidden_grad;
  gh.assign(dim, 0.0);
  for (std::size_t j = 0; j < output.rows(); ++j) {
    const double delta = p[j] - (j == target ? 1.0 : 0.0);
    auto w = output.row(j);
    for (std::size_t c = 0; c < dim; ++c) {
      const Real old = detail::load<Shared>(w[c]);
      gh[c] += delta * static_cast<double>(old);
      detail::store<Shared>(w[c], static_cast<Real>(old - lr * delta * h[c]));
    }
  }
  for (FeatureId id : bag) {
    auto row = input.row(id);
    for (std::size_t c = 0; c < dim; ++c) {
      const Real old = detail::load<Shared>(row[c]);
      detail::store<Shared>(row[c], static_cast<Real>(old - lr * gh[c] * inv_bag));
    }
  }
  return loss;
}

}  // namespace lidkit
