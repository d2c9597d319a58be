#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "affect/numerics/tape.hpp"
#include "affect/rng.hpp"

namespace affect::layers {

using numerics::Parameter;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

namespace detail {

inline Tensor glorot(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  Tensor w({in, out});
  for (auto& x : w.data()) x = rng.uniform(-bound, bound);
  return w;
}

}  // namespace detail

/// Dense layer followed by softmax; outputs class probabilities.
struct SoftmaxHead {
  Parameter weight;  // in x K
  Parameter bias;    // 1 x K

  static SoftmaxHead init(std::size_t input_dim, std::size_t classes, Rng& rng) {
    return {Parameter("head.weight", detail::glorot(input_dim, classes, rng)),
            Parameter("head.bias", Tensor({1, classes}))};
  }

  std::size_t input_dim() const { return weight.value.rows(); }
  std::size_t outputs() const { return weight.value.cols(); }

  Var logits(Tape& tape, Var x) const {
    return tape.add(tape.matmul(x, tape.param(weight)), tape.param(bias));
  }
  Var forward(Tape& tape, Var x) const { return tape.softmax(logits(tape, x)); }
};

/// Affine map x alpha + beta, one output per affective dimension. The trained
/// map works on standardized targets; `target_mean` / `target_std` map its
/// output back to the dataset's scale.
struct AffineHead {
  Parameter alpha;  // in x M
  Parameter beta;   // 1 x M
  std::vector<double> target_mean;
  std::vector<double> target_std;

  static AffineHead init(std::size_t input_dim, std::size_t dims, Rng& rng) {
    return {Parameter("head.weight", detail::glorot(input_dim, dims, rng)), Parameter("head.bias", Tensor({1, dims})),
            std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0)};
  }

  std::size_t input_dim() const { return alpha.value.rows(); }
  std::size_t outputs() const { return alpha.value.cols(); }

  Var forward(Tape& tape, Var x) const {
    return tape.add(tape.matmul(x, tape.param(alpha)), tape.param(beta));
  }

  std::vector<double> to_target_scale(std::span<const double> standardized) const {
    std::vector<double> out(standardized.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = standardized[k] * target_std[k] + target_mean[k];
    return out;
  }

  std::vector<double> to_standard_scale(std::span<const double> raw) const {
    std::vector<double> out(raw.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (raw[k] - target_mean[k]) / target_std[k];
    return out;
  }
};

using Head = std::variant<SoftmaxHead, AffineHead>;

/// Numerically stable softmax of a plain vector.
inline std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double mx = *std::max_element(out.begin(), out.end());
  double z = 0.0;
  for (auto& x : out) z += (x = std::exp(x - mx));
  for (auto& x : out) x /= z;
  return out;
}

inline std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace affect::layers
