#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "affect/error.hpp"
#include "affect/numerics/tape.hpp"

namespace affect::objective {

using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

inline constexpr double kProbabilityClamp = numerics::Tape::kProbabilityClamp;

/// Inverse-class-frequency weights: w_k = N / (K * n_k).
struct ClassWeights {
  std::vector<double> weights;
  std::vector<std::size_t> counts;
  std::size_t total = 0;

  double operator[](std::size_t k) const { return weights.at(k); }
  std::size_t num_classes() const { return weights.size(); }

  static ClassWeights uniform(std::size_t num_classes) {
    return {std::vector<double>(num_classes, 1.0), std::vector<std::size_t>(num_classes, 0), 0};
  }
};

inline ClassWeights class_weights(std::span<const std::size_t> labels, std::size_t num_classes) {
  if (num_classes == 0) throw Error("class_weights: K must be positive");
  ClassWeights w;
  w.counts.assign(num_classes, 0);
  for (auto y : labels) {
    if (y >= num_classes) {
      throw Error("class_weights: label " + std::to_string(y) + " >= K=" + std::to_string(num_classes));
    }
    ++w.counts[y];
  }
  w.total = labels.size();
  w.weights.resize(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (w.counts[k] == 0) {
      throw Error("class_weights: class " + std::to_string(k) + " has no samples, weight undefined");
    }
    w.weights[k] = static_cast<double>(w.total) / (static_cast<double>(num_classes) * static_cast<double>(w.counts[k]));
  }
  return w;
}

struct LossValue {
  double value = 0.0;
  bool clamped = false;
};

/// w_y * -log(p_y), with p_y clamped to 1e-12 before the log.
inline LossValue weighted_ce(std::span<const double> probs, std::size_t label, double weight) {
  if (label >= probs.size()) throw Error("weighted_ce: label out of range");
  const bool clamped = !(probs[label] > kProbabilityClamp);
  const double p = clamped ? kProbabilityClamp : probs[label];
  return {-weight * std::log(p), clamped};
}

inline LossValue weighted_ce(std::span<const double> probs, std::size_t label, const ClassWeights& w) {
  return weighted_ce(probs, label, w[label]);
}

inline Var weighted_ce(Tape& tape, Var probs, std::size_t label, const ClassWeights& w) {
  return tape.weighted_nll(probs, label, w[label]);
}

inline double mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw ShapeError("mse_loss: length mismatch " + std::to_string(pred.size()) + " vs " +
                     std::to_string(target.size()));
  }
  if (pred.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

inline Var mse_loss(Tape& tape, Var pred, std::span<const double> target) {
  const auto& shape = tape.value(pred).shape();
  if (tape.value(pred).size() != target.size()) {
    throw ShapeError("mse_loss: length mismatch " + numerics::to_string(shape) + " vs " +
                     std::to_string(target.size()));
  }
  return tape.mse(pred, Tensor(shape, std::vector<double>(target.begin(), target.end())));
}

}  // namespace affect::objective
