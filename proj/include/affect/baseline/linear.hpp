#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "affect/baseline/tfidf.hpp"
#include "affect/error.hpp"
#include "affect/layers/heads.hpp"
#include "affect/objective.hpp"
#include "affect/rng.hpp"

namespace affect::baseline {

enum class LinearTask { kLogistic, kLeastSquares };

struct LinearConfig {
  /// L2 penalty on the weights (the bias is not penalized).
  double l2 = 1e-4;
  double learning_rate = 0.5;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(l2 >= 0.0)) throw ConfigError("l2 penalty must be non-negative");
    if (!(learning_rate > 0.0)) throw ConfigError("linear learning rate must be positive");
    if (epochs == 0 || batch_size == 0) throw ConfigError("linear epochs and batch size must be positive");
  }
};

/// Multinomial logistic regression (K outputs) or least-squares regression
/// (one output per dimension) over sparse features.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(LinearTask task, std::size_t outputs, std::size_t dim)
      : task_(task), outputs_(outputs), dim_(dim), weights_(outputs * dim, 0.0), bias_(outputs, 0.0) {}

  LinearTask task() const { return task_; }
  std::size_t outputs() const { return outputs_; }
  std::size_t dimension() const { return dim_; }
  double weight(std::size_t k, std::size_t j) const { return weights_[k * dim_ + j]; }
  double& weight(std::size_t k, std::size_t j) { return weights_[k * dim_ + j]; }
  std::span<const double> weights() const { return weights_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }

  /// Logits (logistic) or scores (least squares).
  std::vector<double> decision(const SparseVector& x) const {
    std::vector<double> out = bias_;
    for (const auto& [j, v] : x.entries) {
      if (j >= dim_) {
        throw ShapeError("linear model: feature index " + std::to_string(j) + " >= dimension " +
                         std::to_string(dim_));
      }
      for (std::size_t k = 0; k < outputs_; ++k) out[k] += weights_[k * dim_ + j] * v;
    }
    return out;
  }

  std::vector<double> predict_proba(const SparseVector& x) const {
    if (task_ != LinearTask::kLogistic) throw Error("predict_proba: model is not a classifier");
    return layers::softmax(decision(x));
  }

  std::size_t predict_label(const SparseVector& x) const {
    const auto z = decision(x);
    return layers::argmax(z);
  }

  std::vector<double> predict_scores(const SparseVector& x) const {
    if (task_ != LinearTask::kLeastSquares) throw Error("predict_scores: model is not a regressor");
    return decision(x);
  }

 private:
  LinearTask task_ = LinearTask::kLogistic;
  std::size_t outputs_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

namespace detail {

inline void check_features(const std::vector<SparseVector>& features, std::size_t dim) {
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (const auto& [j, _] : features[i].entries) {
      if (j >= dim) {
        throw ShapeError("features row " + std::to_string(i) + " index " + std::to_string(j) + " >= dimension " +
                         std::to_string(dim));
      }
    }
  }
}

// Mini-batch gradient descent. `residual(i, out)` overwrites `out` with
// d(loss_i)/d(decision). The L2 term is applied as an implicit (proximal) decay
// w <- (w - lr g) / (1 + lr l2), stable for any penalty size.
template <class Residual>
void fit(LinearModel& model, const std::vector<SparseVector>& features, const LinearConfig& config,
         Residual&& residual) {
  const std::size_t n = features.size();
  const std::size_t K = model.outputs();
  const std::size_t D = model.dimension();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(stream_seed(config.seed, "linear"));
  std::vector<double> grad_w(K * D, 0.0), grad_b(K, 0.0), r(K);
  std::vector<std::size_t> touched;
  const double decay = 1.0 / (1.0 + config.learning_rate * config.l2);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      touched.clear();
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        residual(i, r);
        for (std::size_t k = 0; k < K; ++k) {
          if (!std::isfinite(r[k])) {
            throw TrainingError("linear model diverged at epoch " + std::to_string(epoch + 1));
          }
          grad_b[k] += r[k] * scale;
        }
        for (const auto& [j, v] : features[i].entries) {
          touched.push_back(j);
          for (std::size_t k = 0; k < K; ++k) grad_w[k * D + j] += r[k] * v * scale;
        }
      }
      // Every weight decays; only touched columns carry a data gradient.
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t j = 0; j < D; ++j) model.weight(k, j) *= decay;
        model.bias()[k] -= config.learning_rate * grad_b[k];
      }
      std::sort(touched.begin(), touched.end());
      touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
      for (auto j : touched) {
        for (std::size_t k = 0; k < K; ++k) {
          model.weight(k, j) -= config.learning_rate * grad_w[k * D + j] * decay;
          grad_w[k * D + j] = 0.0;
        }
      }
    }
  }
}

}  // namespace detail

/// Class-weighted multinomial logistic regression. `weights` null: uniform weights.
inline LinearModel train_logistic(const std::vector<SparseVector>& features, std::span<const std::size_t> labels,
                                  std::size_t num_classes, std::size_t dim, const objective::ClassWeights* weights,
                                  const LinearConfig& config = {}) {
  config.validate();
  if (features.size() != labels.size()) throw ShapeError("train_logistic: features and labels differ in length");
  if (features.empty()) throw DataError("train_logistic: no training rows");
  if (num_classes < 2) throw ConfigError("train_logistic: K must be at least 2");
  detail::check_features(features, dim);
  for (auto y : labels) {
    if (y >= num_classes) throw DataError("train_logistic: label out of range");
  }
  const auto w = weights ? *weights : objective::ClassWeights::uniform(num_classes);
  LinearModel model(LinearTask::kLogistic, num_classes, dim);
  detail::fit(model, features, config, [&](std::size_t i, std::vector<double>& r) {
    const auto p = layers::softmax(model.decision(features[i]));
    for (std::size_t k = 0; k < num_classes; ++k) r[k] = w[labels[i]] * (p[k] - (k == labels[i] ? 1.0 : 0.0));
  });
  return model;
}

/// Least-squares regression, one output per target dimension, loss 1/2 (y - f)^2.
inline LinearModel train_least_squares(const std::vector<SparseVector>& features,
                                       const std::vector<std::vector<double>>& targets, std::size_t dim,
                                       const LinearConfig& config = {}) {
  config.validate();
  if (features.size() != targets.size()) throw ShapeError("train_least_squares: features and targets differ");
  if (features.empty()) throw DataError("train_least_squares: no training rows");
  detail::check_features(features, dim);
  const std::size_t m = targets.front().size();
  for (const auto& t : targets) {
    if (t.size() != m) throw ShapeError("train_least_squares: ragged targets");
  }
  LinearModel model(LinearTask::kLeastSquares, m, dim);
  detail::fit(model, features, config, [&](std::size_t i, std::vector<double>& r) {
    const auto f = model.decision(features[i]);
    for (std::size_t k = 0; k < m; ++k) r[k] = f[k] - targets[i][k];
  });
  return model;
}

}  // namespace affect::baseline
