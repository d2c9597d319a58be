#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "affect/error.hpp"
#include "affect/numerics/tensor.hpp"

namespace affect::training {

using numerics::Parameter;
using numerics::Tensor;

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw ConfigError("Adam betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
  }
};

/// Bias-corrected Adam over a fixed parameter list. step() consumes and resets
/// the parameters' gradient accumulators.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig config = {}) : params_(std::move(params)), config_(config) {
    config_.validate();
    for (auto* p : params_) {
      m_.push_back(Tensor::zeros_like(p->value));
      v_.push_back(Tensor::zeros_like(p->value));
    }
  }

  void step() {
    for (auto* p : params_) {
      for (double g : p->grad.data()) {
        if (!std::isfinite(g)) throw TrainingError("non-finite gradient in parameter '" + p->name + "'");
      }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      Parameter& p = *params_[k];
      auto value = p.value.data();
      auto grad = p.grad.data();
      auto m = m_[k].data();
      auto v = v_[k].data();
      for (std::size_t i = 0; i < value.size(); ++i) {
        m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * grad[i];
        v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
        value[i] -= config_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
      }
      p.zero_grad();
    }
  }

  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  std::vector<Parameter*> params_;
  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::size_t t_ = 0;
};

}  // namespace affect::training
