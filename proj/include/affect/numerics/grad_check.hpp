#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "affect/numerics/tape.hpp"

namespace affect::numerics {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares tape gradients with central differences (f(p+h) - f(p-h)) / 2h for
/// every coordinate of every parameter. `build` records a scalar loss on the tape
/// it is given and must be deterministic. Relative error uses the denominator
/// max(|analytic|, |numeric|, 1e-8). Parameter gradients are left reset to zero.
template <class BuildLoss>
GradCheckResult grad_check_detailed(BuildLoss&& build, std::span<Parameter* const> params, double h = 1e-5) {
  for (auto* p : params) p->zero_grad();
  {
    Tape tape;
    Var loss = build(tape);
    tape.backward(loss);
  }
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (auto* p : params) analytic.push_back(p->grad);

  auto evaluate = [&] {
    Tape tape;
    Var loss = build(tape);
    return tape.value(loss)[0];
  };

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + h;
      const double plus = evaluate();
      p.value[i] = saved - h;
      const double minus = evaluate();
      p.value[i] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double err = std::abs(a - numeric) / denom;
      if (err > result.max_relative_error || (k == 0 && i == 0)) {
        result = {err, p.name, i, a, numeric};
      }
    }
  }
  for (auto* p : params) p->zero_grad();
  return result;
}

template <class BuildLoss>
double grad_check(BuildLoss&& build, std::span<Parameter* const> params, double h = 1e-5) {
  return grad_check_detailed(std::forward<BuildLoss>(build), params, h).max_relative_error;
}

}  // namespace affect::numerics
