#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affect/error.hpp"
#include "affect/numerics/tape.hpp"
#include "affect/rng.hpp"

namespace affect::layers {

using numerics::Parameter;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCandidate = 3 };
inline constexpr std::array<const char*, 4> kGateNames = {"i", "f", "o", "g"};

struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden = 0;
  std::array<Parameter, 4> input_weights;      // D x H per gate
  std::array<Parameter, 4> recurrent_weights;  // H x H per gate
  std::array<Parameter, 4> biases;             // 1 x H per gate

  /// Glorot-uniform weights, zero biases except the forget gate (bias 1).
  static LstmParams init(const std::string& prefix, std::size_t input_dim, std::size_t hidden, Rng& rng) {
    LstmParams p;
    p.input_dim = input_dim;
    p.hidden = hidden;
    const double bx = std::sqrt(6.0 / static_cast<double>(input_dim + hidden));
    const double bh = std::sqrt(6.0 / static_cast<double>(2 * hidden));
    for (std::size_t g = 0; g < 4; ++g) {
      Tensor wx({input_dim, hidden});
      for (auto& x : wx.data()) x = rng.uniform(-bx, bx);
      Tensor wh({hidden, hidden});
      for (auto& x : wh.data()) x = rng.uniform(-bh, bh);
      Tensor b({1, hidden}, g == kForgetGate ? 1.0 : 0.0);
      const std::string gate = kGateNames[g];
      p.input_weights[g] = Parameter(prefix + ".wx_" + gate, std::move(wx));
      p.recurrent_weights[g] = Parameter(prefix + ".wh_" + gate, std::move(wh));
      p.biases[g] = Parameter(prefix + ".b_" + gate, std::move(b));
    }
    return p;
  }

  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out;
    for (std::size_t g = 0; g < 4; ++g) {
      out.push_back(&input_weights[g]);
      out.push_back(&recurrent_weights[g]);
      out.push_back(&biases[g]);
    }
    return out;
  }

  std::vector<const Parameter*> parameters() const {
    std::vector<const Parameter*> out;
    for (std::size_t g = 0; g < 4; ++g) {
      out.push_back(&input_weights[g]);
      out.push_back(&recurrent_weights[g]);
      out.push_back(&biases[g]);
    }
    return out;
  }
};

struct LstmState {
  Var h;
  Var c;
  std::size_t step = 0;
};

inline LstmState initial_state(Tape& tape, std::size_t hidden) {
  return {tape.constant(Tensor({1, hidden})), tape.constant(Tensor({1, hidden})), 0};
}

/// Inverted-dropout keep mask: each unit is 1/(1-rate) with probability 1-rate, else 0.
inline Tensor dropout_mask(std::size_t width, double rate, Rng& rng) {
  Tensor m({1, width});
  const double keep = 1.0 / (1.0 - rate);
  for (auto& x : m.data()) x = rng.bernoulli(rate) ? 0.0 : keep;
  return m;
}

/// One LSTM update. `recurrent_mask`, when present, multiplies h_{t-1} before it
/// enters the gates; callers pass the same mask at every step of a sequence.
///   i, f, o = sigmoid(e Wx + h Wh + b),  g = tanh(e Wx + h Wh + b)
///   c = f * c_prev + i * g,  h = o * tanh(c)
inline LstmState lstm_step(Tape& tape, const LstmParams& params, Var input, const LstmState& prev,
                           std::optional<Var> recurrent_mask = std::nullopt) {
  const Tensor& e = tape.value(input);
  if (e.rows() != 1 || e.cols() != params.input_dim) {
    throw ShapeError("lstm_step: input shape " + numerics::to_string(e.shape()) + " vs expected [1x" +
                     std::to_string(params.input_dim) + "]");
  }
  Var h_in = recurrent_mask ? tape.hadamard(prev.h, *recurrent_mask) : prev.h;
  std::array<Var, 4> pre;
  for (std::size_t g = 0; g < 4; ++g) {
    Var x_part = tape.matmul(input, tape.param(params.input_weights[g]));
    Var h_part = tape.matmul(h_in, tape.param(params.recurrent_weights[g]));
    pre[g] = tape.add(tape.add(x_part, h_part), tape.param(params.biases[g]));
  }
  Var i = tape.sigmoid(pre[kInputGate]);
  Var f = tape.sigmoid(pre[kForgetGate]);
  Var o = tape.sigmoid(pre[kOutputGate]);
  Var g = tape.tanh(pre[kCandidate]);
  Var c = tape.add(tape.hadamard(f, prev.c), tape.hadamard(i, g));
  Var h = tape.hadamard(o, tape.tanh(c));
  return {h, c, prev.step + 1};
}

/// Runs the cell over `inputs` in order from a zero state; returns the final state.
inline LstmState run_lstm(Tape& tape, const LstmParams& params, std::span<const Var> inputs,
                          std::optional<Var> recurrent_mask = std::nullopt) {
  if (inputs.empty()) throw Error("run_lstm: empty sequence");
  LstmState state = initial_state(tape, params.hidden);
  for (Var e : inputs) state = lstm_step(tape, params, e, state, recurrent_mask);
  return state;
}

}  // namespace affect::layers
