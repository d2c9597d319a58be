#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "affect/error.hpp"
#include "affect/numerics/tensor.hpp"

namespace affect::numerics {

enum class Op : std::uint8_t {
  kConstant,
  kParameter,
  kMatMul,
  kAdd,
  kSub,
  kHadamard,
  kSigmoid,
  kTanh,
  kConcat,
  kRowLookup,
  kScale,
  kSum,
  kSoftmax,
  kWeightedNll,
  kMse,
};

/// Handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  explicit Var(std::size_t id) : id_(id) {}
  std::size_t id_ = 0;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so the node list is
// already topologically sorted and backward() is a single reverse sweep.
//
// Parameter leaves do not copy their tensor: the node reads Parameter::value and
// its adjoint accumulates straight into Parameter::grad. The Parameter must
// outlive the tape and must not move while the tape is alive.
class Tape {
 public:
  static constexpr double kProbabilityClamp = 1e-12;

  /// A tape with gradients disabled records values only; backward() is an error.
  explicit Tape(bool gradients = true) : gradients_(gradients) {}

  bool gradients_enabled() const { return gradients_; }

  Var constant(Tensor value) {
    Node n;
    n.op = Op::kConstant;
    n.value = std::move(value);
    return push(std::move(n));
  }

  /// Leaf for a parameter; repeated calls return the same node.
  Var param(const Parameter& p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(it->second);
    Node n;
    n.op = Op::kParameter;
    n.param = &p;
    n.requires_grad = gradients_;
    Var v = push(std::move(n));
    param_nodes_.emplace(&p, v.id());
    return v;
  }

  const Tensor& value(Var v) const {
    const Node& n = nodes_[v.id()];
    return n.param ? n.param->value : n.value;
  }

  std::size_t size() const { return nodes_.size(); }
  Op op(Var v) const { return nodes_[v.id()].op; }

  /// Number of weighted_nll evaluations whose probability hit the clamp.
  std::size_t clamp_events() const { return clamp_events_; }

  Var matmul(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.rows()) {
      throw ShapeError("matmul: shape mismatch " + to_string(A.shape()) + " vs " + to_string(B.shape()));
    }
    const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double a_ip = A.at(i, p);
        if (a_ip == 0.0) continue;
        const double* b_row = &B.data()[p * n];
        double* o_row = &out.data()[i * n];
        for (std::size_t j = 0; j < n; ++j) o_row[j] += a_ip * b_row[j];
      }
    }
    return binary(Op::kMatMul, a, b, std::move(out));
  }

  Var add(Var a, Var b) {
    const Tensor& A = value(a);
    A.require_same_shape(value(b), "add");
    Tensor out = A;
    out += value(b);
    return binary(Op::kAdd, a, b, std::move(out));
  }

  Var sub(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    A.require_same_shape(B, "sub");
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= B[i];
    return binary(Op::kSub, a, b, std::move(out));
  }

  Var hadamard(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    A.require_same_shape(B, "hadamard");
    Tensor out = A;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
    return binary(Op::kHadamard, a, b, std::move(out));
  }

  Var sigmoid(Var a) {
    Tensor out = value(a);
    for (auto& x : out.data()) x = 1.0 / (1.0 + std::exp(-x));
    return unary(Op::kSigmoid, a, std::move(out));
  }

  Var tanh(Var a) {
    Tensor out = value(a);
    for (auto& x : out.data()) x = std::tanh(x);
    return unary(Op::kTanh, a, std::move(out));
  }

  /// Concatenation along the last axis; leading dimensions must agree.
  Var concat(Var a, Var b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.rank() != B.rank() || A.rows() != B.rows() ||
        !std::equal(A.shape().begin(), A.shape().end() - 1, B.shape().begin())) {
      throw ShapeError("concat: shape mismatch " + to_string(A.shape()) + " vs " + to_string(B.shape()));
    }
    Shape shape = A.shape();
    shape.back() = A.cols() + B.cols();
    Tensor out(shape);
    const std::size_t rows = A.size() / A.cols();
    for (std::size_t r = 0; r < rows; ++r) {
      auto dst = out.data().subspan(r * shape.back(), shape.back());
      auto a_row = A.data().subspan(r * A.cols(), A.cols());
      auto b_row = B.data().subspan(r * B.cols(), B.cols());
      std::copy(a_row.begin(), a_row.end(), dst.begin());
      std::copy(b_row.begin(), b_row.end(), dst.begin() + static_cast<std::ptrdiff_t>(A.cols()));
    }
    return binary(Op::kConcat, a, b, std::move(out));
  }

  /// Row `index` of a matrix, as a 1 x cols row.
  Var row_lookup(Var matrix, std::size_t index) {
    const Tensor& M = value(matrix);
    if (M.rank() != 2) throw ShapeError("row_lookup: expected a matrix, got " + to_string(M.shape()));
    if (index >= M.rows()) {
      throw ShapeError("row_lookup: index " + std::to_string(index) + " out of range for " + to_string(M.shape()));
    }
    auto src = M.row_span(index);
    Tensor out = Tensor::row(std::vector<double>(src.begin(), src.end()));
    Var v = unary(Op::kRowLookup, matrix, std::move(out));
    nodes_[v.id()].index = index;
    return v;
  }

  Var scale(Var a, double factor) {
    Tensor out = value(a);
    for (auto& x : out.data()) x *= factor;
    Var v = unary(Op::kScale, a, std::move(out));
    nodes_[v.id()].scalar = factor;
    return v;
  }

  Var sum(Var a) {
    double s = 0.0;
    for (double x : value(a).data()) s += x;
    return unary(Op::kSum, a, Tensor::scalar(s));
  }

  /// Row-wise softmax over the last axis, max-shifted.
  Var softmax(Var a) {
    Tensor out = value(a);
    const std::size_t cols = out.cols();
    const std::size_t rows = out.size() / cols;
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = out.data().subspan(r * cols, cols);
      const double mx = *std::max_element(row.begin(), row.end());
      double z = 0.0;
      for (auto& x : row) z += (x = std::exp(x - mx));
      for (auto& x : row) x /= z;
    }
    return unary(Op::kSoftmax, a, std::move(out));
  }

  /// weight * -log(max(p[label], clamp)) for a 1 x K probability row.
  Var weighted_nll(Var probs, std::size_t label, double weight) {
    const Tensor& P = value(probs);
    if (P.rows() != 1 || label >= P.cols()) {
      throw ShapeError("weighted_nll: label " + std::to_string(label) + " invalid for " + to_string(P.shape()));
    }
    double p = P[label];
    if (!(p > kProbabilityClamp)) {
      p = kProbabilityClamp;
      ++clamp_events_;
    }
    Var v = unary(Op::kWeightedNll, probs, Tensor::scalar(-weight * std::log(p)));
    nodes_[v.id()].index = label;
    nodes_[v.id()].scalar = weight;
    return v;
  }

  /// Mean squared difference to a fixed target of the same shape.
  Var mse(Var pred, Tensor target) {
    const Tensor& P = value(pred);
    P.require_same_shape(target, "mse");
    double s = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
      const double d = P[i] - target[i];
      s += d * d;
    }
    Var v = unary(Op::kMse, pred, Tensor::scalar(s / static_cast<double>(P.size())));
    nodes_[v.id()].saved = std::move(target);
    return v;
  }

  /// Accumulates d(loss)/d(parameter) into every reachable Parameter::grad.
  void backward(Var loss) {
    if (!gradients_) throw Error("backward: tape was recorded with gradients disabled");
    if (nodes_.empty()) throw Error("backward: tape is empty");
    if (value(loss).size() != 1) {
      throw ShapeError("backward: loss must be scalar, got shape " + to_string(value(loss).shape()));
    }
    for (std::size_t i = 0; i <= loss.id(); ++i) {
      Node& n = nodes_[i];
      if (n.requires_grad && !n.param) n.grad = Tensor::zeros_like(n.value);
    }
    grad_of(loss.id())[0] += 1.0;

    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad || n.op == Op::kParameter || n.op == Op::kConstant) continue;
      propagate(n);
    }
  }

 private:
  struct Node {
    Op op = Op::kConstant;
    std::array<std::size_t, 2> inputs{};
    std::uint8_t arity = 0;
    Tensor value;
    Tensor grad;
    const Parameter* param = nullptr;
    double scalar = 0.0;
    std::size_t index = 0;
    Tensor saved;
    bool requires_grad = false;
  };

  Var push(Node n) {
    nodes_.push_back(std::move(n));
    return Var(nodes_.size() - 1);
  }

  Var unary(Op op, Var a, Tensor out) {
    Node n;
    n.op = op;
    n.inputs = {a.id(), 0};
    n.arity = 1;
    n.value = std::move(out);
    n.requires_grad = nodes_[a.id()].requires_grad;
    return push(std::move(n));
  }

  Var binary(Op op, Var a, Var b, Tensor out) {
    Node n;
    n.op = op;
    n.inputs = {a.id(), b.id()};
    n.arity = 2;
    n.value = std::move(out);
    n.requires_grad = nodes_[a.id()].requires_grad || nodes_[b.id()].requires_grad;
    return push(std::move(n));
  }

  Tensor& grad_of(std::size_t id) {
    Node& n = nodes_[id];
    return n.param ? n.param->grad : n.grad;
  }

  const Tensor& value_of(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.param ? n.param->value : n.value;
  }

  bool needs(std::size_t id) const { return nodes_[id].requires_grad; }

  void propagate(const Node& n) {
    const Tensor& g = n.grad;
    const std::size_t a = n.inputs[0];
    const std::size_t b = n.inputs[1];
    switch (n.op) {
      case Op::kMatMul: {
        const Tensor& A = value_of(a);
        const Tensor& B = value_of(b);
        const std::size_t m = A.rows(), k = A.cols(), cols = B.cols();
        if (needs(a)) {
          Tensor& dA = grad_of(a);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              double s = 0.0;
              for (std::size_t j = 0; j < cols; ++j) s += g.at(i, j) * B.at(p, j);
              dA.at(i, p) += s;
            }
        }
        if (needs(b)) {
          Tensor& dB = grad_of(b);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double a_ip = A.at(i, p);
              if (a_ip == 0.0) continue;
              for (std::size_t j = 0; j < cols; ++j) dB.at(p, j) += a_ip * g.at(i, j);
            }
        }
        break;
      }
      case Op::kAdd:
        if (needs(a)) grad_of(a) += g;
        if (needs(b)) grad_of(b) += g;
        break;
      case Op::kSub:
        if (needs(a)) grad_of(a) += g;
        if (needs(b)) {
          Tensor& dB = grad_of(b);
          for (std::size_t i = 0; i < g.size(); ++i) dB[i] -= g[i];
        }
        break;
      case Op::kHadamard: {
        const Tensor& A = value_of(a);
        const Tensor& B = value_of(b);
        if (needs(a)) {
          Tensor& dA = grad_of(a);
          for (std::size_t i = 0; i < g.size(); ++i) dA[i] += g[i] * B[i];
        }
        if (needs(b)) {
          Tensor& dB = grad_of(b);
          for (std::size_t i = 0; i < g.size(); ++i) dB[i] += g[i] * A[i];
        }
        break;
      }
      case Op::kSigmoid: {
        Tensor& dA = grad_of(a);
        for (std::size_t i = 0; i < g.size(); ++i) dA[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
        break;
      }
      case Op::kTanh: {
        Tensor& dA = grad_of(a);
        for (std::size_t i = 0; i < g.size(); ++i) dA[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
        break;
      }
      case Op::kConcat: {
        const std::size_t ca = value_of(a).cols();
        const std::size_t cb = value_of(b).cols();
        const std::size_t rows = g.size() / (ca + cb);
        for (std::size_t r = 0; r < rows; ++r) {
          if (needs(a)) {
            Tensor& dA = grad_of(a);
            for (std::size_t j = 0; j < ca; ++j) dA[r * ca + j] += g[r * (ca + cb) + j];
          }
          if (needs(b)) {
            Tensor& dB = grad_of(b);
            for (std::size_t j = 0; j < cb; ++j) dB[r * cb + j] += g[r * (ca + cb) + ca + j];
          }
        }
        break;
      }
      case Op::kRowLookup: {
        auto row = grad_of(a).row_span(n.index);
        for (std::size_t j = 0; j < g.size(); ++j) row[j] += g[j];
        break;
      }
      case Op::kScale: {
        Tensor& dA = grad_of(a);
        for (std::size_t i = 0; i < g.size(); ++i) dA[i] += g[i] * n.scalar;
        break;
      }
      case Op::kSum: {
        Tensor& dA = grad_of(a);
        for (auto& x : dA.data()) x += g[0];
        break;
      }
      case Op::kSoftmax: {
        Tensor& dA = grad_of(a);
        const std::size_t cols = n.value.cols();
        const std::size_t rows = n.value.size() / cols;
        for (std::size_t r = 0; r < rows; ++r) {
          double dot = 0.0;
          for (std::size_t j = 0; j < cols; ++j) dot += g[r * cols + j] * n.value[r * cols + j];
          for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t i = r * cols + j;
            dA[i] += n.value[i] * (g[i] - dot);
          }
        }
        break;
      }
      case Op::kWeightedNll: {
        const double p = value_of(a)[n.index];
        // Flat beyond the clamp.
        if (p > kProbabilityClamp) grad_of(a)[n.index] += -g[0] * n.scalar / p;
        break;
      }
      case Op::kMse: {
        const Tensor& P = value_of(a);
        Tensor& dA = grad_of(a);
        const double k = 2.0 / static_cast<double>(P.size());
        for (std::size_t i = 0; i < P.size(); ++i) dA[i] += g[0] * k * (P[i] - n.saved[i]);
        break;
      }
      case Op::kConstant:
      case Op::kParameter:
        break;
    }
  }

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  std::size_t clamp_events_ = 0;
  bool gradients_ = true;
};

}  // namespace affect::numerics
