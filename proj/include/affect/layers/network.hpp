#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "affect/error.hpp"
#include "affect/layers/embedding.hpp"
#include "affect/layers/heads.hpp"
#include "affect/layers/lstm.hpp"
#include "affect/rng.hpp"

namespace affect::layers {

enum class TaskKind { kClassification, kRegression };
enum class Direction { kUnidirectional, kBidirectional };
enum class Mode { kTrain, kEval };

struct DropoutSpec {
  double recurrent_rate = 0.5;
  double output_rate = 0.5;
};

struct NetworkConfig {
  std::size_t vocab_size = 2;
  std::size_t embed_dim = 100;
  std::size_t hidden = 64;
  Direction direction = Direction::kBidirectional;
  TaskKind task = TaskKind::kClassification;
  /// Classes K (classification) or affective dimensions (regression).
  std::size_t outputs = 2;
  DropoutSpec dropout;
  bool trainable_embeddings = true;

  std::size_t encoding_dim() const { return direction == Direction::kBidirectional ? 2 * hidden : hidden; }

  void validate() const {
    if (vocab_size < 2) throw ConfigError("vocabulary must hold at least the two reserved entries");
    if (embed_dim == 0 || hidden == 0) throw ConfigError("embedding and hidden sizes must be positive");
    if (outputs == 0) throw ConfigError("network needs at least one output");
    if (task == TaskKind::kClassification && outputs < 2) throw ConfigError("classification needs K >= 2");
    for (double r : {dropout.recurrent_rate, dropout.output_rate}) {
      if (!(r >= 0.0 && r < 1.0)) throw ConfigError("dropout rates must lie in [0, 1)");
    }
  }
};

// Embedding layer -> (Bi)LSTM -> prediction head. The recurrent encoding is the
// final hidden state h_N, or [h_fwd, h_bwd] for the bidirectional variant.
class AffectNetwork {
 public:
  AffectNetwork() = default;

  AffectNetwork(const NetworkConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    Rng rng(stream_seed(seed, "init"));
    embedding_ = EmbeddingLayer::random(config_.vocab_size, config_.embed_dim, rng, config_.trainable_embeddings);
    init_recurrent(rng);
    head_ = make_head(config_.task, config_.outputs, rng);
  }

  AffectNetwork(const NetworkConfig& config, EmbeddingLayer embedding, std::uint64_t seed) : config_(config) {
    config_.vocab_size = embedding.vocab_size();
    config_.embed_dim = embedding.dim();
    embedding.trainable = config_.trainable_embeddings;
    config_.validate();
    Rng rng(stream_seed(seed, "init"));
    embedding_ = std::move(embedding);
    init_recurrent(rng);
    head_ = make_head(config_.task, config_.outputs, rng);
  }

  const NetworkConfig& config() const { return config_; }
  const EmbeddingLayer& embedding() const { return embedding_; }
  EmbeddingLayer& embedding() { return embedding_; }
  const LstmParams& forward_lstm() const { return forward_; }
  LstmParams& forward_lstm() { return forward_; }
  const std::optional<LstmParams>& backward_lstm() const { return backward_; }
  std::optional<LstmParams>& backward_lstm() { return backward_; }
  const Head& head() const { return head_; }
  Head& head() { return head_; }
  bool bidirectional() const { return backward_.has_value(); }

  /// Swaps in a freshly initialized head for a (possibly different) task.
  void replace_head(TaskKind task, std::size_t outputs, std::uint64_t seed) {
    NetworkConfig next = config_;
    next.task = task;
    next.outputs = outputs;
    next.validate();
    config_ = next;
    Rng rng(stream_seed(seed, "head"));
    head_ = make_head(task, outputs, rng);
  }

  void set_dropout(const DropoutSpec& dropout) {
    NetworkConfig next = config_;
    next.dropout = dropout;
    next.validate();
    config_ = next;
  }

  void set_embeddings_trainable(bool trainable) {
    config_.trainable_embeddings = trainable;
    embedding_.trainable = trainable;
  }

  /// Input to the head: the recurrent encoding, with output dropout in train mode.
  Var encode(Tape& tape, std::span<const std::size_t> ids, Mode mode, Rng* rng = nullptr) const {
    if (ids.empty()) throw Error("encode: empty sequence");
    const bool train = mode == Mode::kTrain;
    const auto& rates = config_.dropout;
    if (train && (rates.recurrent_rate > 0.0 || rates.output_rate > 0.0) && rng == nullptr) {
      throw Error("encode: train mode with dropout needs a random generator");
    }
    auto mask_for = [&](std::size_t width, double rate) -> std::optional<Var> {
      if (!train || rate <= 0.0) return std::nullopt;
      return tape.constant(dropout_mask(width, rate, *rng));
    };

    const std::vector<Var> inputs = embedding_.embed(tape, ids);
    const auto fwd_mask = mask_for(config_.hidden, rates.recurrent_rate);
    Var encoding = run_lstm(tape, forward_, inputs, fwd_mask).h;
    if (backward_) {
      const std::vector<Var> reversed(inputs.rbegin(), inputs.rend());
      const auto bwd_mask = mask_for(config_.hidden, rates.recurrent_rate);
      encoding = tape.concat(encoding, run_lstm(tape, *backward_, reversed, bwd_mask).h);
    }
    if (auto out_mask = mask_for(config_.encoding_dim(), rates.output_rate)) {
      encoding = tape.hadamard(encoding, *out_mask);
    }
    return encoding;
  }

  /// Probabilities (classification) or standardized scores (regression).
  Var forward(Tape& tape, std::span<const std::size_t> ids, Mode mode, Rng* rng = nullptr) const {
    return head_forward(tape, encode(tape, ids, mode, rng));
  }

  Var head_forward(Tape& tape, Var encoding) const {
    return std::visit([&](const auto& h) { return h.forward(tape, encoding); }, head_);
  }

  std::vector<double> encoding(std::span<const std::size_t> ids, Mode mode = Mode::kEval, Rng* rng = nullptr) const {
    Tape tape(false);
    const auto& v = tape.value(encode(tape, ids, mode, rng));
    return {v.data().begin(), v.data().end()};
  }

  /// Eval-mode output: class probabilities, or scores on the dataset's scale.
  std::vector<double> predict(std::span<const std::size_t> ids) const {
    Tape tape(false);
    const auto& v = tape.value(forward(tape, ids, Mode::kEval));
    std::vector<double> out(v.data().begin(), v.data().end());
    if (const auto* affine = std::get_if<AffineHead>(&head_)) return affine->to_target_scale(out);
    return out;
  }

  std::size_t predict_label(std::span<const std::size_t> ids) const {
    if (config_.task != TaskKind::kClassification) throw Error("predict_label: network has a regression head");
    const auto p = predict(ids);
    return argmax(p);
  }

  std::vector<Parameter*> head_parameters() {
    return std::visit(
        [](auto& h) -> std::vector<Parameter*> {
          if constexpr (std::is_same_v<std::decay_t<decltype(h)>, SoftmaxHead>) {
            return {&h.weight, &h.bias};
          } else {
            return {&h.alpha, &h.beta};
          }
        },
        head_);
  }

  std::vector<Parameter*> encoder_parameters() {
    std::vector<Parameter*> out;
    if (embedding_.trainable) out.push_back(&embedding_.table);
    for (auto* p : forward_.parameters()) out.push_back(p);
    if (backward_) {
      for (auto* p : backward_->parameters()) out.push_back(p);
    }
    return out;
  }

  /// Every trainable parameter.
  std::vector<Parameter*> parameters() {
    auto out = encoder_parameters();
    for (auto* p : head_parameters()) out.push_back(p);
    return out;
  }

  /// Every tensor of the model, including a frozen embedding table.
  std::vector<Parameter*> all_parameters() {
    auto out = parameters();
    if (!embedding_.trainable) out.insert(out.begin(), &embedding_.table);
    return out;
  }

  std::vector<const Parameter*> all_parameters() const {
    auto ptrs = const_cast<AffectNetwork*>(this)->all_parameters();
    return {ptrs.begin(), ptrs.end()};
  }

  void zero_grad() {
    for (auto* p : all_parameters()) p->zero_grad();
  }

 private:
  void init_recurrent(Rng& rng) {
    forward_ = LstmParams::init("forward", config_.embed_dim, config_.hidden, rng);
    if (config_.direction == Direction::kBidirectional) {
      backward_ = LstmParams::init("backward", config_.embed_dim, config_.hidden, rng);
    } else {
      backward_.reset();
    }
  }

  Head make_head(TaskKind task, std::size_t outputs, Rng& rng) const {
    if (task == TaskKind::kClassification) return SoftmaxHead::init(config_.encoding_dim(), outputs, rng);
    return AffineHead::init(config_.encoding_dim(), outputs, rng);
  }

  NetworkConfig config_;
  EmbeddingLayer embedding_;
  LstmParams forward_;
  std::optional<LstmParams> backward_;
  Head head_;
};

}  // namespace affect::layers
