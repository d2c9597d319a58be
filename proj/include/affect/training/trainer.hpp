#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "affect/corpus/dataset.hpp"
#include "affect/error.hpp"
#include "affect/layers/network.hpp"
#include "affect/metrics.hpp"
#include "affect/objective.hpp"
#include "affect/rng.hpp"
#include "affect/training/adam.hpp"

namespace affect::training {

using corpus::LabeledCorpus;
using corpus::ScoredCorpus;
using layers::AffectNetwork;
using layers::Mode;
using numerics::Tape;
using numerics::Var;

enum class FineTuneScope { kFull, kHeadOnly };

struct TrainConfig {
  std::size_t max_epochs = 50;
  std::size_t batch_size = 32;
  double validation_fraction = 0.1;
  std::size_t patience = 1;
  std::uint64_t seed = 1;
  AdamConfig adam;
  /// Inverse-frequency class weights for classification; uniform weights when off.
  bool class_weighting = true;
  /// When off, training always runs max_epochs; the best-validation weights are still restored.
  bool early_stopping = true;
  /// Restore the parameters of the epoch with the lowest validation loss.
  bool restore_best = true;
  FineTuneScope scope = FineTuneScope::kFull;
  /// Progress lines `epoch <n> train_loss <x> val_loss <y>` go here when set.
  std::ostream* log = nullptr;

  void validate() const {
    if (max_epochs == 0) throw ConfigError("max_epochs must be at least 1");
    if (batch_size == 0) throw ConfigError("batch_size must be at least 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
      throw ConfigError("validation_fraction must lie in (0, 1)");
    }
    if (patience < 1) throw ConfigError("patience must be at least 1");
    adam.validate();
  }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  /// Classification only.
  std::optional<double> val_accuracy;
  std::size_t clamp_events = 0;
};

struct TrainResult {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  bool stopped_early = false;
  std::uint64_t seed = 0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;

  std::size_t epochs_run() const { return epochs.size(); }

  /// First epoch (1-based) whose validation accuracy reached `threshold`.
  std::optional<std::size_t> epochs_to_accuracy(double threshold) const {
    for (const auto& e : epochs) {
      if (e.val_accuracy && *e.val_accuracy >= threshold) return e.epoch;
    }
    return std::nullopt;
  }
};

/// Stops once validation loss has failed to improve for `patience` consecutive epochs.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Records one epoch's validation loss; returns true when training should stop.
  bool update(double val_loss) {
    ++epoch_;
    if (val_loss < best_) {
      best_ = val_loss;
      best_epoch_ = epoch_;
      stale_ = 0;
      last_improved_ = true;
    } else {
      ++stale_;
      last_improved_ = false;
    }
    return stale_ >= patience_;
  }

  bool improved() const { return last_improved_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t stale_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
  bool last_improved_ = false;
};

// ---------------------------------------------------------------------------
// Evaluation

inline std::vector<std::size_t> predict_labels(const AffectNetwork& net, const LabeledCorpus& data) {
  std::vector<std::size_t> out;
  out.reserve(data.size());
  for (const auto& d : data.documents()) out.push_back(net.predict_label(d.ids));
  return out;
}

inline metrics::ClassificationReport evaluate(const AffectNetwork& net, const LabeledCorpus& data) {
  const auto labels = data.labels();
  return metrics::classification_report(predict_labels(net, data), labels, data.num_classes());
}

inline metrics::RegressionReport evaluate(const AffectNetwork& net, const ScoredCorpus& data) {
  std::vector<std::vector<double>> preds, targets;
  for (const auto& d : data.documents()) {
    preds.push_back(net.predict(d.ids));
    targets.push_back(d.scores);
  }
  std::vector<std::string> names;
  for (const auto& dim : data.dimensions()) names.push_back(dim.name);
  return metrics::regression_report(preds, targets, names);
}

inline double accuracy(const AffectNetwork& net, const LabeledCorpus& data) {
  std::size_t correct = 0;
  for (const auto& d : data.documents()) correct += net.predict_label(d.ids) == d.label;
  return data.size() == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace detail {

// Per-task pieces of the loop: how one document's loss is recorded.
struct ClassificationTask {
  const LabeledCorpus& data;
  objective::ClassWeights weights;

  std::size_t size() const { return data.size(); }
  std::span<const std::size_t> ids(std::size_t i) const { return data[i].ids; }
  Var loss(Tape& tape, Var out, std::size_t i) const {
    return objective::weighted_ce(tape, out, data[i].label, weights);
  }
};

struct RegressionTask {
  const ScoredCorpus& data;
  const layers::AffineHead* head;

  std::size_t size() const { return data.size(); }
  std::span<const std::size_t> ids(std::size_t i) const { return data[i].ids; }
  Var loss(Tape& tape, Var out, std::size_t i) const {
    return objective::mse_loss(tape, out, head->to_standard_scale(data[i].scores));
  }
};

inline std::vector<Tensor> snapshot(const std::vector<Parameter*>& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (auto* p : params) out.push_back(p->value);
  return out;
}

inline void restore(const std::vector<Parameter*>& params, const std::vector<Tensor>& values) {
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = values[k];
}

/// Mean loss over `task` in eval mode, no gradients.
template <class Task>
double mean_loss(const AffectNetwork& net, const Task& task, std::size_t* clamps = nullptr) {
  double total = 0.0;
  for (std::size_t i = 0; i < task.size(); ++i) {
    Tape tape(false);
    Var out = net.forward(tape, task.ids(i), Mode::kEval);
    total += tape.value(task.loss(tape, out, i))[0];
    if (clamps) *clamps += tape.clamp_events();
  }
  return total / static_cast<double>(task.size());
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

template <class Task>
TrainResult run_loop(AffectNetwork& net, const Task& train_task, const Task& val_task,
                     const LabeledCorpus* val_labels, const TrainConfig& config) {
  TrainResult result;
  result.seed = config.seed;
  result.train_size = train_task.size();
  result.validation_size = val_task.size();

  const bool head_only = config.scope == FineTuneScope::kHeadOnly;
  const std::vector<Parameter*> trainable = head_only ? net.head_parameters() : net.parameters();
  const std::vector<Parameter*> everything = net.all_parameters();
  Adam adam(trainable, config.adam);
  Rng shuffle_rng(stream_seed(config.seed, "shuffle"));
  Rng dropout_rng(stream_seed(config.seed, "dropout"));
  EarlyStopping stopper(config.patience);
  std::vector<Tensor> best = snapshot(everything);
  net.zero_grad();

  std::vector<std::size_t> order(train_task.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    std::size_t clamps = 0;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += config.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t j = start; j < end; ++j) {
        const std::size_t i = order[j];
        Tape tape;
        Var out;
        if (head_only) {
          // The encoder is frozen: record it without gradients, feed its value to the head.
          Tape frozen(false);
          Var enc = net.encode(frozen, train_task.ids(i), Mode::kTrain, &dropout_rng);
          out = net.head_forward(tape, tape.constant(frozen.value(enc)));
        } else {
          out = net.forward(tape, train_task.ids(i), Mode::kTrain, &dropout_rng);
        }
        Var loss = train_task.loss(tape, out, i);
        const double value = tape.value(loss)[0];
        if (!std::isfinite(value)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                              std::to_string(batch));
        }
        epoch_loss += value;
        clamps += tape.clamp_events();
        tape.backward(tape.scale(loss, scale));
      }
      try {
        adam.step();
      } catch (const TrainingError& e) {
        throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + " batch " +
                            std::to_string(batch));
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(order.size());
    rec.val_loss = mean_loss(net, val_task, &clamps);
    rec.clamp_events = clamps;
    if (val_labels) rec.val_accuracy = accuracy(net, *val_labels);
    if (!std::isfinite(rec.val_loss)) {
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    result.epochs.push_back(rec);
    if (config.log) {
      *config.log << "epoch " << epoch << " train_loss " << format_number(rec.train_loss) << " val_loss "
                  << format_number(rec.val_loss) << "\n";
    }
    const bool stop = stopper.update(rec.val_loss);
    if (stopper.improved()) best = snapshot(everything);
    if (stop && config.early_stopping) {
      result.stopped_early = epoch < config.max_epochs;
      break;
    }
  }
  result.best_epoch = stopper.best_epoch();
  result.best_val_loss = stopper.best_loss();
  if (config.restore_best) restore(everything, best);
  return result;
}

}  // namespace detail

/// Trains on `train` and early-stops on `validation`. Class weights come from
/// `weights_from` (defaults to `train`).
inline TrainResult train(AffectNetwork& net, const LabeledCorpus& train, const LabeledCorpus& validation,
                         const TrainConfig& config, const LabeledCorpus* weights_from = nullptr) {
  config.validate();
  if (train.size() == 0 || validation.size() == 0) throw DataError("train: empty training or validation corpus");
  if (net.config().task != layers::TaskKind::kClassification || net.config().outputs != train.num_classes()) {
    throw ConfigError("train: network head does not match a " + std::to_string(train.num_classes()) +
                      "-class corpus");
  }
  const auto& source = weights_from ? *weights_from : train;
  const auto labels = source.labels();
  const auto weights = config.class_weighting ? objective::class_weights(labels, train.num_classes())
                                              : objective::ClassWeights::uniform(train.num_classes());
  const detail::ClassificationTask train_task{train, weights};
  const detail::ClassificationTask val_task{validation, weights};
  return detail::run_loop(net, train_task, val_task, &validation, config);
}

/// Carves a seeded validation fraction off `data`, then trains. Class weights
/// use all of `data`, so a class missing from the carved part keeps its weight.
inline TrainResult train(AffectNetwork& net, const LabeledCorpus& data, const TrainConfig& config) {
  config.validate();
  const auto parts = corpus::split(data, 1.0 - config.validation_fraction, stream_seed(config.seed, "validation"));
  return train(net, parts.train, parts.test, config, &data);
}

inline TrainResult train(AffectNetwork& net, const ScoredCorpus& train, const ScoredCorpus& validation,
                         const TrainConfig& config) {
  config.validate();
  if (train.size() == 0 || validation.size() == 0) throw DataError("train: empty training or validation corpus");
  auto* head = std::get_if<layers::AffineHead>(&net.head());
  if (head == nullptr || head->outputs() != train.dimensions().size()) {
    throw ConfigError("train: network head does not match a " + std::to_string(train.dimensions().size()) +
                      "-dimension corpus");
  }
  // Standardize targets with training-portion statistics.
  const std::size_t m = train.dimensions().size();
  std::vector<double> mean(m, 0.0), sd(m, 0.0);
  for (const auto& d : train.documents())
    for (std::size_t k = 0; k < m; ++k) mean[k] += d.scores[k];
  for (auto& v : mean) v /= static_cast<double>(train.size());
  for (const auto& d : train.documents())
    for (std::size_t k = 0; k < m; ++k) sd[k] += (d.scores[k] - mean[k]) * (d.scores[k] - mean[k]);
  for (auto& v : sd) {
    v = std::sqrt(v / static_cast<double>(train.size()));
    if (!(v > 0.0)) v = 1.0;
  }
  head->target_mean = mean;
  head->target_std = sd;
  const detail::RegressionTask train_task{train, head};
  const detail::RegressionTask val_task{validation, head};
  return detail::run_loop(net, train_task, val_task, nullptr, config);
}

inline TrainResult train(AffectNetwork& net, const ScoredCorpus& data, const TrainConfig& config) {
  config.validate();
  const auto parts = corpus::split(data, 1.0 - config.validation_fraction, stream_seed(config.seed, "validation"));
  return train(net, parts.train, parts.test, config);
}

}  // namespace affect::training
