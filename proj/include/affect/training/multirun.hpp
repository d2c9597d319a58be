#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "affect/training/trainer.hpp"

namespace affect::training {

/// Builds a fresh network for one run from that run's seed.
using NetworkFactory = std::function<AffectNetwork(std::uint64_t seed)>;

struct RunSummary {
  std::uint64_t seed = 0;
  TrainResult training;
  std::optional<metrics::ClassificationReport> classification;
  std::optional<metrics::RegressionReport> regression;
  std::map<std::string, double> metrics;
  AffectNetwork model;
  /// Progress log lines of this run.
  std::string log;
};

struct MetricStats {
  double mean = 0.0;
  /// Sample standard deviation; 0 for a single run.
  double stddev = 0.0;
};

struct MultirunResult {
  std::vector<RunSummary> runs;
  std::map<std::string, MetricStats> summary;
  /// Index of the run with the lowest best-validation loss.
  std::size_t best_run = 0;
};

inline std::map<std::string, double> metric_map(const metrics::ClassificationReport& r) {
  return {{"weighted_f1", r.weighted_f1},
          {"weighted_sensitivity", r.weighted_sensitivity},
          {"weighted_specificity", r.weighted_specificity},
          {"accuracy", r.accuracy},
          {"macro_recall", r.macro_recall}};
}

inline std::map<std::string, double> metric_map(const metrics::RegressionReport& r) {
  std::map<std::string, double> out{{"mean_mse", r.mean_mse}};
  for (std::size_t d = 0; d < r.dimensions.size(); ++d) out["mse_" + r.dimensions[d]] = r.mse[d];
  return out;
}

inline std::map<std::string, MetricStats> summarize(const std::vector<std::map<std::string, double>>& rows) {
  std::map<std::string, MetricStats> out;
  if (rows.empty()) return out;
  for (const auto& [name, _] : rows.front()) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r.at(name);
    mean /= static_cast<double>(rows.size());
    double ss = 0.0;
    for (const auto& r : rows) ss += (r.at(name) - mean) * (r.at(name) - mean);
    const double sd = rows.size() > 1 ? std::sqrt(ss / static_cast<double>(rows.size() - 1)) : 0.0;
    out[name] = {mean, sd};
  }
  return out;
}

/// Runs `runs` independent trainings with seeds seed, seed+1, ...; each run
/// carves its own validation part from `train_data` and is scored on `test_data`.
/// Runs execute on up to `threads` worker threads (0: hardware concurrency).
template <class Corpus>
MultirunResult multirun(const Corpus& train_data, const Corpus& test_data, const NetworkFactory& factory,
                        const TrainConfig& config, std::size_t runs = 10, std::size_t threads = 0) {
  if (runs < 1) throw ConfigError("runs must be at least 1");
  config.validate();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, runs);

  std::vector<std::optional<RunSummary>> slots(runs);
  std::vector<std::exception_ptr> errors(runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs; i = next++) {
      try {
        RunSummary s;
        s.seed = config.seed + i;
        TrainConfig cfg = config;
        cfg.seed = s.seed;
        std::ostringstream log;
        cfg.log = config.log ? &log : nullptr;
        s.model = factory(s.seed);
        s.training = train(s.model, train_data, cfg);
        const auto report = evaluate(s.model, test_data);
        s.metrics = metric_map(report);
        if constexpr (std::is_same_v<Corpus, LabeledCorpus>) {
          s.classification = report;
        } else {
          s.regression = report;
        }
        s.log = log.str();
        slots[i] = std::move(s);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t + 1 < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  MultirunResult out;
  std::vector<std::map<std::string, double>> rows;
  for (std::size_t i = 0; i < runs; ++i) {
    out.runs.push_back(std::move(*slots[i]));
    rows.push_back(out.runs.back().metrics);
    if (config.log) *config.log << "run " << i << " seed " << out.runs.back().seed << "\n" << out.runs.back().log;
    if (out.runs[i].training.best_val_loss < out.runs[out.best_run].training.best_val_loss) out.best_run = i;
  }
  out.summary = summarize(rows);
  return out;
}

}  // namespace affect::training
