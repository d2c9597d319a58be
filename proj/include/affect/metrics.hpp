#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "affect/error.hpp"

namespace affect::metrics {

/// K x K counts, entry (true, predicted).
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes) : k_(num_classes), counts_(num_classes * num_classes, 0) {}

  std::size_t num_classes() const { return k_; }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }
  std::size_t& at(std::size_t truth, std::size_t predicted) { return counts_[truth * k_ + predicted]; }

  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : counts_) n += c;
    return n;
  }
  std::size_t support(std::size_t c) const {
    std::size_t n = 0;
    for (std::size_t j = 0; j < k_; ++j) n += at(c, j);
    return n;
  }
  std::size_t predicted_count(std::size_t c) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < k_; ++i) n += at(i, c);
    return n;
  }

  std::size_t true_positives(std::size_t c) const { return at(c, c); }
  std::size_t false_positives(std::size_t c) const { return predicted_count(c) - at(c, c); }
  std::size_t false_negatives(std::size_t c) const { return support(c) - at(c, c); }
  std::size_t true_negatives(std::size_t c) const {
    return total() - support(c) - predicted_count(c) + at(c, c);
  }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t k_;
  std::vector<std::size_t> counts_;
};

inline ConfusionMatrix confusion(std::span<const std::size_t> predictions, std::span<const std::size_t> labels,
                                 std::size_t num_classes) {
  if (predictions.size() != labels.size()) {
    throw Error("confusion: " + std::to_string(predictions.size()) + " predictions vs " +
                std::to_string(labels.size()) + " labels");
  }
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes || predictions[i] >= num_classes) {
      throw Error("confusion: class index out of range at position " + std::to_string(i));
    }
    ++cm.at(labels[i], predictions[i]);
  }
  return cm;
}

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  std::size_t support = 0;
  // Set when the score's denominator was zero; the score is then reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
  bool specificity_undefined = false;
};

struct ClassificationReport {
  std::vector<ClassScores> per_class;
  double weighted_f1 = 0.0;
  double weighted_sensitivity = 0.0;
  double weighted_specificity = 0.0;
  double accuracy = 0.0;
  /// Unweighted mean of per-class recall.
  double macro_recall = 0.0;
  std::size_t total = 0;
  bool any_undefined = false;
};

namespace detail {

inline double ratio(std::size_t num, std::size_t den, bool& undefined) {
  undefined = den == 0;
  return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace detail

/// Average of per-class values weighted by class support.
inline double support_weighted(std::span<const double> values, std::span<const std::size_t> supports) {
  if (values.size() != supports.size()) throw Error("support_weighted: length mismatch");
  double num = 0.0;
  std::size_t total = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    num += static_cast<double>(supports[k]) * values[k];
    total += supports[k];
  }
  if (total == 0) throw Error("support_weighted: zero total support");
  return num / static_cast<double>(total);
}

/// One-vs-rest scores per class; averages weighted by class support.
inline ClassificationReport classification_report(const ConfusionMatrix& cm) {
  const std::size_t n = cm.total();
  if (cm.num_classes() == 0 || n == 0) throw Error("classification_report: empty confusion matrix");
  ClassificationReport r;
  r.total = n;
  std::size_t correct = 0;
  for (std::size_t c = 0; c < cm.num_classes(); ++c) {
    const std::size_t tp = cm.true_positives(c), fp = cm.false_positives(c);
    const std::size_t fn = cm.false_negatives(c), tn = cm.true_negatives(c);
    ClassScores s;
    s.support = tp + fn;
    s.precision = detail::ratio(tp, tp + fp, s.precision_undefined);
    s.recall = detail::ratio(tp, tp + fn, s.recall_undefined);
    s.sensitivity = s.recall;
    s.specificity = detail::ratio(tn, tn + fp, s.specificity_undefined);
    if (s.precision + s.recall > 0.0) {
      s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    } else {
      s.f1_undefined = true;
    }
    r.any_undefined = r.any_undefined || s.precision_undefined || s.recall_undefined || s.f1_undefined ||
                      s.specificity_undefined;
    r.macro_recall += s.recall;
    correct += tp;
    r.per_class.push_back(s);
  }
  std::vector<double> f1, sens, spec;
  std::vector<std::size_t> support;
  for (const auto& s : r.per_class) {
    f1.push_back(s.f1);
    sens.push_back(s.sensitivity);
    spec.push_back(s.specificity);
    support.push_back(s.support);
  }
  r.weighted_f1 = support_weighted(f1, support);
  r.weighted_sensitivity = support_weighted(sens, support);
  r.weighted_specificity = support_weighted(spec, support);
  r.macro_recall /= static_cast<double>(cm.num_classes());
  r.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  return r;
}

inline ClassificationReport classification_report(std::span<const std::size_t> predictions,
                                                  std::span<const std::size_t> labels, std::size_t num_classes) {
  return classification_report(confusion(predictions, labels, num_classes));
}

struct RegressionReport {
  std::vector<std::string> dimensions;
  std::vector<double> mse;
  double mean_mse = 0.0;
  std::size_t total = 0;
};

/// `predictions[i]` and `targets[i]` are score vectors of one document.
inline RegressionReport regression_report(const std::vector<std::vector<double>>& predictions,
                                          const std::vector<std::vector<double>>& targets,
                                          std::vector<std::string> dimensions = {}) {
  if (predictions.size() != targets.size()) {
    throw ShapeError("regression_report: " + std::to_string(predictions.size()) + " predictions vs " +
                     std::to_string(targets.size()) + " targets");
  }
  if (targets.empty()) throw Error("regression_report: no documents");
  const std::size_t m = targets.front().size();
  if (dimensions.empty()) {
    for (std::size_t d = 0; d < m; ++d) dimensions.push_back("dim" + std::to_string(d));
  }
  if (dimensions.size() != m) throw ShapeError("regression_report: dimension names do not match score width");
  RegressionReport r;
  r.dimensions = std::move(dimensions);
  r.mse.assign(m, 0.0);
  r.total = targets.size();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (predictions[i].size() != m || targets[i].size() != m) {
      throw ShapeError("regression_report: document " + std::to_string(i) + " has mismatched score width");
    }
    for (std::size_t d = 0; d < m; ++d) {
      const double e = predictions[i][d] - targets[i][d];
      r.mse[d] += e * e;
    }
  }
  for (auto& v : r.mse) {
    v /= static_cast<double>(targets.size());
    r.mean_mse += v;
  }
  r.mean_mse /= static_cast<double>(m);
  return r;
}

}  // namespace affect::metrics
