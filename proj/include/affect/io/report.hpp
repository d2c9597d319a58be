#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "affect/corpus/csv.hpp"
#include "affect/corpus/dataset.hpp"
#include "affect/error.hpp"
#include "affect/metrics.hpp"
#include "affect/training/multirun.hpp"

namespace affect::io {

using training::MetricStats;

inline constexpr std::string_view kLinearBaselineRow = "linear baseline";

struct ReportRow {
  std::string model;
  std::size_t runs = 1;
  std::map<std::string, MetricStats> metrics;
};

/// Model rows by metric columns, plus the relative change of the headline
/// metric against the linear baseline row.
struct ComparisonTable {
  std::string title;
  std::vector<std::string> columns;
  std::string headline;
  bool higher_is_better = true;
  std::vector<ReportRow> rows;

  const ReportRow* baseline() const {
    for (const auto& r : rows) {
      if (r.model == kLinearBaselineRow) return &r;
    }
    return nullptr;
  }

  /// Relative improvement of `row` over the linear baseline, in percent.
  std::optional<double> relative_change(const ReportRow& row) const {
    const auto* base = baseline();
    if (!base) return std::nullopt;
    const auto b = base->metrics.find(headline);
    const auto m = row.metrics.find(headline);
    if (b == base->metrics.end() || m == row.metrics.end() || b->second.mean == 0.0) return std::nullopt;
    const double diff = higher_is_better ? m->second.mean - b->second.mean : b->second.mean - m->second.mean;
    return 100.0 * diff / std::abs(b->second.mean);
  }

  std::string change_column() const { return "rel. change " + headline + " vs linear baseline (%)"; }
};

inline ComparisonTable classification_table(std::string title) {
  return {std::move(title), {"weighted_f1", "weighted_sensitivity", "weighted_specificity", "accuracy"}, "weighted_f1",
          true, {}};
}

inline ComparisonTable regression_table(std::string title, const std::vector<std::string>& dimensions) {
  ComparisonTable t{std::move(title), {}, "mean_mse", false, {}};
  for (const auto& d : dimensions) t.columns.push_back("mse_" + d);
  t.columns.push_back("mean_mse");
  return t;
}

namespace detail {

inline std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string exact(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string signed_percent(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.2f", v);
  return buf;
}

inline std::string pad(const std::string& s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

inline std::string render_grid(const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) out << (c ? "  " : "") << pad(cells[r][c], width[c], c == 0);
    out << "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out << std::string(total + 2 * (width.size() - 1), '-') << "\n";
    }
  }
  return out.str();
}

}  // namespace detail

inline std::string render_text(const ComparisonTable& t) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"model", "runs"};
  for (const auto& c : t.columns) header.push_back(c);
  header.push_back(t.change_column());
  cells.push_back(header);
  for (const auto& row : t.rows) {
    std::vector<std::string> line = {row.model, std::to_string(row.runs)};
    for (const auto& c : t.columns) {
      auto it = row.metrics.find(c);
      if (it == row.metrics.end()) {
        line.push_back("n/a");
      } else if (row.runs > 1) {
        line.push_back(detail::fixed(it->second.mean) + " +/- " + detail::fixed(it->second.stddev));
      } else {
        line.push_back(detail::fixed(it->second.mean));
      }
    }
    const auto change = t.relative_change(row);
    line.push_back(change ? detail::signed_percent(*change) : "n/a");
    cells.push_back(line);
  }
  return t.title + "\n\n" + detail::render_grid(cells);
}

inline std::string render_csv(const ComparisonTable& t) {
  std::ostringstream out;
  out << "model,runs";
  for (const auto& c : t.columns) out << "," << c << "_mean," << c << "_sd";
  out << ",rel_change_pct\n";
  for (const auto& row : t.rows) {
    out << corpus::csv_escape(row.model) << "," << row.runs;
    for (const auto& c : t.columns) {
      auto it = row.metrics.find(c);
      if (it == row.metrics.end()) {
        out << ",,";
      } else {
        out << "," << detail::exact(it->second.mean) << "," << detail::exact(it->second.stddev);
      }
    }
    const auto change = t.relative_change(row);
    out << "," << (change ? detail::exact(*change) : "") << "\n";
  }
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError(path + ": cannot open for writing");
  f << content;
  if (!f) throw DataError(path + ": write failed");
}

/// Writes `<stem>.txt` and its CSV twin `<stem>.csv` under `dir`.
inline void write_report(const ComparisonTable& t, const std::string& dir, const std::string& stem = "report") {
  write_text_file(dir + "/" + stem + ".txt", render_text(t));
  write_text_file(dir + "/" + stem + ".csv", render_csv(t));
}

/// One row per run: seed, training summary and test metrics.
struct RunRecord {
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  std::map<std::string, double> metrics;
};

inline std::string render_runs_csv(const std::vector<RunRecord>& runs) {
  std::ostringstream out;
  out << "run,seed,epochs,best_epoch,best_val_loss";
  if (!runs.empty()) {
    for (const auto& [name, _] : runs.front().metrics) out << "," << name;
  }
  out << "\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    out << i << "," << r.seed << "," << r.epochs << "," << r.best_epoch << "," << detail::exact(r.best_val_loss);
    for (const auto& [_, v] : r.metrics) out << "," << detail::exact(v);
    out << "\n";
  }
  return out.str();
}

inline std::string render_classification(const metrics::ClassificationReport& r,
                                         const std::vector<std::string>& class_names) {
  std::vector<std::vector<std::string>> cells = {
      {"class", "support", "precision", "recall", "f1", "sensitivity", "specificity"}};
  for (std::size_t k = 0; k < r.per_class.size(); ++k) {
    const auto& s = r.per_class[k];
    cells.push_back({k < class_names.size() ? class_names[k] : std::to_string(k), std::to_string(s.support),
                     detail::fixed(s.precision), detail::fixed(s.recall), detail::fixed(s.f1),
                     detail::fixed(s.sensitivity), detail::fixed(s.specificity)});
  }
  std::ostringstream out;
  out << detail::render_grid(cells) << "\n"
      << "documents " << r.total << "\n"
      << "weighted_f1 " << detail::fixed(r.weighted_f1) << "\n"
      << "weighted_sensitivity " << detail::fixed(r.weighted_sensitivity) << "\n"
      << "weighted_specificity " << detail::fixed(r.weighted_specificity) << "\n"
      << "accuracy " << detail::fixed(r.accuracy) << "\n"
      << "macro_recall " << detail::fixed(r.macro_recall) << "\n";
  if (r.any_undefined) out << "note: some per-class scores had a zero denominator and are reported as 0\n";
  return out.str();
}

inline std::string render_regression(const metrics::RegressionReport& r) {
  std::ostringstream out;
  out << "documents " << r.total << "\n";
  for (std::size_t d = 0; d < r.dimensions.size(); ++d) out << "mse_" << r.dimensions[d] << " " << detail::fixed(r.mse[d], 6) << "\n";
  out << "mean_mse " << detail::fixed(r.mean_mse, 6) << "\n";
  return out.str();
}

/// Reads externally computed predictions keyed by doc_id: `doc_id,predicted_label`
/// (classification) or `doc_id,<dim>...` (regression). Values are returned raw.
inline std::map<std::size_t, std::vector<std::string>> load_external_predictions(const std::string& path) {
  const auto records = corpus::read_csv(path);
  if (records.empty()) throw DataError(path + ": missing header line");
  const auto& header = records.front();
  if (header.fields.size() < 2 || header.fields[0] != "doc_id") {
    throw DataError(path + ": header must start with doc_id followed by prediction columns");
  }
  std::map<std::size_t, std::vector<std::string>> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    const std::string where = path + ":" + std::to_string(rec.line);
    if (rec.fields.size() != header.fields.size()) throw DataError(where + ": malformed row: wrong field count");
    std::size_t id = 0;
    const auto& f = rec.fields[0];
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), id);
    if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
      throw DataError(where + ": invalid doc_id '" + f + "'");
    }
    if (!out.emplace(id, std::vector<std::string>(rec.fields.begin() + 1, rec.fields.end())).second) {
      throw DataError(where + ": duplicate doc_id " + f);
    }
  }
  return out;
}

}  // namespace affect::io
