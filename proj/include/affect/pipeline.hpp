#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "affect/baseline/linear.hpp"
#include "affect/baseline/tfidf.hpp"
#include "affect/corpus/dataset.hpp"
#include "affect/io/archive.hpp"
#include "affect/io/report.hpp"
#include "affect/io/run_config.hpp"
#include "affect/layers/embedding.hpp"
#include "affect/metrics.hpp"
#include "affect/training/multirun.hpp"
#include "affect/transfer.hpp"

namespace affect::pipeline {

using io::RunConfig;
using nlohmann::json;

template <class Texts>
using CorpusOf = decltype(corpus::encode_corpus(std::declval<const Texts&>(), std::declval<const corpus::Vocabulary&>()));

template <class Texts>
inline constexpr bool kIsLabeled = std::is_same_v<Texts, corpus::LabeledTexts>;

/// Tokenized and encoded train/test data plus the optional pretrained embedding table.
template <class Texts>
struct Prepared {
  Texts train_texts;
  Texts test_texts;
  corpus::Vocabulary vocab;
  CorpusOf<Texts> train;
  CorpusOf<Texts> test;
  std::optional<layers::EmbeddingLayer> embeddings;
  std::vector<std::string> output_names;
};

inline corpus::LabeledTexts load_labeled(const io::DataSection& d, const std::string& path,
                                         const std::vector<std::string>& labels) {
  return corpus::load_classification_dataset(path, {d.text_column, d.label_column, labels}, d.preprocess());
}

inline corpus::ScoredTexts load_scored(const io::DataSection& d, const std::string& path) {
  return corpus::load_regression_dataset(path, {d.text_column, d.dimensions}, d.preprocess());
}

template <class Texts>
Texts load_texts(const io::DataSection& d, const std::string& path, const std::vector<std::string>& labels = {}) {
  if constexpr (kIsLabeled<Texts>) {
    return load_labeled(d, path, labels);
  } else {
    return load_scored(d, path);
  }
}

template <class Texts>
std::vector<std::string> output_names(const Texts& texts) {
  if constexpr (kIsLabeled<Texts>) {
    return texts.class_names;
  } else {
    std::vector<std::string> out;
    for (const auto& dim : texts.dimensions) out.push_back(dim.name);
    return out;
  }
}

/// Loads and splits the data, builds the vocabulary over the training part
/// (plus `extra_vocab` token lists) and loads embeddings when configured.
template <class Texts>
Prepared<Texts> prepare(const RunConfig& cfg, std::ostream& err,
                        const std::vector<std::vector<std::string>>& extra_vocab = {}) {
  const auto& d = cfg.data;
  Prepared<Texts> p;
  auto all = load_texts<Texts>(d, d.train, d.labels);
  if (all.dropped > 0) err << "note: dropped " << all.dropped << " empty documents from " << d.train << "\n";
  if (d.test.empty()) {
    auto parts = corpus::split(all, d.split_ratio, stream_seed(cfg.train.seed, "split"));
    p.train_texts = std::move(parts.train);
    p.test_texts = std::move(parts.test);
  } else {
    p.train_texts = std::move(all);
    std::vector<std::string> labels;
    if constexpr (kIsLabeled<Texts>) labels = p.train_texts.class_names;
    p.test_texts = load_texts<Texts>(d, d.test, labels);
    if (p.test_texts.dropped > 0) {
      err << "note: dropped " << p.test_texts.dropped << " empty documents from " << d.test << "\n";
    }
  }
  if (p.train_texts.size() == 0 || p.test_texts.size() == 0) throw DataError("training or test set is empty");
  if constexpr (kIsLabeled<Texts>) {
    if (p.train_texts.num_classes() < 2) throw DataError(d.train + ": classification needs at least 2 labels");
  }

  auto lists = p.train_texts.token_lists();
  lists.insert(lists.end(), extra_vocab.begin(), extra_vocab.end());
  const std::size_t max_size = d.max_vocab == 0 ? std::numeric_limits<std::size_t>::max() : d.max_vocab;
  p.vocab = corpus::build_vocabulary(lists, d.min_count, max_size);
  p.train = corpus::encode_corpus(p.train_texts, p.vocab);
  p.test = corpus::encode_corpus(p.test_texts, p.vocab);
  p.output_names = output_names(p.train_texts);

  if (!d.embeddings.empty()) {
    auto loaded = layers::load_pretrained_embeddings(d.embeddings, p.vocab, stream_seed(cfg.train.seed, "oov"),
                                                     cfg.model.trainable_embeddings);
    for (const auto& w : loaded.warnings) err << "warning: " << w << "\n";
    if (loaded.layer.dim() != cfg.model.embed_dim) {
      err << "note: embedding dimension " << loaded.layer.dim() << " taken from " << d.embeddings << "\n";
    }
    err << "note: embedding coverage " << loaded.coverage << " (" << loaded.matched << " tokens)\n";
    p.embeddings = std::move(loaded.layer);
  }
  return p;
}

template <class Texts>
training::NetworkFactory network_factory(const RunConfig& cfg, const Prepared<Texts>& p) {
  const auto net_cfg = cfg.network_config(p.vocab.size(), p.output_names.size());
  const auto embeddings = p.embeddings;
  return [net_cfg, embeddings](std::uint64_t seed) {
    return embeddings ? layers::AffectNetwork(net_cfg, *embeddings, seed) : layers::AffectNetwork(net_cfg, seed);
  };
}

inline std::string network_label(const RunConfig& cfg) {
  std::string s = cfg.model.bidirectional ? "BiLSTM" : "LSTM";
  if (!cfg.data.embeddings.empty()) s += " (pretrained embeddings)";
  return s;
}

// ---------------------------------------------------------------------------
// Linear tf-idf baseline

inline std::vector<std::vector<std::string>> bag_of_words_tokens(const auto& texts) {
  std::vector<std::vector<std::string>> out;
  out.reserve(texts.documents.size());
  for (const auto& d : texts.documents) out.push_back(corpus::tokenize(d.text, corpus::PreprocessOptions::full()));
  return out;
}

/// Test metrics of the class-weighted linear baseline, one map per seed.
template <class Texts>
std::vector<std::map<std::string, double>> run_linear_baseline(const RunConfig& cfg, const Prepared<Texts>& p,
                                                               std::size_t runs) {
  const auto train_tokens = bag_of_words_tokens(p.train_texts);
  const auto vectorizer = baseline::TfidfVectorizer::fit(train_tokens);
  const auto x_train = vectorizer.transform_all(train_tokens);
  const auto x_test = vectorizer.transform_all(bag_of_words_tokens(p.test_texts));
  std::vector<std::map<std::string, double>> out;
  for (std::size_t i = 0; i < runs; ++i) {
    auto lc = cfg.linear_config();
    lc.seed = cfg.train.seed + i;
    if constexpr (kIsLabeled<Texts>) {
      const auto y = p.train.labels();
      const std::size_t k = p.output_names.size();
      std::optional<objective::ClassWeights> w;
      if (cfg.train.class_weighting) w = objective::class_weights(y, k);
      const auto model = baseline::train_logistic(x_train, y, k, vectorizer.dimension(), w ? &*w : nullptr, lc);
      std::vector<std::size_t> pred;
      for (const auto& x : x_test) pred.push_back(model.predict_label(x));
      out.push_back(training::metric_map(metrics::classification_report(pred, p.test.labels(), k)));
    } else {
      // Fit on standardized targets, report on the dataset's scale.
      const std::size_t m = p.output_names.size();
      std::vector<double> mean(m, 0.0), sd(m, 0.0);
      for (const auto& d : p.train_texts.documents) {
        for (std::size_t k = 0; k < m; ++k) mean[k] += d.scores[k];
      }
      for (auto& v : mean) v /= static_cast<double>(p.train_texts.size());
      for (const auto& d : p.train_texts.documents) {
        for (std::size_t k = 0; k < m; ++k) sd[k] += (d.scores[k] - mean[k]) * (d.scores[k] - mean[k]);
      }
      for (auto& v : sd) {
        v = std::sqrt(v / static_cast<double>(p.train_texts.size()));
        if (v == 0.0) v = 1.0;
      }
      std::vector<std::vector<double>> y;
      for (const auto& d : p.train_texts.documents) {
        std::vector<double> z(m);
        for (std::size_t k = 0; k < m; ++k) z[k] = (d.scores[k] - mean[k]) / sd[k];
        y.push_back(std::move(z));
      }
      const auto model = baseline::train_least_squares(x_train, y, vectorizer.dimension(), lc);
      std::vector<std::vector<double>> pred, truth;
      for (std::size_t i2 = 0; i2 < x_test.size(); ++i2) {
        auto s = model.predict_scores(x_test[i2]);
        for (std::size_t k = 0; k < m; ++k) s[k] = s[k] * sd[k] + mean[k];
        pred.push_back(std::move(s));
        truth.push_back(p.test_texts.documents[i2].scores);
      }
      out.push_back(training::metric_map(metrics::regression_report(pred, truth, p.output_names)));
    }
  }
  return out;
}

/// Scores externally computed test-set predictions (doc_id = position in test_set.csv).
template <class Texts>
std::map<std::string, double> score_external(const std::string& path, const Prepared<Texts>& p) {
  const auto rows = io::load_external_predictions(path);
  const std::size_t n = p.test_texts.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows.count(i)) throw DataError(path + ": no prediction for doc_id " + std::to_string(i));
  }
  if (rows.size() != n) throw DataError(path + ": doc_id outside the test set (0.." + std::to_string(n - 1) + ")");
  if constexpr (kIsLabeled<Texts>) {
    std::vector<std::size_t> pred;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = rows.at(i);
      if (v.size() != 1) throw DataError(path + ": expected doc_id,predicted_label");
      auto it = std::find(p.output_names.begin(), p.output_names.end(), v[0]);
      if (it == p.output_names.end()) throw DataError(path + ": unknown label '" + v[0] + "'");
      pred.push_back(static_cast<std::size_t>(it - p.output_names.begin()));
    }
    return training::metric_map(metrics::classification_report(pred, p.test.labels(), p.output_names.size()));
  } else {
    std::vector<std::vector<double>> pred, truth;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& v = rows.at(i);
      if (v.size() != p.output_names.size()) throw DataError(path + ": expected one score per dimension");
      std::vector<double> s;
      for (const auto& f : v) s.push_back(corpus::detail::parse_double(f, path));
      pred.push_back(std::move(s));
      truth.push_back(p.test_texts.documents[i].scores);
    }
    return training::metric_map(metrics::regression_report(pred, truth, p.output_names));
  }
}

template <class Texts>
io::ComparisonTable empty_table(const std::string& title, const Prepared<Texts>& p) {
  if constexpr (kIsLabeled<Texts>) {
    return io::classification_table(title);
  } else {
    return io::regression_table(title, p.output_names);
  }
}

template <class Texts>
std::string render_test_set(const Prepared<Texts>& p) {
  std::ostringstream out;
  out << "doc_id,text";
  if constexpr (kIsLabeled<Texts>) {
    out << ",label\n";
    for (std::size_t i = 0; i < p.test_texts.size(); ++i) {
      const auto& d = p.test_texts.documents[i];
      out << i << "," << corpus::csv_escape(d.text) << "," << corpus::csv_escape(p.output_names[d.label]) << "\n";
    }
  } else {
    for (const auto& n : p.output_names) out << "," << corpus::csv_escape(n);
    out << "\n";
    for (std::size_t i = 0; i < p.test_texts.size(); ++i) {
      const auto& d = p.test_texts.documents[i];
      out << i << "," << corpus::csv_escape(d.text);
      for (double s : d.scores) out << "," << io::detail::exact(s);
      out << "\n";
    }
  }
  return out.str();
}

inline json stats_json(const std::map<std::string, training::MetricStats>& s) {
  json j = json::object();
  for (const auto& [k, v] : s) j[k] = {{"mean", v.mean}, {"sd", v.stddev}};
  return j;
}

inline io::RunRecord run_record(const training::RunSummary& r) {
  return {r.seed, r.training.epochs_run(), r.training.best_epoch, r.training.best_val_loss, r.metrics};
}

inline void prepare_out_dir(const std::string& dir, const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError(dir + ": cannot create output directory: " + ec.message());
  io::write_text_file(dir + "/config.ini", io::echo_run_config(cfg));
}

// ---------------------------------------------------------------------------
// train

struct TrainOutcome {
  io::ComparisonTable table;
  training::MultirunResult result;
};

template <class Texts>
TrainOutcome train_task(const RunConfig& cfg, const std::string& out_dir, std::size_t runs, std::ostream& out,
                        std::ostream& err) {
  const auto p = prepare<Texts>(cfg, err);
  auto tc = cfg.train_config();
  tc.log = &out;
  auto result = training::multirun(p.train, p.test, network_factory(cfg, p), tc, runs, cfg.train.threads);

  auto table = empty_table(network_label(cfg) + " vs. baselines (" + std::to_string(p.test.size()) +
                               " test documents)",
                           p);
  if (cfg.train.baseline) {
    table.rows.push_back({std::string(io::kLinearBaselineRow), runs,
                          training::summarize(run_linear_baseline(cfg, p, runs))});
  }
  table.rows.push_back({network_label(cfg), runs, result.summary});
  if (!cfg.data.external_baseline.empty()) {
    if (cfg.data.external_baseline_name == io::kLinearBaselineRow) {
      throw ConfigError("[data] external_baseline_name must differ from the linear baseline row");
    }
    table.rows.push_back(
        {cfg.data.external_baseline_name, 1, training::summarize({score_external(cfg.data.external_baseline, p)})});
  }

  std::vector<io::RunRecord> records;
  for (const auto& r : result.runs) records.push_back(run_record(r));
  io::write_text_file(out_dir + "/runs.csv", io::render_runs_csv(records));
  io::write_text_file(out_dir + "/test_set.csv", render_test_set(p));
  io::write_report(table, out_dir);

  const auto& best = result.runs[result.best_run];
  io::ModelArchive archive{best.model, p.vocab, cfg.data.preprocess(), p.output_names, io::run_config_json(cfg),
                           {{"seed", best.seed},
                            {"best_val_loss", best.training.best_val_loss},
                            {"test", best.metrics},
                            {"summary", stats_json(result.summary)},
                            {"runs", runs}}};
  io::save_archive(archive, out_dir + "/model.affect");
  return {std::move(table), std::move(result)};
}

inline TrainOutcome run_train(const RunConfig& cfg, const std::string& out_dir, std::size_t runs, std::ostream& out,
                              std::ostream& err) {
  if (runs < 1) throw ConfigError("--runs must be at least 1");
  prepare_out_dir(out_dir, cfg);
  auto outcome = cfg.data.classification() ? train_task<corpus::LabeledTexts>(cfg, out_dir, runs, out, err)
                                           : train_task<corpus::ScoredTexts>(cfg, out_dir, runs, out, err);
  out << "\n" << io::render_text(outcome.table);
  return outcome;
}

// ---------------------------------------------------------------------------
// transfer

struct TransferRun {
  std::uint64_t seed = 0;
  training::TrainResult pretraining;
  training::TrainResult transferred;
  training::TrainResult random_init;
  std::map<std::string, double> transferred_metrics;
  std::map<std::string, double> random_metrics;
  layers::AffectNetwork source_model;
  layers::AffectNetwork model;
  std::string log;
};

struct TransferOutcome {
  io::ComparisonTable table;
  std::vector<TransferRun> runs;
  std::size_t best_run = 0;
  /// Seeds on which the transferred model reached the threshold in strictly fewer epochs.
  std::size_t transfer_wins = 0;
};

template <class Fn>
void parallel_runs(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
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
}

inline std::string epochs_or_none(const std::optional<std::size_t>& e) { return e ? std::to_string(*e) : "none"; }

template <class Texts>
TransferOutcome transfer_task(const RunConfig& cfg, const std::string& out_dir, std::ostream& out,
                              std::ostream& err) {
  const auto& tr = *cfg.transfer;
  io::DataSection source_section = cfg.data;
  source_section.text_column = tr.source_text_column;
  source_section.label_column = tr.source_label_column;
  const auto source_texts = load_labeled(source_section, tr.source, tr.source_labels);
  if (source_texts.dropped > 0) err << "note: dropped " << source_texts.dropped << " empty documents from " << tr.source << "\n";

  const auto p = prepare<Texts>(cfg, err, source_texts.token_lists());
  const auto source = corpus::encode_corpus(source_texts, p.vocab);
  const auto base_cfg = cfg.train_config();
  auto source_cfg = base_cfg;
  if (tr.source_max_epochs > 0) source_cfg.max_epochs = tr.source_max_epochs;
  auto source_net_cfg = cfg.network_config(p.vocab.size(), 2);
  source_net_cfg.task = layers::TaskKind::kClassification;
  const auto target_factory = network_factory(cfg, p);
  const auto task = cfg.data.classification() ? layers::TaskKind::kClassification : layers::TaskKind::kRegression;

  std::vector<TransferRun> runs(tr.runs);
  parallel_runs(tr.runs, cfg.train.threads, [&](std::size_t i) {
    TransferRun& r = runs[i];
    r.seed = cfg.train.seed + i;
    std::ostringstream log;
    auto seeded = [&](training::TrainConfig c) {
      c.seed = r.seed;
      c.log = &log;
      return c;
    };
    r.source_model = p.embeddings ? layers::AffectNetwork(source_net_cfg, *p.embeddings, r.seed)
                                  : layers::AffectNetwork(source_net_cfg, r.seed);
    log << "pretrain\n";
    r.pretraining = transfer::pretrain(r.source_model, source, seeded(source_cfg));
    r.model = transfer::swap_head(r.source_model, task, p.output_names.size(), r.seed);
    log << "fine-tune\n";
    r.transferred = transfer::fine_tune(r.model, p.train, seeded(base_cfg), base_cfg.scope);
    r.transferred_metrics = training::metric_map(training::evaluate(r.model, p.test));
    auto fresh = target_factory(r.seed);
    log << "random init\n";
    auto random_cfg = seeded(base_cfg);
    random_cfg.scope = training::FineTuneScope::kFull;
    r.random_init = training::train(fresh, p.train, random_cfg);
    r.random_metrics = training::metric_map(training::evaluate(fresh, p.test));
    r.log = log.str();
  });

  TransferOutcome o;
  std::vector<std::map<std::string, double>> transferred_rows, random_rows;
  std::vector<io::RunRecord> records;
  std::ostringstream epochs_csv;
  epochs_csv << "run,seed,transfer_epochs_to_threshold,random_epochs_to_threshold,transfer_epochs,random_epochs\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    out << "run " << i << " seed " << r.seed << "\n" << r.log;
    transferred_rows.push_back(r.transferred_metrics);
    random_rows.push_back(r.random_metrics);
    const auto te = r.transferred.epochs_to_accuracy(tr.threshold);
    const auto re = r.random_init.epochs_to_accuracy(tr.threshold);
    if (te && (!re || *te < *re)) ++o.transfer_wins;
    epochs_csv << i << "," << r.seed << "," << epochs_or_none(te) << "," << epochs_or_none(re) << ","
               << r.transferred.epochs_run() << "," << r.random_init.epochs_run() << "\n";
    records.push_back({r.seed, r.transferred.epochs_run(), r.transferred.best_epoch, r.transferred.best_val_loss,
                       r.transferred_metrics});
    if (r.transferred.best_val_loss < runs[o.best_run].transferred.best_val_loss) o.best_run = i;
  }

  o.table = empty_table("sent2affect transfer vs. random initialization (" + std::to_string(p.test.size()) +
                            " test documents, scope " + tr.scope + ")",
                        p);
  if (cfg.train.baseline) {
    o.table.rows.push_back({std::string(io::kLinearBaselineRow), tr.runs,
                            training::summarize(run_linear_baseline(cfg, p, tr.runs))});
  }
  o.table.rows.push_back({network_label(cfg) + ", random init", tr.runs, training::summarize(random_rows)});
  o.table.rows.push_back({network_label(cfg) + ", sent2affect", tr.runs, training::summarize(transferred_rows)});

  io::write_text_file(out_dir + "/runs.csv", io::render_runs_csv(records));
  io::write_text_file(out_dir + "/epochs_to_threshold.csv", epochs_csv.str());
  io::write_text_file(out_dir + "/test_set.csv", render_test_set(p));
  io::write_report(o.table, out_dir);

  const auto& best = runs[o.best_run];
  const json cfg_json = io::run_config_json(cfg);
  io::ModelArchive source_archive{best.source_model, p.vocab, cfg.data.preprocess(), tr.source_labels, cfg_json,
                                  {{"seed", best.seed}, {"best_val_loss", best.pretraining.best_val_loss}}};
  io::save_archive(source_archive, out_dir + "/source.affect");
  io::ModelArchive target_archive{best.model, p.vocab, cfg.data.preprocess(), p.output_names, cfg_json,
                                  {{"seed", best.seed},
                                   {"best_val_loss", best.transferred.best_val_loss},
                                   {"test", best.transferred_metrics},
                                   {"summary", stats_json(training::summarize(transferred_rows))},
                                   {"runs", tr.runs}}};
  io::save_archive(target_archive, out_dir + "/model.affect");
  o.runs = std::move(runs);
  return o;
}

inline TransferOutcome run_transfer(const RunConfig& cfg, const std::string& out_dir, std::ostream& out,
                                    std::ostream& err) {
  if (!cfg.transfer) throw ConfigError("transfer needs a [transfer] section");
  prepare_out_dir(out_dir, cfg);
  auto o = cfg.data.classification() ? transfer_task<corpus::LabeledTexts>(cfg, out_dir, out, err)
                                     : transfer_task<corpus::ScoredTexts>(cfg, out_dir, out, err);
  out << "\n" << io::render_text(o.table);
  if (cfg.data.classification()) {
    out << "\ntransfer reached validation accuracy " << cfg.transfer->threshold
        << " in fewer epochs than random init on " << o.transfer_wins << "/" << o.runs.size() << " seeds\n";
  }
  return o;
}

// ---------------------------------------------------------------------------
// evaluate / predict / affect-features / downstream

/// The run configuration stored in an archive, or defaults when absent.
inline RunConfig archived_config(const io::ModelArchive& a) {
  if (!a.config.is_object() || !a.config.contains("data")) {
    RunConfig c;
    c.data.train = "<archive>";
    return c;
  }
  std::ostringstream ini;
  for (const auto& [section, keys] : a.config.items()) {
    ini << "[" << section << "]\n";
    for (const auto& [k, v] : keys.items()) ini << k << " = " << v.get<std::string>() << "\n";
  }
  try {
    return io::parse_run_config(ini.str(), "archive config");
  } catch (const ConfigError& e) {
    throw DataError(std::string("archive carries an invalid run configuration: ") + e.what());
  }
}

/// Evaluates an archive on a dataset file in the training schema.
inline std::string run_evaluate(const io::ModelArchive& a, const std::string& data_path) {
  const auto cfg = archived_config(a);
  if (a.network.config().task == layers::TaskKind::kClassification) {
    auto texts = corpus::load_classification_dataset(
        data_path, {cfg.data.text_column, cfg.data.label_column, a.output_names}, a.preprocess);
    const auto data = corpus::encode_corpus(texts, a.vocabulary);
    if (data.size() == 0) throw DataError(data_path + ": no documents to evaluate");
    return io::render_classification(training::evaluate(a.network, data), a.output_names);
  }
  auto dims = cfg.data.dimensions;
  if (dims.empty()) {
    for (const auto& n : a.output_names) {
      dims.push_back({n, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()});
    }
  }
  auto texts = corpus::load_regression_dataset(data_path, {cfg.data.text_column, dims}, a.preprocess);
  const auto data = corpus::encode_corpus(texts, a.vocabulary);
  if (data.size() == 0) throw DataError(data_path + ": no documents to evaluate");
  return io::render_regression(training::evaluate(a.network, data));
}

struct InputDocument {
  std::string id;
  std::string text;
};

/// `.csv` files: header with a text column (and optional doc_id column).
/// Any other file: one document per line, doc_id = line index from 0.
inline std::vector<InputDocument> read_documents(const std::string& path, const std::string& text_column = "text") {
  std::vector<InputDocument> docs;
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") {
    const auto records = corpus::read_csv(path);
    if (records.empty()) throw DataError(path + ": missing header line");
    const auto& header = records.front();
    const auto text_col = corpus::detail::find_column(header, text_column, path);
    const auto id_it = std::find(header.fields.begin(), header.fields.end(), "doc_id");
    for (std::size_t r = 1; r < records.size(); ++r) {
      corpus::detail::check_width(records[r], header, path);
      const auto& f = records[r].fields;
      docs.push_back({id_it == header.fields.end() ? std::to_string(r - 1)
                                                   : f[static_cast<std::size_t>(id_it - header.fields.begin())],
                      f[text_col]});
    }
    return docs;
  }
  const auto text = corpus::read_file(path);
  corpus::require_utf8(text, path);
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    docs.push_back({std::to_string(docs.size()), std::move(line)});
    pos = end + 1;
  }
  return docs;
}

/// `doc_id,label,<p or score per output>` per document, values printed exactly.
inline std::string run_predict(const io::ModelArchive& a, const std::vector<InputDocument>& docs) {
  std::ostringstream out;
  const bool classify = a.network.config().task == layers::TaskKind::kClassification;
  out << "doc_id" << (classify ? ",label" : "");
  for (const auto& n : a.output_names) out << "," << (classify ? "p_" : "") << corpus::csv_escape(n);
  out << "\n";
  for (const auto& d : docs) {
    const auto y = a.network.predict(io::encode_text(a, d.text));
    out << corpus::csv_escape(d.id);
    if (classify) out << "," << corpus::csv_escape(a.output_names[layers::argmax(y)]);
    for (double v : y) out << "," << io::detail::exact(v);
    out << "\n";
  }
  return out.str();
}

/// Features CSV with header `doc_id,p_0,...,p_{K-1}`.
inline std::string run_affect_features(const io::ModelArchive& a, const std::vector<InputDocument>& docs) {
  if (a.network.config().task != layers::TaskKind::kClassification) {
    throw ConfigError("affect-features needs a classification model archive");
  }
  std::ostringstream out;
  out << "doc_id";
  for (std::size_t k = 0; k < a.network.config().outputs; ++k) out << ",p_" << k;
  out << "\n";
  for (const auto& d : docs) {
    out << corpus::csv_escape(d.id);
    for (double v : a.network.predict(io::encode_text(a, d.text))) out << "," << io::detail::exact(v);
    out << "\n";
  }
  return out.str();
}

struct DownstreamResult {
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<std::string> labels;
};

/// Logistic regression on affect features against per-document labels, with a
/// seeded split. `expected_k` (0: any) checks the feature width.
inline DownstreamResult run_downstream(const std::string& features_path, const std::string& labels_path,
                                       std::size_t expected_k, double split_ratio, std::uint64_t seed) {
  const auto feats = corpus::read_csv(features_path);
  if (feats.empty()) throw DataError(features_path + ": missing header line");
  const auto& header = feats.front().fields;
  if (header.empty() || header[0] != "doc_id") throw DataError(features_path + ": header must start with doc_id");
  const std::size_t k = header.size() - 1;
  for (std::size_t j = 0; j < k; ++j) {
    if (header[j + 1] != "p_" + std::to_string(j)) {
      throw DataError(features_path + ": expected column p_" + std::to_string(j) + ", found '" + header[j + 1] + "'");
    }
  }
  if (k == 0) throw DataError(features_path + ": no feature columns");
  if (expected_k != 0 && k != expected_k) {
    throw ShapeError(features_path + ": " + std::to_string(k) + " feature columns but the model has K=" +
                     std::to_string(expected_k));
  }
  std::map<std::string, std::vector<double>> by_id;
  for (std::size_t r = 1; r < feats.size(); ++r) {
    const auto& rec = feats[r];
    corpus::detail::check_width(rec, feats.front(), features_path);
    const std::string where = features_path + ":" + std::to_string(rec.line);
    std::vector<double> v;
    for (std::size_t j = 1; j < rec.fields.size(); ++j) v.push_back(corpus::detail::parse_double(rec.fields[j], where));
    if (!by_id.emplace(rec.fields[0], std::move(v)).second) throw DataError(where + ": duplicate doc_id");
  }

  const auto lab = corpus::read_csv(labels_path);
  if (lab.empty() || lab.front().fields.size() != 2 || lab.front().fields[0] != "doc_id") {
    throw DataError(labels_path + ": header must be doc_id,<label column>");
  }
  std::vector<std::string> ids, raw;
  for (std::size_t r = 1; r < lab.size(); ++r) {
    corpus::detail::check_width(lab[r], lab.front(), labels_path);
    const auto& id = lab[r].fields[0];
    if (!by_id.count(id)) throw DataError(labels_path + ":" + std::to_string(lab[r].line) + ": doc_id " + id + " has no features");
    ids.push_back(id);
    raw.push_back(lab[r].fields[1]);
  }
  DownstreamResult res;
  res.labels = raw;
  std::sort(res.labels.begin(), res.labels.end());
  res.labels.erase(std::unique(res.labels.begin(), res.labels.end()), res.labels.end());
  if (res.labels.size() < 2) throw DataError(labels_path + ": need at least two distinct labels");

  std::vector<baseline::SparseVector> x;
  std::vector<std::size_t> y;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    x.push_back(baseline::SparseVector::from_dense(by_id.at(ids[i])));
    y.push_back(static_cast<std::size_t>(std::lower_bound(res.labels.begin(), res.labels.end(), raw[i]) -
                                         res.labels.begin()));
  }
  if (x.size() < 2) throw DataError(labels_path + ": need at least two labeled documents");
  std::vector<std::size_t> perm(x.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(stream_seed(seed, "split"));
  rng.shuffle(std::span<std::size_t>(perm));
  auto n_train = static_cast<std::size_t>(std::llround(split_ratio * static_cast<double>(x.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, x.size() - 1);
  std::vector<baseline::SparseVector> xtr, xte;
  std::vector<std::size_t> ytr, yte;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    (i < n_train ? xtr : xte).push_back(x[perm[i]]);
    (i < n_train ? ytr : yte).push_back(y[perm[i]]);
  }
  baseline::LinearConfig lc;
  lc.seed = seed;
  const auto model = baseline::train_logistic(xtr, ytr, res.labels.size(), k, nullptr, lc);
  auto acc = [&](const auto& xs, const auto& ys) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) hit += model.predict_label(xs[i]) == ys[i];
    return static_cast<double>(hit) / static_cast<double>(xs.size());
  };
  res.train_size = xtr.size();
  res.test_size = xte.size();
  res.train_accuracy = acc(xtr, ytr);
  res.test_accuracy = acc(xte, yte);
  return res;
}

}  // namespace affect::pipeline
