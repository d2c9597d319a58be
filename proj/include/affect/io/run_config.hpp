#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "affect/baseline/linear.hpp"
#include "affect/corpus/dataset.hpp"
#include "affect/corpus/text.hpp"
#include "affect/error.hpp"
#include "affect/layers/network.hpp"
#include "affect/training/trainer.hpp"

namespace affect::io {

struct DataSection {
  std::string train;
  /// Separate test file; empty: random split of `train` by `split_ratio`.
  std::string test;
  std::string task = "classification";
  std::string text_column = "text";
  std::string label_column = "label";
  /// Fixed label order; empty: sorted distinct labels of the training file.
  std::vector<std::string> labels;
  /// Regression dimensions, `name:lo:hi`.
  std::vector<corpus::ScoreDimension> dimensions;
  /// Word-vector text file; empty: random embeddings.
  std::string embeddings;
  /// Optional externally computed test-set predictions, `doc_id,predicted_label`.
  std::string external_baseline;
  std::string external_baseline_name = "external baseline";
  double split_ratio = 0.8;
  std::size_t min_count = 1;
  /// 0: unlimited.
  std::size_t max_vocab = 0;
  bool lowercase = true;
  bool strip_punctuation = true;
  bool strip_numbers = false;
  bool remove_stopwords = false;
  bool stem = false;
  /// 0: unlimited.
  std::size_t max_sequence_length = 512;

  bool classification() const { return task == "classification"; }

  corpus::PreprocessOptions preprocess() const {
    corpus::PreprocessOptions p;
    p.lowercase = lowercase;
    p.strip_punctuation = strip_punctuation;
    p.strip_numbers = strip_numbers;
    p.remove_stopwords = remove_stopwords;
    p.stem = stem;
    p.max_sequence_length = max_sequence_length == 0 ? std::nullopt : std::optional(max_sequence_length);
    return p;
  }
};

struct ModelSection {
  std::size_t embed_dim = 100;
  std::size_t hidden = 64;
  bool bidirectional = true;
  double recurrent_dropout = 0.5;
  double output_dropout = 0.5;
  bool trainable_embeddings = true;
};

struct TrainSection {
  std::size_t max_epochs = 50;
  std::size_t batch_size = 32;
  double validation_fraction = 0.1;
  std::size_t patience = 1;
  std::uint64_t seed = 1;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool class_weighting = true;
  bool early_stopping = true;
  /// 0: hardware concurrency.
  std::size_t threads = 0;
  bool baseline = true;
  double baseline_l2 = 1e-4;
  double baseline_learning_rate = 0.5;
  std::size_t baseline_epochs = 100;
};

struct TransferSection {
  std::string source;
  std::string source_text_column = "text";
  std::string source_label_column = "label";
  std::vector<std::string> source_labels = {"negative", "positive"};
  std::string scope = "full";
  /// 0: same as [train] max_epochs.
  std::size_t source_max_epochs = 0;
  double threshold = 0.9;
  std::size_t runs = 10;
};

struct RunConfig {
  DataSection data;
  ModelSection model;
  TrainSection train;
  std::optional<TransferSection> transfer;

  layers::NetworkConfig network_config(std::size_t vocab_size, std::size_t outputs) const {
    layers::NetworkConfig c;
    c.vocab_size = vocab_size;
    c.embed_dim = model.embed_dim;
    c.hidden = model.hidden;
    c.direction = model.bidirectional ? layers::Direction::kBidirectional : layers::Direction::kUnidirectional;
    c.task = data.classification() ? layers::TaskKind::kClassification : layers::TaskKind::kRegression;
    c.outputs = outputs;
    c.dropout = {model.recurrent_dropout, model.output_dropout};
    c.trainable_embeddings = model.trainable_embeddings;
    return c;
  }

  training::TrainConfig train_config() const {
    training::TrainConfig c;
    c.max_epochs = train.max_epochs;
    c.batch_size = train.batch_size;
    c.validation_fraction = train.validation_fraction;
    c.patience = train.patience;
    c.seed = train.seed;
    c.adam = {train.learning_rate, train.beta1, train.beta2, train.epsilon};
    c.class_weighting = train.class_weighting;
    c.early_stopping = train.early_stopping;
    if (transfer) {
      c.scope = transfer->scope == "head_only" ? training::FineTuneScope::kHeadOnly : training::FineTuneScope::kFull;
    }
    return c;
  }

  baseline::LinearConfig linear_config() const {
    baseline::LinearConfig c;
    c.l2 = train.baseline_l2;
    c.learning_rate = train.baseline_learning_rate;
    c.epochs = train.baseline_epochs;
    c.batch_size = train.batch_size;
    c.seed = train.seed;
    return c;
  }

  /// Cross-field checks, after parsing.
  void validate() const {
    if (data.train.empty()) throw ConfigError("[data] train is required");
    if (data.task != "classification" && data.task != "regression") {
      throw ConfigError("[data] task must be classification or regression, got '" + data.task + "'");
    }
    if (!data.classification() && data.dimensions.empty()) {
      throw ConfigError("[data] regression needs dimensions = name:lo:hi, ...");
    }
    if (data.classification() && !data.dimensions.empty()) {
      throw ConfigError("[data] dimensions only apply to regression");
    }
    if (!(data.split_ratio > 0.0 && data.split_ratio < 1.0)) throw ConfigError("[data] split_ratio must lie in (0, 1)");
    if (data.min_count < 1) throw ConfigError("[data] min_count must be at least 1");
    if (data.max_vocab == 1) throw ConfigError("[data] max_vocab must be 0 (unlimited) or at least 2");
    network_config(2, data.classification() ? 2 : 1).validate();
    train_config().validate();
    linear_config().validate();
    if (transfer) {
      if (transfer->source.empty()) throw ConfigError("[transfer] source is required");
      if (transfer->scope != "full" && transfer->scope != "head_only") {
        throw ConfigError("[transfer] scope must be full or head_only, got '" + transfer->scope + "'");
      }
      if (transfer->source_labels.size() != 2) throw ConfigError("[transfer] source_labels must name two labels");
      if (!(transfer->threshold > 0.0 && transfer->threshold <= 1.0)) {
        throw ConfigError("[transfer] threshold must lie in (0, 1]");
      }
      if (transfer->runs < 1) throw ConfigError("[transfer] runs must be at least 1");
    }
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <class T>
T parse_number(const std::string& s, const std::string& where) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(where + ": invalid number '" + s + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& s, const std::string& where) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigError(where + ": invalid boolean '" + s + "'");
}

struct Binding {
  std::function<void(const std::string&, const std::string&)> set;
  std::function<std::string()> get;
};

using Section = std::vector<std::pair<std::string, Binding>>;

inline Binding bind(std::string& v) {
  return {[&v](const std::string& s, const std::string&) { v = s; }, [&v] { return v; }};
}
inline Binding bind(bool& v) {
  return {[&v](const std::string& s, const std::string& w) { v = parse_bool(s, w); },
          [&v] { return std::string(v ? "true" : "false"); }};
}
inline Binding bind(double& v) {
  return {[&v](const std::string& s, const std::string& w) { v = parse_number<double>(s, w); },
          [&v] { return format_double(v); }};
}
template <class T>
  requires std::is_unsigned_v<T>
Binding bind(T& v) {
  return {[&v](const std::string& s, const std::string& w) {
            if (!s.empty() && s[0] == '-') throw ConfigError(w + ": value must be non-negative");
            v = parse_number<T>(s, w);
          },
          [&v] { return std::to_string(v); }};
}
inline Binding bind(std::vector<std::string>& v) {
  return {[&v](const std::string& s, const std::string&) { v = split_list(s); },
          [&v] {
            std::string out;
            for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
            return out;
          }};
}
inline Binding bind(std::vector<corpus::ScoreDimension>& v) {
  return {[&v](const std::string& s, const std::string& w) {
            v.clear();
            for (const auto& item : split_list(s)) {
              // name:lo:hi; bounds may be negative, the name may not contain ':'.
              const auto a = item.find(':');
              const auto b = a == std::string::npos ? a : item.find(':', a + 1);
              if (b == std::string::npos) throw ConfigError(w + ": dimension '" + item + "' is not name:lo:hi");
              corpus::ScoreDimension d{trim(item.substr(0, a)), parse_number<double>(trim(item.substr(a + 1, b - a - 1)), w),
                                       parse_number<double>(trim(item.substr(b + 1)), w)};
              if (d.name.empty() || !(d.lo < d.hi)) throw ConfigError(w + ": dimension '" + item + "' is invalid");
              v.push_back(std::move(d));
            }
          },
          [&v] {
            std::string out;
            for (std::size_t i = 0; i < v.size(); ++i) {
              out += (i ? ", " : "") + v[i].name + ":" + format_double(v[i].lo) + ":" + format_double(v[i].hi);
            }
            return out;
          }};
}

inline Section data_bindings(DataSection& d) {
  return {{"train", bind(d.train)},
          {"test", bind(d.test)},
          {"task", bind(d.task)},
          {"text_column", bind(d.text_column)},
          {"label_column", bind(d.label_column)},
          {"labels", bind(d.labels)},
          {"dimensions", bind(d.dimensions)},
          {"embeddings", bind(d.embeddings)},
          {"external_baseline", bind(d.external_baseline)},
          {"external_baseline_name", bind(d.external_baseline_name)},
          {"split_ratio", bind(d.split_ratio)},
          {"min_count", bind(d.min_count)},
          {"max_vocab", bind(d.max_vocab)},
          {"lowercase", bind(d.lowercase)},
          {"strip_punctuation", bind(d.strip_punctuation)},
          {"strip_numbers", bind(d.strip_numbers)},
          {"remove_stopwords", bind(d.remove_stopwords)},
          {"stem", bind(d.stem)},
          {"max_sequence_length", bind(d.max_sequence_length)}};
}

inline Section model_bindings(ModelSection& m) {
  return {{"embed_dim", bind(m.embed_dim)},
          {"hidden", bind(m.hidden)},
          {"bidirectional", bind(m.bidirectional)},
          {"recurrent_dropout", bind(m.recurrent_dropout)},
          {"output_dropout", bind(m.output_dropout)},
          {"trainable_embeddings", bind(m.trainable_embeddings)}};
}

inline Section train_bindings(TrainSection& t) {
  return {{"max_epochs", bind(t.max_epochs)},
          {"batch_size", bind(t.batch_size)},
          {"validation_fraction", bind(t.validation_fraction)},
          {"patience", bind(t.patience)},
          {"seed", bind(t.seed)},
          {"learning_rate", bind(t.learning_rate)},
          {"beta1", bind(t.beta1)},
          {"beta2", bind(t.beta2)},
          {"epsilon", bind(t.epsilon)},
          {"class_weighting", bind(t.class_weighting)},
          {"early_stopping", bind(t.early_stopping)},
          {"threads", bind(t.threads)},
          {"baseline", bind(t.baseline)},
          {"baseline_l2", bind(t.baseline_l2)},
          {"baseline_learning_rate", bind(t.baseline_learning_rate)},
          {"baseline_epochs", bind(t.baseline_epochs)}};
}

inline Section transfer_bindings(TransferSection& t) {
  return {{"source", bind(t.source)},
          {"source_text_column", bind(t.source_text_column)},
          {"source_label_column", bind(t.source_label_column)},
          {"source_labels", bind(t.source_labels)},
          {"scope", bind(t.scope)},
          {"source_max_epochs", bind(t.source_max_epochs)},
          {"threshold", bind(t.threshold)},
          {"runs", bind(t.runs)}};
}

inline std::vector<std::pair<std::string, Section>> all_bindings(RunConfig& c) {
  std::vector<std::pair<std::string, Section>> out = {
      {"data", data_bindings(c.data)}, {"model", model_bindings(c.model)}, {"train", train_bindings(c.train)}};
  if (c.transfer) out.emplace_back("transfer", transfer_bindings(*c.transfer));
  return out;
}

}  // namespace detail

/// Parses the INI-style run configuration. `source` names the input in errors.
inline RunConfig parse_run_config(std::string_view text, const std::string& source = "config") {
  // First pass: collect raw values, rejecting structural problems.
  std::map<std::string, std::map<std::string, std::pair<std::string, std::size_t>>> raw;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  static const std::set<std::string> kSections = {"data", "model", "train", "transfer"};
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = detail::trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    const std::string where = source + ":" + std::to_string(line_no);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      if (!kSections.count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
      if (raw.count(section)) throw ConfigError(where + ": duplicate section [" + section + "]");
      raw[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside any section");
    const auto key = detail::trim(std::string_view(line).substr(0, eq));
    const auto value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!raw[section].emplace(key, std::make_pair(value, line_no)).second) {
      throw ConfigError(where + ": duplicate key '" + key + "' in [" + section + "]");
    }
  }

  RunConfig config;
  if (raw.count("transfer")) config.transfer.emplace();
  for (auto& [name, bindings] : detail::all_bindings(config)) {
    auto it = raw.find(name);
    if (it == raw.end()) continue;
    for (const auto& [key, entry] : it->second) {
      const std::string where = source + ":" + std::to_string(entry.second);
      auto b = std::find_if(bindings.begin(), bindings.end(), [&](const auto& kv) { return kv.first == key; });
      if (b == bindings.end()) throw ConfigError(where + ": unknown key '" + key + "' in [" + name + "]");
      b->second.set(entry.first, where + " (" + key + ")");
    }
  }
  config.validate();
  return config;
}

inline RunConfig load_run_config(const std::string& path) {
  std::string text;
  try {
    text = corpus::read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  auto config = parse_run_config(text, path);
  // Relative data paths are taken relative to the configuration file.
  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  resolve(config.data.train);
  resolve(config.data.test);
  resolve(config.data.embeddings);
  resolve(config.data.external_baseline);
  if (config.transfer) resolve(config.transfer->source);
  return config;
}

/// Every key with its effective value; parsing the result yields the same configuration.
inline std::string echo_run_config(const RunConfig& config) {
  RunConfig copy = config;
  std::ostringstream out;
  bool first = true;
  for (auto& [name, bindings] : detail::all_bindings(copy)) {
    out << (first ? "" : "\n") << "[" << name << "]\n";
    first = false;
    for (auto& [key, b] : bindings) out << key << " = " << b.get() << "\n";
  }
  return out.str();
}

/// The echoed configuration as a JSON object of sections.
inline nlohmann::json run_config_json(const RunConfig& config) {
  RunConfig copy = config;
  nlohmann::json j = nlohmann::json::object();
  for (auto& [name, bindings] : detail::all_bindings(copy)) {
    for (auto& [key, b] : bindings) j[name][key] = b.get();
  }
  return j;
}

}  // namespace affect::io
