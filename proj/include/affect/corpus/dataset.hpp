#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "affect/corpus/csv.hpp"
#include "affect/corpus/text.hpp"
#include "affect/corpus/vocabulary.hpp"
#include "affect/error.hpp"
#include "affect/rng.hpp"

namespace affect::corpus {

/// A dataset file does not match the columns its schema names.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

struct ClassificationSchema {
  std::string text_column = "text";
  std::string label_column = "label";
  /// Fixed label set in index order. Empty: infer from the file, sorted.
  std::vector<std::string> labels;
};

struct ScoreDimension {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const ScoreDimension&) const = default;
};

struct RegressionSchema {
  std::string text_column = "text";
  std::vector<ScoreDimension> dimensions;
};

// ---------------------------------------------------------------------------
// Tokenized text, before vocabulary encoding.

struct LabeledText {
  std::string text;
  std::vector<std::string> tokens;
  std::size_t label = 0;
};

struct LabeledTexts {
  std::vector<LabeledText> documents;
  std::vector<std::string> class_names;
  std::size_t dropped = 0;

  std::size_t size() const { return documents.size(); }
  std::size_t num_classes() const { return class_names.size(); }

  LabeledTexts subset(std::span<const std::size_t> indices) const {
    LabeledTexts out{{}, class_names, 0};
    out.documents.reserve(indices.size());
    for (auto i : indices) out.documents.push_back(documents.at(i));
    return out;
  }

  std::vector<std::vector<std::string>> token_lists() const {
    std::vector<std::vector<std::string>> out;
    out.reserve(documents.size());
    for (const auto& d : documents) out.push_back(d.tokens);
    return out;
  }
};

struct ScoredText {
  std::string text;
  std::vector<std::string> tokens;
  std::vector<double> scores;
};

struct ScoredTexts {
  std::vector<ScoredText> documents;
  std::vector<ScoreDimension> dimensions;
  std::size_t dropped = 0;

  std::size_t size() const { return documents.size(); }

  ScoredTexts subset(std::span<const std::size_t> indices) const {
    ScoredTexts out{{}, dimensions, 0};
    out.documents.reserve(indices.size());
    for (auto i : indices) out.documents.push_back(documents.at(i));
    return out;
  }

  std::vector<std::vector<std::string>> token_lists() const {
    std::vector<std::vector<std::string>> out;
    out.reserve(documents.size());
    for (const auto& d : documents) out.push_back(d.tokens);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Encoded corpora consumed by the networks.

struct LabeledDocument {
  std::vector<std::size_t> ids;
  std::size_t label = 0;
};

class LabeledCorpus {
 public:
  LabeledCorpus() = default;

  LabeledCorpus(std::vector<LabeledDocument> documents, std::size_t num_classes)
      : documents_(std::move(documents)), num_classes_(num_classes), class_counts_(num_classes, 0) {
    for (std::size_t i = 0; i < documents_.size(); ++i) {
      const auto& d = documents_[i];
      if (d.label >= num_classes_) {
        throw DataError("document " + std::to_string(i) + " has label " + std::to_string(d.label) +
                        " >= K=" + std::to_string(num_classes_));
      }
      if (d.ids.empty()) throw DataError("document " + std::to_string(i) + " is empty");
      ++class_counts_[d.label];
    }
  }

  const std::vector<LabeledDocument>& documents() const { return documents_; }
  const LabeledDocument& operator[](std::size_t i) const { return documents_[i]; }
  std::size_t size() const { return documents_.size(); }
  std::size_t num_classes() const { return num_classes_; }
  const std::vector<std::size_t>& class_counts() const { return class_counts_; }

  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> out;
    out.reserve(documents_.size());
    for (const auto& d : documents_) out.push_back(d.label);
    return out;
  }

  LabeledCorpus subset(std::span<const std::size_t> indices) const {
    std::vector<LabeledDocument> docs;
    docs.reserve(indices.size());
    for (auto i : indices) docs.push_back(documents_.at(i));
    return LabeledCorpus(std::move(docs), num_classes_);
  }

 private:
  std::vector<LabeledDocument> documents_;
  std::size_t num_classes_ = 0;
  std::vector<std::size_t> class_counts_;
};

struct ScoredDocument {
  std::vector<std::size_t> ids;
  std::vector<double> scores;
};

class ScoredCorpus {
 public:
  ScoredCorpus() = default;

  ScoredCorpus(std::vector<ScoredDocument> documents, std::vector<ScoreDimension> dimensions)
      : documents_(std::move(documents)), dimensions_(std::move(dimensions)) {
    for (std::size_t i = 0; i < documents_.size(); ++i) {
      const auto& d = documents_[i];
      if (d.scores.size() != dimensions_.size()) {
        throw DataError("document " + std::to_string(i) + " has " + std::to_string(d.scores.size()) +
                        " scores, expected " + std::to_string(dimensions_.size()));
      }
      for (std::size_t k = 0; k < dimensions_.size(); ++k) {
        const auto& dim = dimensions_[k];
        if (!(d.scores[k] >= dim.lo && d.scores[k] <= dim.hi)) {
          throw DataError("validation error: document " + std::to_string(i) + " score " +
                          std::to_string(d.scores[k]) + " outside [" + std::to_string(dim.lo) + ", " +
                          std::to_string(dim.hi) + "] for " + dim.name);
        }
      }
      if (d.ids.empty()) throw DataError("document " + std::to_string(i) + " is empty");
    }
  }

  const std::vector<ScoredDocument>& documents() const { return documents_; }
  const ScoredDocument& operator[](std::size_t i) const { return documents_[i]; }
  std::size_t size() const { return documents_.size(); }
  const std::vector<ScoreDimension>& dimensions() const { return dimensions_; }

  ScoredCorpus subset(std::span<const std::size_t> indices) const {
    std::vector<ScoredDocument> docs;
    docs.reserve(indices.size());
    for (auto i : indices) docs.push_back(documents_.at(i));
    return ScoredCorpus(std::move(docs), dimensions_);
  }

 private:
  std::vector<ScoredDocument> documents_;
  std::vector<ScoreDimension> dimensions_;
};

inline LabeledCorpus encode_corpus(const LabeledTexts& texts, const Vocabulary& vocab) {
  std::vector<LabeledDocument> docs;
  docs.reserve(texts.size());
  for (const auto& d : texts.documents) docs.push_back({encode(d.tokens, vocab), d.label});
  return LabeledCorpus(std::move(docs), texts.num_classes());
}

inline ScoredCorpus encode_corpus(const ScoredTexts& texts, const Vocabulary& vocab) {
  std::vector<ScoredDocument> docs;
  docs.reserve(texts.size());
  for (const auto& d : texts.documents) docs.push_back({encode(d.tokens, vocab), d.scores});
  return ScoredCorpus(std::move(docs), texts.dimensions);
}

// ---------------------------------------------------------------------------
// Loaders

namespace detail {

inline std::size_t find_column(const CsvRecord& header, const std::string& name, const std::string& path) {
  auto it = std::find(header.fields.begin(), header.fields.end(), name);
  if (it == header.fields.end()) {
    throw SchemaError(path + ": schema error: unknown column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.fields.begin());
}

inline void check_width(const CsvRecord& rec, const CsvRecord& header, const std::string& path) {
  if (rec.fields.size() != header.fields.size()) {
    throw DataError(path + ":" + std::to_string(rec.line) + ": malformed row: expected " +
                    std::to_string(header.fields.size()) + " fields, found " +
                    std::to_string(rec.fields.size()));
  }
}

inline double parse_double(std::string_view s, const std::string& where) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw DataError(where + ": not a decimal number: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

inline LabeledTexts load_classification_dataset(const std::string& path, const ClassificationSchema& schema,
                                                const PreprocessOptions& opts = {}) {
  auto records = read_csv(path);
  if (records.empty()) throw DataError(path + ": missing header line");
  const CsvRecord header = records.front();
  const std::size_t text_col = detail::find_column(header, schema.text_column, path);
  const std::size_t label_col = detail::find_column(header, schema.label_column, path);

  struct Row {
    std::string text;
    std::vector<std::string> tokens;
    std::string label;
  };
  std::vector<Row> rows;
  std::size_t dropped = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    detail::check_width(rec, header, path);
    const std::string& label = rec.fields[label_col];
    if (label.empty()) throw DataError(path + ":" + std::to_string(rec.line) + ": malformed row: empty label");
    auto tokens = tokenize(rec.fields[text_col], opts);
    if (tokens.empty()) {
      ++dropped;
      continue;
    }
    rows.push_back({rec.fields[text_col], std::move(tokens), label});
  }

  std::vector<std::string> names = schema.labels;
  if (names.empty()) {
    for (const auto& row : rows) names.push_back(row.label);
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < names.size(); ++k) index.emplace(names[k], k);

  LabeledTexts out{{}, names, dropped};
  out.documents.reserve(rows.size());
  for (auto& row : rows) {
    auto it = index.find(row.label);
    if (it == index.end()) throw DataError(path + ": label '" + row.label + "' not in the declared label set");
    out.documents.push_back({std::move(row.text), std::move(row.tokens), it->second});
  }
  return out;
}

inline ScoredTexts load_regression_dataset(const std::string& path, const RegressionSchema& schema,
                                           const PreprocessOptions& opts = {}) {
  if (schema.dimensions.empty()) throw SchemaError(path + ": schema error: no score dimensions declared");
  auto records = read_csv(path);
  if (records.empty()) throw DataError(path + ": missing header line");
  const CsvRecord header = records.front();
  const std::size_t text_col = detail::find_column(header, schema.text_column, path);
  std::vector<std::size_t> score_cols;
  for (const auto& dim : schema.dimensions) score_cols.push_back(detail::find_column(header, dim.name, path));

  ScoredTexts out{{}, schema.dimensions, 0};
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    detail::check_width(rec, header, path);
    const std::string where = path + ":" + std::to_string(rec.line);
    std::vector<double> scores;
    for (std::size_t k = 0; k < score_cols.size(); ++k) {
      const double v = detail::parse_double(rec.fields[score_cols[k]], where);
      const auto& dim = schema.dimensions[k];
      if (v < dim.lo || v > dim.hi) {
        throw DataError(where + ": validation error: " + dim.name + " score " + rec.fields[score_cols[k]] +
                        " outside declared range");
      }
      scores.push_back(v);
    }
    auto tokens = tokenize(rec.fields[text_col], opts);
    if (tokens.empty()) {
      ++out.dropped;
      continue;
    }
    out.documents.push_back({rec.fields[text_col], std::move(tokens), std::move(scores)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splitting

template <class Corpus>
struct Split {
  Corpus train;
  Corpus test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// Seeded uniform permutation, then prefix (train) / suffix (test) split.
/// The train part holds round(ratio * n) documents, clamped to [1, n-1].
template <class Corpus>
Split<Corpus> split(const Corpus& corpus, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  const std::size_t n = corpus.size();
  if (n < 2) throw DataError("cannot split a corpus with fewer than 2 documents");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  return {corpus.subset(train_idx), corpus.subset(test_idx), std::move(train_idx), std::move(test_idx)};
}

// ---------------------------------------------------------------------------
// Synthetic marker corpora

struct SyntheticSpec {
  std::size_t num_classes = 2;
  std::size_t docs_per_class = 10;
  /// Optional per-class document counts; overrides docs_per_class when non-empty.
  std::vector<std::size_t> class_sizes;
  /// Number of distinct noise tokens.
  std::size_t vocab_size = 20;
  /// Probability that a position holds a noise token instead of the marker.
  double noise_rate = 0.5;
  std::size_t doc_length = 8;
  /// Probability that a document carries another class's marker instead of its own.
  double label_noise = 0.0;
  /// Marker index offset, so paired corpora can share or avoid markers.
  std::size_t marker_offset = 0;
};

namespace detail {

// Letters without vowels, 's' or 'y': the Porter stemmer leaves such words alone
// and the full preprocessing pipeline keeps them intact.
inline std::string consonant_code(std::string_view prefix, std::size_t n) {
  static constexpr std::string_view kAlphabet = "bcdfghjklmnpqrtvwxz";
  std::string digits;
  do {
    digits.push_back(kAlphabet[n % kAlphabet.size()]);
    n /= kAlphabet.size();
  } while (n > 0);
  return std::string(prefix) + std::string(digits.rbegin(), digits.rend());
}

}  // namespace detail

inline std::string marker_token(std::size_t k) { return detail::consonant_code("mrk", k); }
inline std::string noise_token(std::size_t v) { return detail::consonant_code("nz", v); }

inline LabeledTexts synthesize_texts(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.num_classes < 2) throw ConfigError("synthetic corpus needs at least 2 classes");
  if (spec.doc_length < 1) throw ConfigError("synthetic doc_length must be positive");
  if (spec.noise_rate > 0.0 && spec.vocab_size == 0) throw ConfigError("noise needs a non-empty noise vocabulary");
  std::vector<std::size_t> sizes = spec.class_sizes;
  if (sizes.empty()) sizes.assign(spec.num_classes, spec.docs_per_class);
  if (sizes.size() != spec.num_classes) throw ConfigError("class_sizes must have one entry per class");

  Rng rng(seed);
  LabeledTexts out;
  for (std::size_t k = 0; k < spec.num_classes; ++k) out.class_names.push_back("class" + std::to_string(k));
  for (std::size_t k = 0; k < spec.num_classes; ++k) {
    for (std::size_t d = 0; d < sizes[k]; ++d) {
      std::size_t marker_class = k;
      if (spec.label_noise > 0.0 && rng.bernoulli(spec.label_noise)) {
        marker_class = (k + 1 + rng.index(spec.num_classes - 1)) % spec.num_classes;
      }
      const std::string marker = marker_token(spec.marker_offset + marker_class);
      std::vector<std::string> tokens;
      bool has_marker = false;
      for (std::size_t i = 0; i < spec.doc_length; ++i) {
        if (spec.noise_rate > 0.0 && rng.bernoulli(spec.noise_rate)) {
          tokens.push_back(noise_token(rng.index(spec.vocab_size)));
        } else {
          tokens.push_back(marker);
          has_marker = true;
        }
      }
      if (!has_marker) tokens[rng.index(tokens.size())] = marker;
      out.documents.push_back({join(tokens), std::move(tokens), k});
    }
  }
  return out;
}

struct SyntheticCorpus {
  LabeledTexts texts;
  Vocabulary vocab;
  LabeledCorpus corpus;
};

inline SyntheticCorpus synthesize_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
  auto texts = synthesize_texts(spec, seed);
  auto lists = texts.token_lists();
  auto vocab = build_vocabulary(lists);
  auto corpus = encode_corpus(texts, vocab);
  return {std::move(texts), std::move(vocab), std::move(corpus)};
}

}  // namespace affect::corpus
