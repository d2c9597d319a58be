#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "affect/corpus/vocabulary.hpp"
#include "affect/error.hpp"

namespace affect::baseline {

/// Sparse row: (feature index, value) pairs sorted by index.
struct SparseVector {
  std::vector<std::pair<std::size_t, double>> entries;

  static SparseVector from_dense(std::span<const double> values) {
    SparseVector v;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] != 0.0) v.entries.emplace_back(i, values[i]);
    }
    return v;
  }

  double norm() const {
    double s = 0.0;
    for (const auto& [_, x] : entries) s += x * x;
    return std::sqrt(s);
  }

  double get(std::size_t index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const auto& e, std::size_t i) { return e.first < i; });
    return it != entries.end() && it->first == index ? it->second : 0.0;
  }
};

/// Bag-of-words tf-idf: tf(t, d) * ln(D / df_t), then L2 normalization.
/// Feature indices are vocabulary indices; the reserved entries never fire.
class TfidfVectorizer {
 public:
  TfidfVectorizer() = default;

  static TfidfVectorizer fit(std::span<const std::vector<std::string>> documents) {
    if (documents.empty()) throw DataError("tf-idf: cannot fit on an empty corpus");
    TfidfVectorizer v;
    v.vocab_ = corpus::build_vocabulary(documents, 1);
    v.df_.assign(v.vocab_.size(), 0);
    v.documents_ = documents.size();
    for (const auto& doc : documents) {
      std::vector<std::size_t> ids;
      for (const auto& t : doc) ids.push_back(v.vocab_.index(t));
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      for (auto i : ids) ++v.df_[i];
    }
    v.idf_.assign(v.vocab_.size(), 0.0);
    for (std::size_t i = corpus::kUnknownIndex + 1; i < v.vocab_.size(); ++i) {
      v.idf_[i] = std::log(static_cast<double>(v.documents_) / static_cast<double>(v.df_[i]));
    }
    return v;
  }

  /// Restores a fitted vectorizer from its vocabulary and document frequencies.
  static TfidfVectorizer from_state(corpus::Vocabulary vocab, std::vector<std::size_t> df, std::size_t documents) {
    if (df.size() != vocab.size() || documents == 0) throw DataError("tf-idf: inconsistent saved state");
    TfidfVectorizer v;
    v.vocab_ = std::move(vocab);
    v.df_ = std::move(df);
    v.documents_ = documents;
    v.idf_.assign(v.vocab_.size(), 0.0);
    for (std::size_t i = corpus::kUnknownIndex + 1; i < v.vocab_.size(); ++i) {
      if (v.df_[i] == 0 || v.df_[i] > documents) throw DataError("tf-idf: document frequency out of range");
      v.idf_[i] = std::log(static_cast<double>(documents) / static_cast<double>(v.df_[i]));
    }
    return v;
  }

  /// tf * idf before normalization; unseen terms are ignored.
  SparseVector raw_weights(std::span<const std::string> tokens) const {
    std::map<std::size_t, std::size_t> tf;
    for (const auto& t : tokens) {
      const std::size_t i = vocab_.index(t);
      if (i > corpus::kUnknownIndex) ++tf[i];
    }
    SparseVector out;
    for (const auto& [i, n] : tf) out.entries.emplace_back(i, static_cast<double>(n) * idf_[i]);
    return out;
  }

  /// L2-normalized tf-idf vector. A document with no weighted term maps to the zero vector.
  SparseVector transform(std::span<const std::string> tokens) const {
    SparseVector v = raw_weights(tokens);
    const double n = v.norm();
    if (n > 0.0) {
      for (auto& [_, x] : v.entries) x /= n;
    }
    return v;
  }

  std::vector<SparseVector> transform_all(std::span<const std::vector<std::string>> documents) const {
    std::vector<SparseVector> out;
    out.reserve(documents.size());
    for (const auto& d : documents) out.push_back(transform(d));
    return out;
  }

  std::size_t dimension() const { return vocab_.size(); }
  std::size_t document_count() const { return documents_; }
  std::size_t document_frequency(const std::string& term) const {
    const std::size_t i = vocab_.index(term);
    return i > corpus::kUnknownIndex ? df_[i] : 0;
  }
  double idf(const std::string& term) const {
    const std::size_t i = vocab_.index(term);
    return i > corpus::kUnknownIndex ? idf_[i] : 0.0;
  }
  const corpus::Vocabulary& vocabulary() const { return vocab_; }
  const std::vector<std::size_t>& document_frequencies() const { return df_; }

 private:
  corpus::Vocabulary vocab_;
  std::vector<std::size_t> df_;
  std::vector<double> idf_;
  std::size_t documents_ = 0;
};

}  // namespace affect::baseline
