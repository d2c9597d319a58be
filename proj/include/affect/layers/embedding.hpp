#pragma once

#include <charconv>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "affect/corpus/csv.hpp"
#include "affect/corpus/vocabulary.hpp"
#include "affect/error.hpp"
#include "affect/numerics/tape.hpp"
#include "affect/rng.hpp"

namespace affect::layers {

using numerics::Parameter;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

inline constexpr double kEmbeddingInitBound = 0.05;

/// V x D lookup table. Row 0 (padding) is all-zero and never receives gradient.
struct EmbeddingLayer {
  Parameter table;
  bool trainable = true;

  EmbeddingLayer() = default;
  EmbeddingLayer(Tensor matrix, bool is_trainable) : table("embedding", std::move(matrix)), trainable(is_trainable) {
    auto pad = table.value.row_span(corpus::kPadIndex);
    std::fill(pad.begin(), pad.end(), 0.0);
  }

  static EmbeddingLayer random(std::size_t vocab_size, std::size_t dim, Rng& rng, bool trainable = true) {
    Tensor m({vocab_size, dim});
    for (auto& x : m.data()) x = rng.uniform(-kEmbeddingInitBound, kEmbeddingInitBound);
    return EmbeddingLayer(std::move(m), trainable);
  }

  std::size_t vocab_size() const { return table.value.rows(); }
  std::size_t dim() const { return table.value.cols(); }

  std::vector<Var> embed(Tape& tape, std::span<const std::size_t> ids) const {
    std::vector<Var> out;
    out.reserve(ids.size());
    Var matrix = trainable ? tape.param(table) : Var{};
    for (auto id : ids) {
      if (id >= vocab_size()) {
        throw ShapeError("embed: index " + std::to_string(id) + " out of range for vocabulary of " +
                         std::to_string(vocab_size()));
      }
      if (id == corpus::kPadIndex) {
        out.push_back(tape.constant(Tensor({1, dim()})));
      } else if (trainable) {
        out.push_back(tape.row_lookup(matrix, id));
      } else {
        auto row = table.value.row_span(id);
        out.push_back(tape.constant(Tensor::row({row.begin(), row.end()})));
      }
    }
    return out;
  }
};

struct PretrainedEmbeddings {
  EmbeddingLayer layer;
  std::size_t matched = 0;
  /// Fraction of regular (non-reserved) vocabulary entries found in the file.
  double coverage = 0.0;
  std::vector<std::string> warnings;
};

/// Text format: `token v1 v2 ... vD` per line, single-space separated, no header.
/// Vocabulary entries missing from the file (and <unk>) are drawn from
/// uniform(-0.05, 0.05) under `seed`; the padding row stays zero.
inline PretrainedEmbeddings load_pretrained_embeddings(const std::string& path, const corpus::Vocabulary& vocab,
                                                       std::uint64_t seed, bool trainable = true) {
  const std::string text = corpus::read_file(path);
  corpus::require_utf8(text, path);

  std::size_t dim = 0;
  std::vector<std::vector<double>> found(vocab.size());
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::vector<double> values;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const std::size_t sp = line.find(' ');
    if (sp == std::string_view::npos || sp == 0) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected a token followed by numbers");
    }
    const std::string_view token = line.substr(0, sp);
    std::string_view rest = line.substr(sp + 1);
    values.clear();
    while (!rest.empty()) {
      const std::size_t next = rest.find(' ');
      const std::string_view field = rest.substr(0, next);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError(path + ":" + std::to_string(line_no) + ": non-numeric field '" + std::string(field) + "'");
      }
      values.push_back(v);
      if (next == std::string_view::npos) break;
      rest.remove_prefix(next + 1);
    }
    if (values.empty()) throw DataError(path + ":" + std::to_string(line_no) + ": no vector values");
    if (dim == 0) {
      dim = values.size();
    } else if (values.size() != dim) {
      throw DataError(path + ":" + std::to_string(line_no) + ": inconsistent dimension " +
                      std::to_string(values.size()) + ", expected " + std::to_string(dim));
    }
    const std::string tok(token);
    if (vocab.contains(tok)) {
      const std::size_t idx = vocab.index(tok);
      if (idx >= 2 && found[idx].empty()) found[idx] = values;
    }
  }
  if (dim == 0) throw DataError(path + ": embedding file contains no vectors");

  Rng rng(seed);
  Tensor m({vocab.size(), dim});
  PretrainedEmbeddings out;
  for (std::size_t v = 0; v < vocab.size(); ++v) {
    auto row = m.row_span(v);
    if (v == corpus::kPadIndex) continue;
    if (!found[v].empty()) {
      std::copy(found[v].begin(), found[v].end(), row.begin());
      ++out.matched;
    } else {
      for (auto& x : row) x = rng.uniform(-kEmbeddingInitBound, kEmbeddingInitBound);
    }
  }
  const std::size_t regular = vocab.size() - 2;
  out.coverage = regular == 0 ? 0.0 : static_cast<double>(out.matched) / static_cast<double>(regular);
  if (out.matched == 0) out.warnings.push_back("no vocabulary token found in " + path + " (coverage 0.0)");
  out.layer = EmbeddingLayer(std::move(m), trainable);
  return out;
}

}  // namespace affect::layers
