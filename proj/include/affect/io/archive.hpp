#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "affect/corpus/text.hpp"
#include "affect/corpus/vocabulary.hpp"
#include "affect/error.hpp"
#include "affect/layers/network.hpp"

namespace affect::io {

using nlohmann::json;

inline constexpr std::string_view kArchiveMagic = "AFFECTV1";
inline constexpr std::string_view kArchiveMagicStem = "AFFECTV";
inline constexpr int kArchiveVersion = 1;

/// A trained network plus everything needed to apply it to raw text.
struct ModelArchive {
  layers::AffectNetwork network;
  corpus::Vocabulary vocabulary;
  corpus::PreprocessOptions preprocess;
  /// Class names (classification) or dimension names (regression), in output order.
  std::vector<std::string> output_names;
  /// Effective run configuration, echoed verbatim.
  json config = json::object();
  /// Metric summary of the archived run.
  json metrics = json::object();
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(std::string_view bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}

  std::string_view take(std::size_t n) {
    if (n > bytes_.size() - pos_) {
      throw DataError(source_ + ": truncated archive at byte " + std::to_string(pos_));
    }
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint64_t u(int width) {
    const auto s = take(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }

  double f64() { return std::bit_cast<double>(u(8)); }
  bool done() const { return pos_ == bytes_.size(); }
  const std::string& source() const { return source_; }

 private:
  std::string_view bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

inline json network_config_json(const layers::NetworkConfig& c) {
  return {{"vocab_size", c.vocab_size},
          {"embed_dim", c.embed_dim},
          {"hidden", c.hidden},
          {"bidirectional", c.direction == layers::Direction::kBidirectional},
          {"task", c.task == layers::TaskKind::kClassification ? "classification" : "regression"},
          {"outputs", c.outputs},
          {"recurrent_dropout", c.dropout.recurrent_rate},
          {"output_dropout", c.dropout.output_rate},
          {"trainable_embeddings", c.trainable_embeddings}};
}

inline layers::NetworkConfig network_config_from_json(const json& j) {
  layers::NetworkConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.direction = j.at("bidirectional").get<bool>() ? layers::Direction::kBidirectional
                                                  : layers::Direction::kUnidirectional;
  const auto task = j.at("task").get<std::string>();
  if (task != "classification" && task != "regression") throw DataError("archive: unknown task '" + task + "'");
  c.task = task == "classification" ? layers::TaskKind::kClassification : layers::TaskKind::kRegression;
  c.outputs = j.at("outputs").get<std::size_t>();
  c.dropout.recurrent_rate = j.at("recurrent_dropout").get<double>();
  c.dropout.output_rate = j.at("output_dropout").get<double>();
  c.trainable_embeddings = j.at("trainable_embeddings").get<bool>();
  return c;
}

inline json preprocess_json(const corpus::PreprocessOptions& p) {
  return {{"lowercase", p.lowercase},
          {"strip_punctuation", p.strip_punctuation},
          {"strip_numbers", p.strip_numbers},
          {"remove_stopwords", p.remove_stopwords},
          {"stem", p.stem},
          {"max_sequence_length", p.max_sequence_length ? json(*p.max_sequence_length) : json(nullptr)}};
}

inline corpus::PreprocessOptions preprocess_from_json(const json& j) {
  corpus::PreprocessOptions p;
  p.lowercase = j.at("lowercase").get<bool>();
  p.strip_punctuation = j.at("strip_punctuation").get<bool>();
  p.strip_numbers = j.at("strip_numbers").get<bool>();
  p.remove_stopwords = j.at("remove_stopwords").get<bool>();
  p.stem = j.at("stem").get<bool>();
  const auto& m = j.at("max_sequence_length");
  p.max_sequence_length = m.is_null() ? std::nullopt : std::optional<std::size_t>(m.get<std::size_t>());
  return p;
}

// Named tensors of the archive: every network parameter, plus the affine
// head's target scaling when present.
inline std::vector<std::pair<std::string, numerics::Tensor>> collect_tensors(const layers::AffectNetwork& net) {
  std::vector<std::pair<std::string, numerics::Tensor>> out;
  for (const auto* p : net.all_parameters()) out.emplace_back(p->name, p->value);
  if (const auto* affine = std::get_if<layers::AffineHead>(&net.head())) {
    out.emplace_back("head.target_mean", numerics::Tensor::row(affine->target_mean));
    out.emplace_back("head.target_std", numerics::Tensor::row(affine->target_std));
  }
  return out;
}

}  // namespace detail

inline std::string serialize(const ModelArchive& archive) {
  const json meta = {{"format_version", kArchiveVersion},
                     {"architecture", detail::network_config_json(archive.network.config())},
                     {"vocabulary", archive.vocabulary.tokens()},
                     {"preprocessing", detail::preprocess_json(archive.preprocess)},
                     {"output_names", archive.output_names},
                     {"config", archive.config},
                     {"metrics", archive.metrics}};
  const std::string meta_text = meta.dump();
  std::string out(kArchiveMagic);
  detail::put_u64(out, meta_text.size());
  out += meta_text;
  const auto tensors = detail::collect_tensors(archive.network);
  detail::put_u64(out, tensors.size());
  for (const auto& [name, t] : tensors) {
    detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    detail::put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) detail::put_u64(out, d);
    for (double v : t.data()) detail::put_f64(out, v);
  }
  return out;
}

inline ModelArchive deserialize(std::string_view bytes, const std::string& source = "archive") {
  if (bytes.substr(0, kArchiveMagicStem.size()) == kArchiveMagicStem && bytes.size() >= kArchiveMagic.size() &&
      bytes.substr(0, kArchiveMagic.size()) != kArchiveMagic) {
    throw DataError(source + ": archive version mismatch: expected " + std::string(kArchiveMagic) + ", found " +
                    std::string(bytes.substr(0, kArchiveMagic.size())));
  }
  if (bytes.substr(0, kArchiveMagic.size()) != kArchiveMagic) {
    throw DataError(source + ": not a model archive (bad magic)");
  }
  detail::Reader in(bytes.substr(kArchiveMagic.size()), source);
  const auto meta_len = in.u(8);
  json meta;
  try {
    meta = json::parse(in.take(meta_len));
  } catch (const json::exception& e) {
    throw DataError(source + ": corrupt archive metadata: " + e.what());
  }

  ModelArchive a;
  std::map<std::string, numerics::Tensor> tensors;
  try {
    if (meta.at("format_version").get<int>() != kArchiveVersion) {
      throw DataError(source + ": archive version mismatch: expected " + std::to_string(kArchiveVersion) +
                      ", found " + meta.at("format_version").dump());
    }
    const auto config = detail::network_config_from_json(meta.at("architecture"));
    a.vocabulary = corpus::Vocabulary::from_tokens(meta.at("vocabulary").get<std::vector<std::string>>());
    a.preprocess = detail::preprocess_from_json(meta.at("preprocessing"));
    a.output_names = meta.at("output_names").get<std::vector<std::string>>();
    a.config = meta.at("config");
    a.metrics = meta.at("metrics");
    a.network = layers::AffectNetwork(config, 0);
  } catch (const json::exception& e) {
    throw DataError(source + ": invalid archive metadata: " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(source + ": invalid archive architecture: " + e.what());
  }
  if (a.vocabulary.size() != a.network.config().vocab_size) {
    throw DataError(source + ": vocabulary size disagrees with the architecture");
  }

  const auto count = in.u(8);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name(in.take(in.u(4)));
    const auto rank = in.u(4);
    numerics::Shape shape;
    for (std::uint64_t r = 0; r < rank; ++r) shape.push_back(in.u(8));
    std::vector<double> values(numerics::element_count(shape));
    for (auto& v : values) v = in.f64();
    if (!tensors.emplace(name, numerics::Tensor(shape, std::move(values))).second) {
      throw DataError(source + ": duplicate tensor '" + name + "'");
    }
  }
  if (!in.done()) throw DataError(source + ": trailing bytes after the last tensor");

  auto take_tensor = [&](const std::string& name, const numerics::Shape& expected) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw DataError(source + ": missing tensor '" + name + "'");
    if (it->second.shape() != expected) {
      throw DataError(source + ": tensor '" + name + "' has shape " + numerics::to_string(it->second.shape()) +
                      ", expected " + numerics::to_string(expected));
    }
    auto t = std::move(it->second);
    tensors.erase(it);
    return t;
  };
  for (auto* p : a.network.all_parameters()) p->value = take_tensor(p->name, p->value.shape());
  if (auto* affine = std::get_if<layers::AffineHead>(&a.network.head())) {
    const numerics::Shape row = {1, affine->outputs()};
    affine->target_mean = take_tensor("head.target_mean", row).values();
    affine->target_std = take_tensor("head.target_std", row).values();
  }
  if (!tensors.empty()) throw DataError(source + ": unexpected tensor '" + tensors.begin()->first + "'");
  if (a.output_names.size() != a.network.config().outputs) {
    throw DataError(source + ": output names disagree with the head size");
  }
  return a;
}

inline void save_archive(const ModelArchive& archive, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError(path + ": cannot open for writing");
  const auto bytes = serialize(archive);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError(path + ": write failed");
}

inline ModelArchive load_archive(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError(path + ": cannot open model archive");
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize(ss.str(), path);
}

/// Raw text to index sequence with the archive's preprocessing. Text that
/// preprocesses to nothing maps to a single unknown token.
inline std::vector<std::size_t> encode_text(const ModelArchive& archive, std::string_view text) {
  auto ids = corpus::encode(corpus::tokenize(text, archive.preprocess), archive.vocabulary);
  if (ids.empty()) ids.push_back(corpus::kUnknownIndex);
  return ids;
}

}  // namespace affect::io
