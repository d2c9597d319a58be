#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "affect/error.hpp"

namespace affect::corpus {

inline constexpr std::size_t kPadIndex = 0;
inline constexpr std::size_t kUnknownIndex = 1;
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnknownToken = "<unk>";

class Vocabulary {
 public:
  Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

  /// Builds from an index-ordered token list that excludes the reserved entries.
  explicit Vocabulary(std::vector<std::string> regular_tokens, std::size_t min_count = 1,
                      std::size_t max_size = std::numeric_limits<std::size_t>::max())
      : min_count_(min_count), max_size_(max_size) {
    tokens_.reserve(regular_tokens.size() + 2);
    tokens_.emplace_back(kPadToken);
    tokens_.emplace_back(kUnknownToken);
    for (auto& t : regular_tokens) tokens_.push_back(std::move(t));
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!index_.emplace(tokens_[i], i).second) {
        throw DataError("duplicate vocabulary token: " + tokens_[i]);
      }
    }
  }

  /// Inverse of tokens(): accepts a full index-ordered list including the reserved entries.
  static Vocabulary from_tokens(const std::vector<std::string>& all_tokens) {
    if (all_tokens.size() < 2 || all_tokens[0] != kPadToken || all_tokens[1] != kUnknownToken) {
      throw DataError("vocabulary must start with the reserved <pad> and <unk> entries");
    }
    return Vocabulary(std::vector<std::string>(all_tokens.begin() + 2, all_tokens.end()));
  }

  std::size_t size() const { return tokens_.size(); }
  std::size_t min_count() const { return min_count_; }
  std::size_t max_size() const { return max_size_; }

  bool contains(const std::string& token) const { return index_.count(token) != 0; }

  std::size_t index(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnknownIndex : it->second;
  }

  const std::string& token(std::size_t index) const {
    if (index >= tokens_.size()) {
      throw DataError("vocabulary index " + std::to_string(index) + " out of range");
    }
    return tokens_[index];
  }

  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t min_count_ = 1;
  std::size_t max_size_ = std::numeric_limits<std::size_t>::max();
};

/// Frequency-ranked vocabulary (ties lexicographic). max_size counts the two
/// reserved entries.
inline Vocabulary build_vocabulary(std::span<const std::vector<std::string>> documents,
                                   std::size_t min_count = 1,
                                   std::size_t max_size = std::numeric_limits<std::size_t>::max()) {
  if (min_count < 1) throw ConfigError("min_count must be at least 1");
  if (max_size < 2) throw ConfigError("max_size must be at least 2");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& doc : documents) {
    for (const auto& t : doc) ++counts[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [token, n] : counts) {
    if (n >= min_count && token != kPadToken && token != kUnknownToken) ranked.emplace_back(token, n);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > max_size - 2) ranked.resize(max_size - 2);
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [token, n] : ranked) tokens.push_back(std::move(token));
  return Vocabulary(std::move(tokens), min_count, max_size);
}

inline std::vector<std::size_t> encode(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.index(t));
  return ids;
}

}  // namespace affect::corpus
