#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affect/corpus/porter.hpp"
#include "affect/corpus/stopwords.hpp"
#include "affect/error.hpp"

namespace affect::corpus {

/// Byte offset of the first invalid UTF-8 sequence, or nullopt for valid input.
inline std::optional<std::size_t> find_invalid_utf8(std::string_view s) {
  const auto* p = reinterpret_cast<const unsigned char*>(s.data());
  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = p[i];
    std::size_t len = 0;
    unsigned min_cp = 0;
    unsigned cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2, min_cp = 0x80, cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3, min_cp = 0x800, cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4, min_cp = 0x10000, cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (std::size_t k = 1; k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    // overlong, surrogate, or beyond U+10FFFF
    if (cp < min_cp || (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) return i;
    i += len;
  }
  return std::nullopt;
}

inline void require_utf8(std::string_view s, std::string_view what = "text") {
  if (auto bad = find_invalid_utf8(s)) {
    throw DataError("invalid UTF-8 in " + std::string(what) + " at byte offset " +
                    std::to_string(*bad));
  }
}

struct PreprocessOptions {
  bool lowercase = true;
  bool strip_punctuation = true;
  bool strip_numbers = false;
  bool remove_stopwords = false;
  bool stem = false;
  /// nullopt means unlimited.
  std::optional<std::size_t> max_sequence_length = 512;

  /// The full bag-of-words pipeline used by the tf-idf baseline.
  static PreprocessOptions full() {
    return {true, true, true, true, true, std::nullopt};
  }

  bool operator==(const PreprocessOptions&) const = default;
};

namespace detail {

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_ascii_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
         (c >= '{' && c <= '~');
}

}  // namespace detail

/// Applies, in order: lowercase, strip punctuation, strip numbers, stopword
/// removal, stemming, truncation. Case folding and character classes are ASCII;
/// other code points pass through unchanged. Punctuation and digits become token
/// separators.
inline std::vector<std::string> tokenize(std::string_view text, const PreprocessOptions& opts,
                                         const StopwordList& stopwords = StopwordList::english()) {
  require_utf8(text);
  std::string buf(text);
  for (char& c : buf) {
    if (opts.lowercase && c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (opts.strip_punctuation && detail::is_ascii_punct(c)) c = ' ';
    if (opts.strip_numbers && c >= '0' && c <= '9') c = ' ';
  }

  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < buf.size()) {
    while (i < buf.size() && detail::is_ascii_space(buf[i])) ++i;
    const std::size_t start = i;
    while (i < buf.size() && !detail::is_ascii_space(buf[i])) ++i;
    if (i > start) tokens.emplace_back(buf, start, i - start);
  }

  if (opts.remove_stopwords) {
    std::erase_if(tokens, [&](const std::string& t) { return stopwords.contains(t); });
  }
  if (opts.stem) {
    const PorterStemmer stemmer;
    for (auto& t : tokens) t = stemmer(t);
  }
  if (opts.max_sequence_length && tokens.size() > *opts.max_sequence_length) {
    tokens.resize(*opts.max_sequence_length);
  }
  return tokens;
}

inline std::string join(const std::vector<std::string>& tokens, char sep = ' ') {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(sep);
    out += tokens[i];
  }
  return out;
}

}  // namespace affect::corpus
