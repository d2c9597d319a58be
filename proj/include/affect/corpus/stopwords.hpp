#pragma once

#include <array>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>

#include "affect/error.hpp"

namespace affect::corpus {

// English stopword list, version 1. Identical to data/stopwords_en_v1.txt.
inline constexpr std::string_view kStopwordListVersion = "en-v1";

inline constexpr std::array<std::string_view, 179> kEnglishStopwords = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're",
    "you've", "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he",
    "him", "his", "himself", "she", "she's", "her", "hers", "herself", "it", "it's",
    "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
    "who", "whom", "this", "that", "that'll", "these", "those", "am", "is", "are",
    "was", "were", "be", "been", "being", "have", "has", "had", "having", "do", "does",
    "did", "doing", "a", "an", "the", "and", "but", "if", "or", "because", "as",
    "until", "while", "of", "at", "by", "for", "with", "about", "against", "between",
    "into", "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "in", "out", "on", "off", "over", "under", "again", "further",
    "then", "once", "here", "there", "when", "where", "why", "how", "all", "any",
    "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
    "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will",
    "just", "don", "don't", "should", "should've", "now", "d", "ll", "m", "o", "re",
    "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn", "didn't",
    "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn",
    "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't",
    "shan", "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't",
    "won", "won't", "wouldn", "wouldn't"};

class StopwordList {
 public:
  StopwordList() = default;

  template <class Range>
  explicit StopwordList(const Range& words) {
    for (const auto& w : words) words_.emplace(w);
  }

  static const StopwordList& english() {
    static const StopwordList list(kEnglishStopwords);
    return list;
  }

  /// One token per line, UTF-8. Blank lines are ignored.
  static StopwordList load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open stopword list: " + path);
    StopwordList list;
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      if (!line.empty()) list.words_.insert(line);
    }
    return list;
  }

  bool contains(std::string_view token) const { return words_.count(std::string(token)) != 0; }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

}  // namespace affect::corpus
