#pragma once

#include <array>
#include <string>
#include <string_view>

namespace affect::corpus {

// Porter (1980) suffix-stripping stemmer for lowercase ASCII words.
//
// Step 1c uses the refined y->i rule from Porter's later reference code (also
// NLTK's default): y becomes i only when preceded by a consonant that is not the
// first letter. So "happy" -> "happi", "play" -> "play", "enjoy" -> "enjoy".
class PorterStemmer {
 public:
  std::string operator()(std::string_view word) const {
    std::string w(word);
    if (w.size() <= 2) return w;
    for (char c : w) {
      if (c < 'a' || c > 'z') return w;
    }
    step1a(w);
    step1b(w);
    step1c(w);
    step2(w);
    step3(w);
    step4(w);
    step5(w);
    return w;
  }

 private:
  struct Rule {
    std::string_view suffix;
    std::string_view replacement;
  };

  static bool consonant(const std::string& w, std::size_t i) {
    switch (w[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 || !consonant(w, i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in w[0, len).
  static int measure(const std::string& w, std::size_t len) {
    int m = 0;
    std::size_t i = 0;
    while (i < len && consonant(w, i)) ++i;
    while (i < len) {
      while (i < len && !consonant(w, i)) ++i;
      if (i >= len) break;
      while (i < len && consonant(w, i)) ++i;
      ++m;
    }
    return m;
  }

  static bool has_vowel(const std::string& w, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
      if (!consonant(w, i)) return true;
    }
    return false;
  }

  static bool double_consonant(const std::string& w, std::size_t len) {
    return len >= 2 && w[len - 1] == w[len - 2] && consonant(w, len - 1);
  }

  // *o: stem ends consonant-vowel-consonant, last consonant not w, x or y.
  static bool cvc(const std::string& w, std::size_t len) {
    if (len < 3) return false;
    if (!consonant(w, len - 1) || consonant(w, len - 2) || !consonant(w, len - 3)) return false;
    const char c = w[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  static bool ends_with(const std::string& w, std::string_view s) {
    return w.size() >= s.size() && std::string_view(w).substr(w.size() - s.size()) == s;
  }

  static void replace_suffix(std::string& w, std::size_t suffix_len, std::string_view with) {
    w.resize(w.size() - suffix_len);
    w.append(with);
  }

  // Longest matching suffix wins; if its condition fails the step does nothing.
  template <std::size_t N, class Cond>
  static void apply_longest(std::string& w, const std::array<Rule, N>& rules, Cond cond) {
    const Rule* best = nullptr;
    for (const auto& r : rules) {
      if (ends_with(w, r.suffix) && (!best || r.suffix.size() > best->suffix.size())) best = &r;
    }
    if (!best) return;
    const std::size_t stem_len = w.size() - best->suffix.size();
    if (cond(w, stem_len, best->suffix)) replace_suffix(w, best->suffix.size(), best->replacement);
  }

  static void step1a(std::string& w) {
    if (ends_with(w, "sses")) {
      replace_suffix(w, 4, "ss");
    } else if (ends_with(w, "ies")) {
      replace_suffix(w, 3, "i");
    } else if (ends_with(w, "ss")) {
      // unchanged
    } else if (ends_with(w, "s")) {
      w.pop_back();
    }
  }

  static void step1b(std::string& w) {
    if (ends_with(w, "eed")) {
      if (measure(w, w.size() - 3) > 0) w.pop_back();
      return;
    }
    std::size_t cut = 0;
    if (ends_with(w, "ed") && has_vowel(w, w.size() - 2)) {
      cut = 2;
    } else if (ends_with(w, "ing") && has_vowel(w, w.size() - 3)) {
      cut = 3;
    }
    if (cut == 0) return;
    w.resize(w.size() - cut);
    if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
      w.push_back('e');
    } else if (double_consonant(w, w.size())) {
      const char c = w.back();
      if (c != 'l' && c != 's' && c != 'z') w.pop_back();
    } else if (measure(w, w.size()) == 1 && cvc(w, w.size())) {
      w.push_back('e');
    }
  }

  static void step1c(std::string& w) {
    if (w.back() == 'y' && w.size() > 2 && consonant(w, w.size() - 2)) w.back() = 'i';
  }

  static void step2(std::string& w) {
    static constexpr std::array<Rule, 20> rules{{
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    }};
    apply_longest(w, rules, [](const std::string& s, std::size_t len, std::string_view) {
      return measure(s, len) > 0;
    });
  }

  static void step3(std::string& w) {
    static constexpr std::array<Rule, 7> rules{{
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    }};
    apply_longest(w, rules, [](const std::string& s, std::size_t len, std::string_view) {
      return measure(s, len) > 0;
    });
  }

  static void step4(std::string& w) {
    static constexpr std::array<Rule, 19> rules{{
        {"al", ""},  {"ance", ""}, {"ence", ""}, {"er", ""},  {"ic", ""},
        {"able", ""}, {"ible", ""}, {"ant", ""},  {"ement", ""}, {"ment", ""},
        {"ent", ""}, {"ion", ""},  {"ou", ""},   {"ism", ""}, {"ate", ""},
        {"iti", ""}, {"ous", ""},  {"ive", ""},  {"ize", ""},
    }};
    apply_longest(w, rules, [](const std::string& s, std::size_t len, std::string_view suffix) {
      if (measure(s, len) <= 1) return false;
      if (suffix == "ion") return len > 0 && (s[len - 1] == 's' || s[len - 1] == 't');
      return true;
    });
  }

  static void step5(std::string& w) {
    if (w.back() == 'e') {
      const std::size_t len = w.size() - 1;
      const int m = measure(w, len);
      if (m > 1 || (m == 1 && !cvc(w, len))) w.pop_back();
    }
    if (w.size() >= 2 && w.back() == 'l' && double_consonant(w, w.size()) &&
        measure(w, w.size()) > 1) {
      w.pop_back();
    }
  }
};

inline std::string porter_stem(std::string_view word) { return PorterStemmer{}(word); }

}  // namespace affect::corpus
