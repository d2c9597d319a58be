#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "affect/corpus/porter.hpp"
#include "affect/corpus/stopwords.hpp"
#include "affect/corpus/text.hpp"
#include "affect/rng.hpp"

namespace {

using affect::corpus::PreprocessOptions;
using affect::corpus::tokenize;
using Tokens = std::vector<std::string>;

std::set<std::string> shipped_stopwords() {
  std::ifstream in(std::string(AFFECT_SOURCE_DIR) + "/data/stopwords_en_v1.txt");
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) words.insert(line);
  }
  return words;
}

TEST(TokenizeTest, FullPipelineStemsInflections) {
  EXPECT_EQ(tokenize("Played, PLAYING 123!", PreprocessOptions::full()), (Tokens{"play", "play"}));
}

TEST(TokenizeTest, EmptyInput) {
  EXPECT_TRUE(tokenize("", PreprocessOptions::full()).empty());
  EXPECT_TRUE(tokenize("", PreprocessOptions{}).empty());
}

TEST(TokenizeTest, StopwordsRemovedPerShippedList) {
  PreprocessOptions opts;
  opts.remove_stopwords = true;
  const auto tokens = tokenize("The cat sat", opts);
  EXPECT_EQ(tokens, (Tokens{"cat", "sat"}));

  // Lookup oracle against the shipped file, independent of the embedded table.
  const auto list = shipped_stopwords();
  for (const std::string w : {"the", "cat", "sat"}) {
    const bool kept = std::find(tokens.begin(), tokens.end(), w) != tokens.end();
    EXPECT_EQ(kept, list.count(w) == 0) << w;
  }
}

TEST(TokenizeTest, EmbeddedListMatchesShippedFile) {
  const auto list = shipped_stopwords();
  EXPECT_EQ(list.size(), affect::corpus::kEnglishStopwords.size());
  for (auto w : affect::corpus::kEnglishStopwords) EXPECT_EQ(list.count(std::string(w)), 1u) << w;
  const auto loaded = affect::corpus::StopwordList::load(std::string(AFFECT_SOURCE_DIR) + "/data/stopwords_en_v1.txt");
  EXPECT_EQ(loaded.size(), list.size());
}

TEST(TokenizeTest, DefaultOptionsKeepStopwordsAndStems) {
  EXPECT_EQ(tokenize("The Cats played.", PreprocessOptions{}), (Tokens{"the", "cats", "played"}));
}

TEST(TokenizeTest, OptionsApplyIndependently) {
  PreprocessOptions none{false, false, false, false, false, std::nullopt};
  EXPECT_EQ(tokenize("Hi, Bob 42", none), (Tokens{"Hi,", "Bob", "42"}));
  PreprocessOptions digits = none;
  digits.strip_numbers = true;
  EXPECT_EQ(tokenize("room 101b", digits), (Tokens{"room", "b"}));
}

TEST(TokenizeTest, TruncatesTail) {
  PreprocessOptions opts;
  opts.max_sequence_length = 2;
  EXPECT_EQ(tokenize("a b c d", opts), (Tokens{"a", "b"}));
}

TEST(TokenizeTest, InvalidUtf8NamesByteOffset) {
  const std::string bad = std::string("abc") + "\xC3" + "(";
  try {
    tokenize(bad, PreprocessOptions{});
    FAIL() << "expected DataError";
  } catch (const affect::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset 3"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(affect::corpus::find_invalid_utf8("caf\xC3\xA9").has_value());
  EXPECT_EQ(affect::corpus::find_invalid_utf8("\xC0\xAF"), 0u);          // overlong
  EXPECT_EQ(affect::corpus::find_invalid_utf8("x\xED\xA0\x80"), 1u);     // surrogate
}

TEST(TokenizeTest, NonAsciiPassesThrough) {
  EXPECT_EQ(tokenize("Café naïve", PreprocessOptions{}), (Tokens{"café", "naïve"}));
}

TEST(TokenizeTest, Deterministic) {
  const std::string text = "It's a TRULY wonderful, wonderful day -- 2 times!";
  for (const auto& opts : {PreprocessOptions{}, PreprocessOptions::full()}) {
    EXPECT_EQ(tokenize(text, opts), tokenize(text, opts));
  }
}

// tokenize(join(tokenize(t))) == tokenize(t) on random texts built from words
// that survive every enabled filter.
TEST(TokenizeTest, IdempotentOnSurvivingTokens) {
  const std::vector<std::string> pieces = {"Hello", "world", ",", "GREAT", "!", "film", "...", "Joy", "?", "rain"};
  PreprocessOptions no_stem = PreprocessOptions::full();
  no_stem.stem = false;
  affect::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const std::size_t n = 1 + rng.index(12);
    for (std::size_t i = 0; i < n; ++i) text += pieces[rng.index(pieces.size())] + (rng.bernoulli(0.5) ? " " : "");
    for (const auto& opts : {PreprocessOptions{}, no_stem}) {
      const auto once = tokenize(text, opts);
      EXPECT_EQ(tokenize(affect::corpus::join(once), opts), once) << text;
    }
  }
}

// Expected stems cross-checked against NLTK PorterStemmer(ORIGINAL_ALGORITHM),
// except step 1c words (play, happy, enjoy, sky, spy), which follow NLTK's default
// y->i rule.
TEST(PorterTest, ReferenceVocabulary) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"caresses", "caress"},     {"ponies", "poni"},          {"ties", "ti"},
      {"caress", "caress"},       {"cats", "cat"},             {"feed", "feed"},
      {"agreed", "agre"},         {"plastered", "plaster"},    {"bled", "bled"},
      {"motoring", "motor"},      {"sing", "sing"},            {"conflated", "conflat"},
      {"troubled", "troubl"},     {"sized", "size"},           {"hopping", "hop"},
      {"tanned", "tan"},          {"falling", "fall"},         {"hissing", "hiss"},
      {"fizzed", "fizz"},         {"failing", "fail"},         {"filing", "file"},
      {"happy", "happi"},         {"relational", "relat"},     {"conditional", "condit"},
      {"rational", "ration"},     {"valenci", "valenc"},       {"digitizer", "digit"},
      {"vietnamization", "vietnam"}, {"predication", "predic"}, {"operator", "oper"},
      {"feudalism", "feudal"},    {"decisiveness", "decis"},   {"hopefulness", "hope"},
      {"callousness", "callous"}, {"formaliti", "formal"},     {"sensitiviti", "sensit"},
      {"sensibiliti", "sensibl"}, {"triplicate", "triplic"},   {"formative", "form"},
      {"formalize", "formal"},    {"electriciti", "electr"},   {"electrical", "electr"},
      {"hopeful", "hope"},        {"goodness", "good"},        {"revival", "reviv"},
      {"allowance", "allow"},     {"inference", "infer"},      {"airliner", "airlin"},
      {"gyroscopic", "gyroscop"}, {"adjustable", "adjust"},    {"defensible", "defens"},
      {"irritant", "irrit"},      {"replacement", "replac"},   {"adjustment", "adjust"},
      {"dependent", "depend"},    {"adoption", "adopt"},       {"communism", "commun"},
      {"activate", "activ"},      {"angulariti", "angular"},   {"homologous", "homolog"},
      {"effective", "effect"},    {"bowdlerize", "bowdler"},   {"probate", "probat"},
      {"rate", "rate"},           {"cease", "ceas"},           {"controll", "control"},
      {"roll", "roll"},           {"generalizations", "gener"}, {"oscillators", "oscil"},
      {"played", "play"},         {"playing", "play"},         {"enjoy", "enjoy"},
      {"sky", "ski"},             {"spy", "spi"},              {"is", "is"},
  };
  for (const auto& [word, stem] : cases) EXPECT_EQ(affect::corpus::porter_stem(word), stem) << word;
}

TEST(PorterTest, NonAlphabeticWordsUntouched) {
  EXPECT_EQ(affect::corpus::porter_stem("mp3s"), "mp3s");
  EXPECT_EQ(affect::corpus::porter_stem("café"), "café");
}

}  // namespace
