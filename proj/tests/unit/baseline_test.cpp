#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "affect/baseline/linear.hpp"
#include "affect/baseline/tfidf.hpp"
#include "affect/corpus/dataset.hpp"

namespace {

using namespace affect::baseline;
using Docs = std::vector<std::vector<std::string>>;

TEST(TfidfTest, TermInEveryDocumentHasZeroWeight) {
  const Docs docs = {{"a", "b"}, {"a", "c"}};
  const auto v = TfidfVectorizer::fit(docs);
  EXPECT_EQ(v.idf("a"), 0.0);
  EXPECT_EQ(v.raw_weights(docs[0]).get(v.vocabulary().index("a")), 0.0);
}

TEST(TfidfTest, RawWeightFormula) {
  const Docs docs = {{"x", "x", "x", "y"}, {"y"}};
  const auto v = TfidfVectorizer::fit(docs);
  EXPECT_NEAR(v.raw_weights(docs[0]).get(v.vocabulary().index("x")), 3.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(3.0 * std::log(2.0), 2.0794, 1e-4);
}

TEST(TfidfTest, SingleTermDocumentHasUnitNorm) {
  const Docs docs = {{"x"}, {"y"}, {"y", "z"}};
  const auto v = TfidfVectorizer::fit(docs);
  const std::vector<std::string> doc = {"x", "x"};
  EXPECT_NEAR(v.transform(doc).norm(), 1.0, 1e-15);
}

TEST(TfidfTest, UnseenTermsIgnoredAndEmptyCorpusRejected) {
  const Docs docs = {{"x"}, {"y"}};
  const auto v = TfidfVectorizer::fit(docs);
  const std::vector<std::string> doc = {"never", "seen"};
  EXPECT_TRUE(v.transform(doc).entries.empty());
  EXPECT_THROW(TfidfVectorizer::fit(Docs{}), affect::DataError);
}

TEST(TfidfTest, DocumentFrequencyBounded) {
  const auto texts = affect::corpus::synthesize_texts({.num_classes = 3, .docs_per_class = 10}, 2);
  const auto lists = texts.token_lists();
  const auto v = TfidfVectorizer::fit(lists);
  for (auto df : v.document_frequencies()) EXPECT_LE(df, v.document_count());
  EXPECT_EQ(v.transform(lists[3]).entries, v.transform(lists[3]).entries);
}

TEST(TfidfTest, RawWeightsLinearInCounts) {
  const Docs docs = {{"x", "y"}, {"y"}, {"z"}};
  const auto v = TfidfVectorizer::fit(docs);
  const std::vector<std::string> once = {"x", "z"};
  const std::vector<std::string> twice = {"x", "z", "x", "z"};
  const auto a = v.raw_weights(once);
  const auto b = v.raw_weights(twice);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_DOUBLE_EQ(b.entries[i].second, 2 * a.entries[i].second);
}

TEST(LinearTest, SeparableDataReachesPerfectTrainingAccuracy) {
  const auto texts = affect::corpus::synthesize_texts({.num_classes = 4, .docs_per_class = 15, .noise_rate = 0.6}, 3);
  const auto lists = texts.token_lists();
  const auto v = TfidfVectorizer::fit(lists);
  const auto x = v.transform_all(lists);
  std::vector<std::size_t> y;
  for (const auto& d : texts.documents) y.push_back(d.label);
  const auto w = affect::objective::class_weights(y, 4);
  const auto model = train_logistic(x, y, 4, v.dimension(), &w);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(model.predict_label(x[i]), y[i]);
}

TEST(LinearTest, HugePenaltyGivesUniformProbabilities) {
  const auto texts = affect::corpus::synthesize_texts({.num_classes = 3, .docs_per_class = 10}, 4);
  const auto lists = texts.token_lists();
  const auto v = TfidfVectorizer::fit(lists);
  const auto x = v.transform_all(lists);
  std::vector<std::size_t> y;
  for (const auto& d : texts.documents) y.push_back(d.label);
  LinearConfig cfg;
  cfg.l2 = 1e6;
  const auto model = train_logistic(x, y, 3, v.dimension(), nullptr, cfg);
  for (double w : model.weights()) EXPECT_LT(std::abs(w), 1e-3);
  for (double p : model.predict_proba(x[0])) EXPECT_NEAR(p, 1.0 / 3.0, 1e-3);
}

TEST(LinearTest, HugePenaltyRegressionPredictsMean) {
  affect::Rng rng(5);
  std::vector<SparseVector> x;
  std::vector<std::vector<double>> y;
  double mean = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double v = rng.uniform(-1, 1);
    x.push_back(SparseVector::from_dense(std::vector<double>{v}));
    y.push_back({3.0 * v + 1.0});
    mean += y.back()[0];
  }
  mean /= 100.0;
  LinearConfig cfg;
  cfg.l2 = 1e6;
  cfg.learning_rate = 0.1;
  cfg.epochs = 200;
  cfg.batch_size = 100;
  const auto model = train_least_squares(x, y, 1, cfg);
  EXPECT_LT(std::abs(model.weight(0, 0)), 1e-3);
  EXPECT_NEAR(model.predict_scores(x[0])[0], mean, 1e-3);
}

TEST(LinearTest, RecoversSlopeOfExactLinearData) {
  affect::Rng rng(6);
  std::vector<SparseVector> x;
  std::vector<std::vector<double>> y;
  for (int i = 0; i < 200; ++i) {
    const double v = rng.uniform(-1, 1);
    x.push_back(SparseVector::from_dense(std::vector<double>{v}));
    y.push_back({2.0 * v});
  }
  LinearConfig cfg;
  cfg.epochs = 300;
  const auto model = train_least_squares(x, y, 1, cfg);
  EXPECT_NEAR(model.weight(0, 0), 2.0, 1e-3);
}

TEST(LinearTest, ZeroWeightsUniformAndSumToOne) {
  const LinearModel zero(LinearTask::kLogistic, 4, 3);
  const auto x = SparseVector::from_dense(std::vector<double>{0.3, 0.0, -1.0});
  for (double p : zero.predict_proba(x)) EXPECT_EQ(p, 0.25);
  const auto texts = affect::corpus::synthesize_texts({.num_classes = 3, .docs_per_class = 10}, 7);
  const auto lists = texts.token_lists();
  const auto v = TfidfVectorizer::fit(lists);
  const auto xs = v.transform_all(lists);
  std::vector<std::size_t> y;
  for (const auto& d : texts.documents) y.push_back(d.label);
  const auto model = train_logistic(xs, y, 3, v.dimension(), nullptr);
  for (const auto& row : xs) {
    double s = 0.0;
    for (double p : model.predict_proba(row)) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(LinearTest, DimensionMismatchIsError) {
  const LinearModel m(LinearTask::kLogistic, 2, 3);
  const auto x = SparseVector::from_dense(std::vector<double>{0, 0, 0, 1});
  EXPECT_THROW(m.decision(x), affect::ShapeError);
}

TEST(LinearTest, WeightedMatchesUnweightedOnBalancedData) {
  const auto texts = affect::corpus::synthesize_texts({.num_classes = 3, .docs_per_class = 12, .noise_rate = 0.8}, 8);
  const auto lists = texts.token_lists();
  const auto v = TfidfVectorizer::fit(lists);
  const auto x = v.transform_all(lists);
  std::vector<std::size_t> y;
  for (const auto& d : texts.documents) y.push_back(d.label);
  const auto w = affect::objective::class_weights(y, 3);
  const auto a = train_logistic(x, y, 3, v.dimension(), &w);
  const auto b = train_logistic(x, y, 3, v.dimension(), nullptr);
  for (const auto& row : x) EXPECT_EQ(a.predict_label(row), b.predict_label(row));
}

}  // namespace
