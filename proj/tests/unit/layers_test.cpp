#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <unistd.h>

#include "affect/corpus/vocabulary.hpp"
#include "affect/layers/network.hpp"
#include "affect/numerics/grad_check.hpp"
#include "affect/objective.hpp"

namespace {

using namespace affect::layers;
using affect::Rng;
using affect::numerics::grad_check_detailed;

NetworkConfig small_config(Direction dir, TaskKind task, std::size_t outputs) {
  NetworkConfig c;
  c.vocab_size = 12;
  c.embed_dim = 5;
  c.hidden = 4;
  c.direction = dir;
  c.task = task;
  c.outputs = outputs;
  c.dropout = {0.0, 0.0};
  return c;
}

std::vector<std::size_t> random_ids(Rng& rng, std::size_t vocab, std::size_t max_len) {
  std::vector<std::size_t> ids(1 + rng.index(max_len));
  for (auto& i : ids) i = rng.index(vocab);
  return ids;
}

// Redraws every weight from uniform(-1, 1), keeping the pad row zero. The default
// +-0.05 embedding init makes some recurrent gradients ~1e-8, below what central
// differences at h = 1e-5 resolve.
void randomize(AffectNetwork& net, Rng& rng) {
  for (auto* p : net.all_parameters())
    for (auto& v : p->value.data()) v = rng.uniform(-1, 1);
  auto pad = net.embedding().table.value.row_span(affect::corpus::kPadIndex);
  std::fill(pad.begin(), pad.end(), 0.0);
}

TEST(EmbeddingTest, PadRowIsZeroAndGetsNoGradient) {
  Rng rng(1);
  auto layer = EmbeddingLayer::random(6, 3, rng);
  for (double v : layer.table.value.row_span(0)) EXPECT_EQ(v, 0.0);
  Tape tape;
  const std::vector<std::size_t> ids = {0, 2, 2, 5};
  const auto e = layer.embed(tape, ids);
  for (double v : tape.value(e[0]).data()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(tape.value(e[1]), tape.value(e[2]));
  Var total = tape.sum(e[0]);
  for (std::size_t i = 1; i < e.size(); ++i) total = tape.add(total, tape.sum(e[i]));
  tape.backward(total);
  for (double g : layer.table.grad.row_span(0)) EXPECT_EQ(g, 0.0);
  for (double g : layer.table.grad.row_span(2)) EXPECT_EQ(g, 2.0);
}

TEST(EmbeddingTest, LookupEqualsOneHotProduct) {
  Rng rng(2);
  auto layer = EmbeddingLayer::random(6, 3, rng);
  Tape tape(false);
  Tensor onehot({1, 6});
  onehot[4] = 1.0;
  const std::vector<std::size_t> ids = {4};
  const Tensor looked_up = tape.value(layer.embed(tape, ids)[0]);
  const Tensor product = tape.value(tape.matmul(tape.constant(onehot), tape.constant(layer.table.value)));
  EXPECT_EQ(looked_up, product);
}

TEST(EmbeddingTest, OutOfRangeIndex) {
  Rng rng(3);
  auto layer = EmbeddingLayer::random(4, 2, rng);
  Tape tape;
  const std::vector<std::size_t> ids = {4};
  EXPECT_THROW(layer.embed(tape, ids), affect::ShapeError);
}

TEST(LstmTest, ZeroParametersClosedForm) {
  LstmParams p;
  Rng rng(4);
  p = LstmParams::init("zero", 3, 2, rng);
  for (auto* q : p.parameters()) q->value.fill(0.0);
  Tape tape(false);
  Var e = tape.constant(Tensor::row({0.3, -0.2, 0.9}));
  auto s0 = initial_state(tape, 2);
  auto s1 = lstm_step(tape, p, e, s0);
  for (double v : tape.value(s1.h).data()) EXPECT_EQ(v, 0.0);
  for (double v : tape.value(s1.c).data()) EXPECT_EQ(v, 0.0);

  LstmState ones{tape.constant(Tensor({1, 2})), tape.constant(Tensor({1, 2}, 1.0)), 0};
  auto s2 = lstm_step(tape, p, e, ones);
  for (double v : tape.value(s2.c).data()) EXPECT_DOUBLE_EQ(v, 0.5);
  for (double v : tape.value(s2.h).data()) EXPECT_NEAR(v, 0.5 * std::tanh(0.5), 1e-15);
  EXPECT_NEAR(tape.value(s2.h)[0], 0.2311, 1e-4);
  EXPECT_EQ(s2.step, 1u);
}

TEST(LstmTest, ForgetBiasIsOne) {
  Rng rng(5);
  const auto p = LstmParams::init("x", 3, 4, rng);
  for (double b : p.biases[kForgetGate].value.data()) EXPECT_EQ(b, 1.0);
  for (double b : p.biases[kInputGate].value.data()) EXPECT_EQ(b, 0.0);
  for (std::size_t g = 0; g < 4; ++g) {
    EXPECT_EQ(p.input_weights[g].value.shape(), (affect::numerics::Shape{3, 4}));
    EXPECT_EQ(p.recurrent_weights[g].value.shape(), (affect::numerics::Shape{4, 4}));
  }
}

TEST(LstmTest, StepGradientsMatchFiniteDifferences) {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = LstmParams::init("cell", 3, 4, rng);
    for (auto* q : p.parameters())
      for (auto& v : q->value.data()) v = rng.uniform(-1, 1);
    const Tensor e = Tensor::row({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    Tensor h0({1, 4}), c0({1, 4}), w({1, 4});
    for (auto& v : h0.data()) v = rng.uniform(-0.9, 0.9);
    for (auto& v : c0.data()) v = rng.uniform(-1, 1);
    for (auto& v : w.data()) v = rng.uniform(0.5, 1.0);
    auto build = [&](Tape& t) {
      LstmState prev{t.constant(h0), t.constant(c0), 0};
      auto s = lstm_step(t, p, t.constant(e), prev);
      return t.add(t.sum(t.hadamard(s.h, t.constant(w))), t.sum(s.c));
    };
    auto params = p.parameters();
    const auto r = grad_check_detailed(build, params);
    EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter << "[" << r.worst_index << "]";
  }
}

TEST(LstmTest, HiddenStaysInOpenUnitInterval) {
  Rng rng(7);
  auto p = LstmParams::init("cell", 2, 3, rng);
  for (auto* q : p.parameters())
    for (auto& v : q->value.data()) v *= 5.0;
  Tape tape(false);
  std::vector<Var> xs;
  for (int i = 0; i < 30; ++i) xs.push_back(tape.constant(Tensor::row({rng.uniform(-3, 3), rng.uniform(-3, 3)})));
  LstmState s = initial_state(tape, 3);
  for (Var x : xs) {
    s = lstm_step(tape, p, x, s);
    for (double v : tape.value(s.h).data()) EXPECT_LT(std::abs(v), 1.0);
  }
}

// Full pipelines: embed -> LSTM -> softmax -> weighted CE, embed -> BiLSTM -> affine -> MSE.
TEST(NetworkTest, FullForwardGradients) {
  Rng rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    const bool classify = trial % 2 == 0;
    auto cfg = classify ? small_config(Direction::kUnidirectional, TaskKind::kClassification, 3)
                        : small_config(Direction::kBidirectional, TaskKind::kRegression, 2);
    AffectNetwork net(cfg, 100 + trial);
    randomize(net, rng);
    const auto ids = random_ids(rng, cfg.vocab_size, 6);
    const std::vector<std::size_t> labels = {0, 1, 1, 2};
    const auto weights = affect::objective::class_weights(labels, 3);
    const std::size_t y = rng.index(3);
    const std::vector<double> target = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    auto build = [&](Tape& t) {
      Var out = net.forward(t, ids, Mode::kEval);
      return classify ? affect::objective::weighted_ce(t, out, y, weights)
                      : affect::objective::mse_loss(t, out, target);
    };
    auto params = net.parameters();
    const auto r = grad_check_detailed(build, params);
    EXPECT_LT(r.max_relative_error, 1e-4) << r.worst_parameter << "[" << r.worst_index << "] analytic "
                                          << r.analytic << " numeric " << r.numeric;
  }
}

TEST(NetworkTest, EncodingSizes) {
  AffectNetwork bi(small_config(Direction::kBidirectional, TaskKind::kClassification, 3), 1);
  AffectNetwork uni(small_config(Direction::kUnidirectional, TaskKind::kClassification, 3), 1);
  const std::vector<std::size_t> ids = {2, 3, 4};
  EXPECT_EQ(bi.encoding(ids).size(), 8u);
  EXPECT_EQ(uni.encoding(ids).size(), 4u);
  EXPECT_EQ(bi.predict(ids).size(), 3u);
  EXPECT_THROW(bi.encoding(std::vector<std::size_t>{}), affect::Error);
}

TEST(NetworkTest, BackwardPassEqualsForwardOverReversedInput) {
  AffectNetwork net(small_config(Direction::kBidirectional, TaskKind::kClassification, 3), 2);
  const std::vector<std::size_t> ids = {2, 7, 3, 9, 4};
  const std::vector<std::size_t> rev(ids.rbegin(), ids.rend());
  Tape tape(false);
  const auto inputs = net.embedding().embed(tape, rev);
  const auto h = tape.value(run_lstm(tape, *net.backward_lstm(), inputs).h);
  const auto enc = net.encoding(ids);
  EXPECT_TRUE(std::equal(h.data().begin(), h.data().end(), enc.begin() + 4));
}

TEST(NetworkTest, SwappingDirectionsPermutesHalves) {
  AffectNetwork net(small_config(Direction::kBidirectional, TaskKind::kClassification, 3), 3);
  const std::vector<std::size_t> ids = {2, 7, 3, 9, 4, 4};
  const std::vector<std::size_t> rev(ids.rbegin(), ids.rend());
  const auto before = net.encoding(ids);
  std::swap(net.forward_lstm(), *net.backward_lstm());
  const auto after = net.encoding(rev);
  EXPECT_TRUE(std::equal(before.begin(), before.begin() + 4, after.begin() + 4));
  EXPECT_TRUE(std::equal(before.begin() + 4, before.end(), after.begin()));
}

TEST(NetworkTest, EvalModeIsDeterministic) {
  auto cfg = small_config(Direction::kBidirectional, TaskKind::kClassification, 3);
  cfg.dropout = {0.5, 0.5};
  AffectNetwork net(cfg, 4);
  const std::vector<std::size_t> ids = {2, 3, 4, 5};
  EXPECT_EQ(net.predict(ids), net.predict(ids));
  EXPECT_EQ(net.encoding(ids), net.encoding(ids));
  Tape tape;
  EXPECT_THROW(net.forward(tape, ids, Mode::kTrain), affect::Error);
}

TEST(NetworkTest, RecurrentMaskHasUnitMean) {
  Rng rng(10);
  for (double rate : {0.1, 0.5, 0.8}) {
    double sum = 0.0;
    const std::size_t n = 20000;
    for (std::size_t i = 0; i < n / 10; ++i) {
      const auto m = dropout_mask(10, rate, rng);
      for (double v : m.data()) {
        EXPECT_TRUE(v == 0.0 || std::abs(v - 1.0 / (1.0 - rate)) < 1e-15);
        sum += v;
      }
    }
    const double se = std::sqrt(rate / (1.0 - rate) / static_cast<double>(n));
    EXPECT_NEAR(sum / static_cast<double>(n), 1.0, 4 * se);
  }
}

TEST(HeadTest, ZeroWeightsGiveUniform) {
  AffectNetwork net(small_config(Direction::kUnidirectional, TaskKind::kClassification, 4), 5);
  for (auto* p : net.head_parameters()) p->value.fill(0.0);
  for (double p : net.predict(std::vector<std::size_t>{2, 3})) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(HeadTest, SoftmaxExamplesAndShiftInvariance) {
  const std::vector<double> logits = {0.0, std::log(2.0), std::log(3.0)};
  const auto p = softmax(logits);
  EXPECT_NEAR(p[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[2], 0.5, 1e-15);
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(1 + rng.index(8));
    for (auto& v : x) v = rng.uniform(-50, 50);
    const double shift = rng.uniform(-100, 100);
    std::vector<double> y = x;
    for (auto& v : y) v += shift;
    const auto px = softmax(x);
    const auto py = softmax(y);
    double sum = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      sum += px[k];
      EXPECT_NEAR(px[k], py[k], 1e-12);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(HeadTest, ReplaceHeadKeepsEncoder) {
  AffectNetwork net(small_config(Direction::kBidirectional, TaskKind::kClassification, 2), 6);
  std::vector<Tensor> before;
  for (auto* p : net.encoder_parameters()) before.push_back(p->value);
  net.replace_head(TaskKind::kRegression, 3, 99);
  EXPECT_TRUE(std::holds_alternative<AffineHead>(net.head()));
  EXPECT_EQ(net.predict(std::vector<std::size_t>{2}).size(), 3u);
  std::size_t i = 0;
  for (auto* p : net.encoder_parameters()) EXPECT_EQ(p->value, before[i++]);
  const auto head_a = std::get<AffineHead>(net.head()).alpha.value;
  net.replace_head(TaskKind::kRegression, 3, 99);
  EXPECT_EQ(std::get<AffineHead>(net.head()).alpha.value, head_a);
}

TEST(PretrainedTest, LoadsVectorsAndCoverage) {
  const auto path = std::filesystem::temp_directory_path() / ("affect_emb_" + std::to_string(::getpid()) + ".txt");
  std::ofstream(path) << "the 0.1 0.2\nzzz 1 2\n";
  const std::vector<std::vector<std::string>> docs = {{"the", "cat"}};
  const auto vocab = affect::corpus::build_vocabulary(docs);
  const auto emb = load_pretrained_embeddings(path.string(), vocab, 1);
  EXPECT_EQ(emb.layer.dim(), 2u);
  const auto row = emb.layer.table.value.row_span(vocab.index("the"));
  EXPECT_EQ(row[0], 0.1);
  EXPECT_EQ(row[1], 0.2);
  for (double v : emb.layer.table.value.row_span(vocab.index("cat"))) EXPECT_LT(std::abs(v), 0.05);
  EXPECT_DOUBLE_EQ(emb.coverage, 0.5);
  EXPECT_TRUE(emb.warnings.empty());

  std::ofstream(path) << "dog 0.1 0.2\n";
  const auto none = load_pretrained_embeddings(path.string(), vocab, 1);
  EXPECT_EQ(none.coverage, 0.0);
  EXPECT_EQ(none.warnings.size(), 1u);

  std::ofstream(path) << "the 0.1 0.2\ncat 0.3\n";
  try {
    load_pretrained_embeddings(path.string(), vocab, 1);
    FAIL();
  } catch (const affect::DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  std::ofstream(path) << "the 0.1 abc\n";
  EXPECT_THROW(load_pretrained_embeddings(path.string(), vocab, 1), affect::DataError);
  std::filesystem::remove(path);
}

}  // namespace
