#include <gtest/gtest.h>

#include <vector>

#include "affect/transfer.hpp"

namespace {

using namespace affect;
using layers::TaskKind;

struct Pair {
  corpus::Vocabulary vocab;
  corpus::LabeledCorpus source;
  corpus::LabeledCorpus target;
};

Pair make_pair(std::uint64_t seed) {
  const auto st = corpus::synthesize_texts({.num_classes = 2, .docs_per_class = 20}, seed);
  const auto tt = corpus::synthesize_texts({.num_classes = 3, .docs_per_class = 8}, seed + 1);
  auto vocab = transfer::shared_vocabulary(st, tt);
  return {vocab, corpus::encode_corpus(st, vocab), corpus::encode_corpus(tt, vocab)};
}

layers::NetworkConfig net_config(std::size_t vocab) {
  layers::NetworkConfig c;
  c.vocab_size = vocab;
  c.embed_dim = 6;
  c.hidden = 5;
  return c;
}

training::TrainConfig quick() {
  training::TrainConfig c;
  c.max_epochs = 2;
  c.batch_size = 8;
  c.validation_fraction = 0.2;
  return c;
}

std::vector<numerics::Tensor> encoder_values(layers::AffectNetwork& net) {
  std::vector<numerics::Tensor> out;
  for (auto* p : net.encoder_parameters()) out.push_back(p->value);
  return out;
}

TEST(TransferTest, SharedVocabularyCoversBothCorpora) {
  const auto st = corpus::synthesize_texts({.num_classes = 2, .docs_per_class = 3}, 1);
  auto spec = corpus::SyntheticSpec{.num_classes = 2, .docs_per_class = 3};
  spec.marker_offset = 5;
  const auto tt = corpus::synthesize_texts(spec, 2);
  const auto v = transfer::shared_vocabulary(st, tt);
  EXPECT_TRUE(v.contains(corpus::marker_token(0)));
  EXPECT_TRUE(v.contains(corpus::marker_token(6)));
}

TEST(TransferTest, PretrainRequiresBinarySource) {
  auto p = make_pair(1);
  auto cfg = net_config(p.vocab.size());
  cfg.outputs = 3;
  layers::AffectNetwork net(cfg, 1);
  EXPECT_THROW(transfer::pretrain(net, p.target, quick()), ConfigError);
}

TEST(TransferTest, SwapHeadPreservesEncoderAndIsDeterministic) {
  auto p = make_pair(2);
  layers::AffectNetwork m(net_config(p.vocab.size()), 2);
  transfer::pretrain(m, p.source, quick());
  auto a = transfer::swap_head(m, TaskKind::kClassification, 3, 7);
  auto b = transfer::swap_head(m, TaskKind::kClassification, 3, 7);
  EXPECT_EQ(encoder_values(a), encoder_values(m));
  EXPECT_EQ(a.config().outputs, 3u);
  EXPECT_EQ(a.head_parameters()[0]->value, b.head_parameters()[0]->value);
  auto r = transfer::swap_head(m, TaskKind::kRegression, 2, 7);
  EXPECT_TRUE(std::holds_alternative<layers::AffineHead>(r.head()));
}

TEST(TransferTest, HeadOnlyUpdatesExactlyTheHead) {
  auto p = make_pair(3);
  layers::AffectNetwork m(net_config(p.vocab.size()), 3);
  transfer::pretrain(m, p.source, quick());
  auto t = transfer::swap_head(m, TaskKind::kClassification, 3, 3);
  const auto enc_before = encoder_values(t);
  std::vector<numerics::Tensor> head_before;
  for (auto* q : t.head_parameters()) head_before.push_back(q->value);
  transfer::fine_tune(t, p.target, quick(), training::FineTuneScope::kHeadOnly);
  EXPECT_EQ(encoder_values(t), enc_before);
  std::size_t i = 0;
  for (auto* q : t.head_parameters()) EXPECT_NE(q->value, head_before[i++]) << q->name;
}

TEST(TransferTest, FullScopeMovesRecurrentWeights) {
  auto p = make_pair(4);
  layers::AffectNetwork m(net_config(p.vocab.size()), 4);
  transfer::pretrain(m, p.source, quick());
  auto t = transfer::swap_head(m, TaskKind::kClassification, 3, 4);
  const auto before = t.forward_lstm().recurrent_weights[0].value;
  auto cfg = quick();
  cfg.restore_best = false;
  transfer::fine_tune(t, p.target, cfg, training::FineTuneScope::kFull);
  double max_delta = 0.0;
  const auto& after = t.forward_lstm().recurrent_weights[0].value;
  for (std::size_t i = 0; i < before.size(); ++i) max_delta = std::max(max_delta, std::abs(after[i] - before[i]));
  EXPECT_GT(max_delta, 0.0);
}

TEST(TransferTest, PretrainDeterministic) {
  auto p = make_pair(5);
  auto run = [&] {
    layers::AffectNetwork m(net_config(p.vocab.size()), 5);
    transfer::pretrain(m, p.source, quick());
    return m.predict(p.source[0].ids);
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
