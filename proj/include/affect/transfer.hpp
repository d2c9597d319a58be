#pragma once

#include <cstdint>
#include <iterator>
#include <limits>
#include <vector>

#include "affect/corpus/dataset.hpp"
#include "affect/layers/network.hpp"
#include "affect/training/trainer.hpp"

namespace affect::transfer {

using corpus::LabeledCorpus;
using corpus::ScoredCorpus;
using layers::AffectNetwork;
using layers::TaskKind;
using training::FineTuneScope;
using training::TrainConfig;
using training::TrainResult;

/// One vocabulary over source and target token lists, so both tasks share index space.
template <class SourceTexts, class TargetTexts>
corpus::Vocabulary shared_vocabulary(const SourceTexts& source, const TargetTexts& target, std::size_t min_count = 1,
                                     std::size_t max_size = std::numeric_limits<std::size_t>::max()) {
  auto lists = source.token_lists();
  auto more = target.token_lists();
  lists.insert(lists.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  return corpus::build_vocabulary(lists, min_count, max_size);
}

/// Trains `net` on the binary sentiment source task.
inline TrainResult pretrain(AffectNetwork& net, const LabeledCorpus& source, const TrainConfig& config) {
  if (source.num_classes() != 2) {
    throw ConfigError("pretrain: source task must be binary sentiment, got K=" + std::to_string(source.num_classes()));
  }
  TrainConfig cfg = config;
  cfg.scope = FineTuneScope::kFull;
  return training::train(net, source, cfg);
}

/// Copy of `net` whose prediction head is freshly initialized for the target task.
/// Embedding and recurrent parameters are copied unchanged.
inline AffectNetwork swap_head(const AffectNetwork& net, TaskKind task, std::size_t outputs, std::uint64_t seed) {
  AffectNetwork out = net;
  out.replace_head(task, outputs, seed);
  return out;
}

template <class Corpus>
TrainResult fine_tune(AffectNetwork& net, const Corpus& target, const TrainConfig& config,
                      FineTuneScope scope = FineTuneScope::kFull) {
  TrainConfig cfg = config;
  cfg.scope = scope;
  return training::train(net, target, cfg);
}

template <class Corpus>
TrainResult fine_tune(AffectNetwork& net, const Corpus& target, const Corpus& validation, const TrainConfig& config,
                      FineTuneScope scope = FineTuneScope::kFull) {
  TrainConfig cfg = config;
  cfg.scope = scope;
  return training::train(net, target, validation, cfg);
}

}  // namespace affect::transfer
