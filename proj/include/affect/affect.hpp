#pragma once

#include "affect/baseline/linear.hpp"
#include "affect/baseline/tfidf.hpp"
#include "affect/corpus/csv.hpp"
#include "affect/corpus/dataset.hpp"
#include "affect/corpus/text.hpp"
#include "affect/corpus/vocabulary.hpp"
#include "affect/error.hpp"
#include "affect/io/archive.hpp"
#include "affect/io/report.hpp"
#include "affect/io/run_config.hpp"
#include "affect/layers/embedding.hpp"
#include "affect/layers/heads.hpp"
#include "affect/layers/lstm.hpp"
#include "affect/layers/network.hpp"
#include "affect/metrics.hpp"
#include "affect/numerics/grad_check.hpp"
#include "affect/numerics/tape.hpp"
#include "affect/numerics/tensor.hpp"
#include "affect/objective.hpp"
#include "affect/pipeline.hpp"
#include "affect/rng.hpp"
#include "affect/training/adam.hpp"
#include "affect/training/multirun.hpp"
#include "affect/training/trainer.hpp"
#include "affect/transfer.hpp"
