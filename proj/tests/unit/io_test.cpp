#include <gtest/gtest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "affect/io/archive.hpp"
#include "affect/io/report.hpp"
#include "affect/io/run_config.hpp"

namespace {

using namespace affect;

io::ModelArchive sample_archive(layers::TaskKind task, layers::Direction dir, bool trainable, std::uint64_t seed) {
  layers::NetworkConfig c;
  c.vocab_size = 7;
  c.embed_dim = 4;
  c.hidden = 3;
  c.direction = dir;
  c.task = task;
  c.outputs = task == layers::TaskKind::kClassification ? 3 : 2;
  c.trainable_embeddings = trainable;
  io::ModelArchive a;
  a.network = layers::AffectNetwork(c, seed);
  a.vocabulary = corpus::Vocabulary({"alpha", "beta", "gamma", "delta", "eps"});
  a.preprocess.stem = true;
  a.preprocess.max_sequence_length = std::nullopt;
  a.output_names = task == layers::TaskKind::kClassification ? std::vector<std::string>{"joy", "anger", "fear"}
                                                              : std::vector<std::string>{"valence", "arousal"};
  if (auto* h = std::get_if<layers::AffineHead>(&a.network.head())) {
    h->target_mean = {0.1, -3.7};
    h->target_std = {12.5, 0.3};
  }
  a.metrics = {{"weighted_f1", 0.123456789012345678}};
  return a;
}

void expect_same_parameters(const layers::AffectNetwork& a, const layers::AffectNetwork& b) {
  const auto pa = a.all_parameters();
  const auto pb = b.all_parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i]->name, pb[i]->name);
    EXPECT_EQ(pa[i]->value.shape(), pb[i]->value.shape());
    EXPECT_EQ(std::memcmp(pa[i]->value.data().data(), pb[i]->value.data().data(),
                          pa[i]->value.size() * sizeof(double)),
              0)
        << pa[i]->name;
  }
}

TEST(ArchiveTest, RoundTripIsBitExactForEveryVariant) {
  for (auto task : {layers::TaskKind::kClassification, layers::TaskKind::kRegression}) {
    for (auto dir : {layers::Direction::kUnidirectional, layers::Direction::kBidirectional}) {
      for (bool trainable : {true, false}) {
        const auto a = sample_archive(task, dir, trainable, 11);
        const auto b = io::deserialize(io::serialize(a));
        expect_same_parameters(a.network, b.network);
        EXPECT_EQ(b.vocabulary.tokens(), a.vocabulary.tokens());
        EXPECT_EQ(b.preprocess, a.preprocess);
        EXPECT_EQ(b.output_names, a.output_names);
        EXPECT_EQ(b.metrics, a.metrics);
        EXPECT_EQ(b.network.config().trainable_embeddings, trainable);
        const std::vector<std::size_t> ids = {2, 5, 1, 6};
        EXPECT_EQ(b.network.predict(ids), a.network.predict(ids));
        EXPECT_EQ(io::serialize(b), io::serialize(a));
      }
    }
  }
}

TEST(ArchiveTest, LayoutStartsWithMagicAndLengthPrefixedJson) {
  const auto bytes = io::serialize(sample_archive(layers::TaskKind::kClassification, layers::Direction::kBidirectional,
                                                  true, 1));
  ASSERT_GT(bytes.size(), 16u);
  EXPECT_EQ(bytes.substr(0, 8), "AFFECTV1");
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
  const auto meta = nlohmann::json::parse(bytes.substr(16, len));
  EXPECT_EQ(meta.at("architecture").at("hidden"), 3);
  EXPECT_EQ(meta.at("vocabulary").size(), 7u);
}

TEST(ArchiveTest, VersionMismatchAndCorruptionAreExplicit) {
  auto bytes = io::serialize(sample_archive(layers::TaskKind::kClassification, layers::Direction::kBidirectional,
                                            true, 1));
  auto v2 = bytes;
  v2[7] = '2';
  try {
    io::deserialize(v2);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("version mismatch"), std::string::npos);
  }
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(io::deserialize(bad), DataError);
  EXPECT_THROW(io::deserialize(bytes.substr(0, bytes.size() - 3)), DataError);
  EXPECT_THROW(io::deserialize(bytes + "x"), DataError);
  EXPECT_THROW(io::deserialize(""), DataError);
}

TEST(ArchiveTest, FileRoundTripAndEmptyTextMapsToUnknown) {
  const auto a = sample_archive(layers::TaskKind::kClassification, layers::Direction::kBidirectional, true, 3);
  const auto path = (std::filesystem::temp_directory_path() / "affect_io_test.affect").string();
  io::save_archive(a, path);
  const auto b = io::load_archive(path);
  expect_same_parameters(a.network, b.network);
  EXPECT_EQ(io::encode_text(b, "?!"), std::vector<std::size_t>{corpus::kUnknownIndex});
  EXPECT_EQ(io::encode_text(b, "Alpha zzz"), (std::vector<std::size_t>{2, corpus::kUnknownIndex}));
  std::filesystem::remove(path);
  EXPECT_THROW(io::load_archive(path), DataError);
}

constexpr const char* kConfig = R"(# sample
[data]
train = data.csv
embeddings = vectors.txt

[model]
hidden = 8
bidirectional = false

[train]
max_epochs = 5
learning_rate = 0.01
class_weighting = no
)";

TEST(RunConfigTest, ParsesSectionsAndDefaults) {
  const auto c = io::parse_run_config(kConfig);
  EXPECT_EQ(c.data.train, "data.csv");
  EXPECT_EQ(c.model.hidden, 8u);
  EXPECT_FALSE(c.model.bidirectional);
  EXPECT_EQ(c.train.max_epochs, 5u);
  EXPECT_DOUBLE_EQ(c.train.learning_rate, 0.01);
  EXPECT_FALSE(c.train.class_weighting);
  EXPECT_EQ(c.train.batch_size, 32u);
  EXPECT_EQ(c.train.patience, 1u);
  EXPECT_FALSE(c.transfer.has_value());
  EXPECT_EQ(c.train_config().adam.learning_rate, 0.01);
  EXPECT_EQ(c.network_config(10, 3).direction, layers::Direction::kUnidirectional);
}

TEST(RunConfigTest, RejectsUnknownAndDuplicateKeys) {
  auto expect_error = [](const std::string& text, const std::string& fragment) {
    try {
      io::parse_run_config(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  expect_error("[data]\ntrain = a\ntrian = b\n", "unknown key 'trian'");
  expect_error("[data]\ntrain = a\ntrain = b\n", "duplicate key 'train'");
  expect_error("[data]\ntrain = a\n[data]\n", "duplicate section");
  expect_error("[data]\ntrain = a\n[optim]\n", "unknown section");
  expect_error("train = a\n", "outside any section");
  expect_error("[data]\ntrain = a\n[train]\nmax_epochs = ten\n", "invalid number");
  expect_error("[data]\ntrain = a\n[train]\nbatch_size = -4\n", "non-negative");
  expect_error("[data]\ntrain = a\n[train]\nearly_stopping = maybe\n", "invalid boolean");
  expect_error("[model]\nhidden = 3\n", "train is required");
  expect_error("[data]\ntrain = a\n[model]\nrecurrent_dropout = 1\n", "dropout");
  expect_error("[data]\ntrain = a\n[transfer]\nscope = partial\nsource = s\n", "scope");
  expect_error("[data]\ntrain = a\ntask = regression\n", "dimensions");
  expect_error("[data]\ntrain = a\ntask = regression\ndimensions = v:3:1\n", "invalid");
  expect_error("[data\ntrain = a\n", "malformed section");
  expect_error("[data]\ntrain\n", "expected key = value");
}

TEST(RunConfigTest, EchoIsClosedUnderReparsing) {
  auto c = io::parse_run_config(std::string(kConfig) +
                                "[transfer]\nsource = s.csv\nscope = head_only\nthreshold = 0.85\n");
  c.data.labels = {"joy", "anger"};
  const auto echo = io::echo_run_config(c);
  const auto again = io::parse_run_config(echo);
  EXPECT_EQ(io::echo_run_config(again), echo);
  EXPECT_EQ(again.data.labels, c.data.labels);
  EXPECT_EQ(again.transfer->scope, "head_only");
  EXPECT_EQ(again.train_config().scope, training::FineTuneScope::kHeadOnly);
  EXPECT_EQ(io::run_config_json(again), io::run_config_json(c));

  auto r = io::parse_run_config("[data]\ntrain = a\ntask = regression\ndimensions = valence:-100:100, arousal:0:1.5\n");
  ASSERT_EQ(r.data.dimensions.size(), 2u);
  EXPECT_EQ(r.data.dimensions[0].lo, -100.0);
  EXPECT_EQ(io::parse_run_config(io::echo_run_config(r)).data.dimensions, r.data.dimensions);
}

TEST(RunConfigTest, RelativePathsResolveAgainstTheConfigFile) {
  const auto dir = std::filesystem::temp_directory_path() / "affect_cfg_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "run.ini").string();
  io::write_text_file(path, "[data]\ntrain = sub/data.csv\nembeddings = /abs/vec.txt\n");
  const auto c = io::load_run_config(path);
  EXPECT_EQ(c.data.train, (dir / "sub/data.csv").string());
  EXPECT_EQ(c.data.embeddings, "/abs/vec.txt");
  std::filesystem::remove_all(dir);
  EXPECT_THROW(io::load_run_config(path), ConfigError);
}

io::ComparisonTable sample_table() {
  auto t = io::classification_table("demo");
  t.rows.push_back({"linear baseline", 10, {{"weighted_f1", {0.5, 0.01}}, {"accuracy", {0.6, 0.0}}}});
  t.rows.push_back({"BiLSTM", 10, {{"weighted_f1", {0.6, 0.02}}, {"accuracy", {0.7, 0.0}}}});
  return t;
}

TEST(ReportTableTest, RelativeChangeAgainstLinearBaseline) {
  const auto t = sample_table();
  EXPECT_NEAR(*t.relative_change(t.rows[1]), 20.0, 1e-9);
  EXPECT_EQ(*t.relative_change(t.rows[0]), 0.0);
  auto r = io::regression_table("mse", {"valence"});
  r.rows.push_back({"linear baseline", 1, {{"mean_mse", {2.0, 0.0}}}});
  r.rows.push_back({"LSTM", 1, {{"mean_mse", {1.5, 0.0}}}});
  EXPECT_NEAR(*r.relative_change(r.rows[1]), 25.0, 1e-12);
  auto none = io::classification_table("no baseline");
  none.rows.push_back({"BiLSTM", 1, {{"weighted_f1", {0.6, 0.0}}}});
  EXPECT_FALSE(none.relative_change(none.rows[0]).has_value());
}

TEST(ReportTableTest, TextAndCsvTwinAgree) {
  const auto t = sample_table();
  const auto text = io::render_text(t);
  EXPECT_NE(text.find("linear baseline"), std::string::npos);
  EXPECT_NE(text.find("+20.00"), std::string::npos);
  EXPECT_NE(text.find("0.6000 +/- 0.0200"), std::string::npos);
  EXPECT_EQ(text.find("SVM"), std::string::npos);
  EXPECT_EQ(text.find("RF"), std::string::npos);
  const auto csv = corpus::parse_csv(io::render_csv(t));
  ASSERT_EQ(csv.size(), 3u);
  EXPECT_EQ(csv[0].fields.front(), "model");
  EXPECT_EQ(csv[0].fields.back(), "rel_change_pct");
  EXPECT_EQ(csv[2].fields[0], "BiLSTM");
  EXPECT_NEAR(std::stod(csv[2].fields.back()), 20.0, 1e-9);
  EXPECT_EQ(csv[1].fields[2], "0.5");
}

TEST(ReportTableTest, ExternalPredictionsParse) {
  const auto path = (std::filesystem::temp_directory_path() / "affect_ext.csv").string();
  io::write_text_file(path, "doc_id,predicted_label\n1,joy\n0,anger\n");
  const auto rows = io::load_external_predictions(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows.at(0)[0], "anger");
  io::write_text_file(path, "doc_id,predicted_label\n1,joy\n1,anger\n");
  EXPECT_THROW(io::load_external_predictions(path), DataError);
  io::write_text_file(path, "id,predicted_label\n1,joy\n");
  EXPECT_THROW(io::load_external_predictions(path), DataError);
  io::write_text_file(path, "doc_id,predicted_label\nx,joy\n");
  EXPECT_THROW(io::load_external_predictions(path), DataError);
  std::filesystem::remove(path);
}

TEST(ReportTableTest, RunsCsvHasOneRowPerRun) {
  std::vector<io::RunRecord> runs = {{7, 3, 2, 0.25, {{"accuracy", 1.0}, {"weighted_f1", 0.5}}}};
  const auto csv = corpus::parse_csv(io::render_runs_csv(runs));
  ASSERT_EQ(csv.size(), 2u);
  EXPECT_EQ(csv[0].fields, (std::vector<std::string>{"run", "seed", "epochs", "best_epoch", "best_val_loss", "accuracy",
                                                     "weighted_f1"}));
  EXPECT_EQ(csv[1].fields[1], "7");
}

}  // namespace
