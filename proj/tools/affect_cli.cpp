#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "affect/affect.hpp"

namespace {

using namespace affect;

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitTraining = 3;

struct SynthOptions {
  std::string out;
  std::size_t classes = 4;
  std::size_t docs_per_class = 50;
  std::size_t vocab_size = 20;
  double noise = 0.5;
  std::size_t doc_length = 8;
  std::size_t embed_dim = 16;
  std::size_t source_docs_per_class = 0;
  std::uint64_t seed = 1;
};

std::string texts_csv(const corpus::LabeledTexts& texts) {
  std::ostringstream out;
  out << "text,label\n";
  for (const auto& d : texts.documents) {
    out << corpus::csv_escape(d.text) << "," << corpus::csv_escape(texts.class_names[d.label]) << "\n";
  }
  return out.str();
}

// Synthetic marker corpus, matching word vectors, downstream labels and a sample config.
void run_synth(const SynthOptions& o) {
  if (o.classes < 2) throw ConfigError("--classes must be at least 2");
  std::filesystem::create_directories(o.out);
  const std::string dir = std::filesystem::absolute(o.out).lexically_normal().string();
  const corpus::SyntheticSpec spec{.num_classes = o.classes,
                                   .docs_per_class = o.docs_per_class,
                                   .vocab_size = o.vocab_size,
                                   .noise_rate = o.noise,
                                   .doc_length = o.doc_length};
  const auto texts = corpus::synthesize_texts(spec, o.seed);
  io::write_text_file(o.out + "/train.csv", texts_csv(texts));

  Rng rng(stream_seed(o.seed, "embeddings"));
  std::ostringstream emb;
  auto vector_line = [&](const std::string& token) {
    emb << token;
    for (std::size_t j = 0; j < o.embed_dim; ++j) emb << " " << io::detail::exact(rng.uniform(-1.0, 1.0));
    emb << "\n";
  };
  for (std::size_t k = 0; k < o.classes; ++k) vector_line(corpus::marker_token(k));
  for (std::size_t v = 0; v < o.vocab_size; ++v) vector_line(corpus::noise_token(v));
  io::write_text_file(o.out + "/embeddings.txt", emb.str());

  std::ostringstream labels;
  labels << "doc_id,label\n";
  for (std::size_t i = 0; i < texts.size(); ++i) {
    labels << i << "," << (texts.documents[i].label < o.classes / 2 ? "factual" : "nonfactual") << "\n";
  }
  io::write_text_file(o.out + "/downstream_labels.csv", labels.str());

  io::RunConfig cfg;
  cfg.data.train = dir + "/train.csv";
  cfg.data.embeddings = dir + "/embeddings.txt";
  cfg.model.embed_dim = o.embed_dim;
  cfg.model.hidden = 16;
  cfg.train.max_epochs = 30;
  cfg.train.batch_size = 8;
  cfg.train.validation_fraction = 0.2;
  cfg.train.patience = 3;
  cfg.train.learning_rate = 0.01;
  if (o.source_docs_per_class > 0) {
    auto source_spec = spec;
    source_spec.num_classes = 2;
    source_spec.docs_per_class = o.source_docs_per_class;
    auto source = corpus::synthesize_texts(source_spec, stream_seed(o.seed, "source"));
    source.class_names = {"negative", "positive"};
    io::write_text_file(o.out + "/source.csv", texts_csv(source));
    cfg.transfer.emplace();
    cfg.transfer->source = dir + "/source.csv";
  }
  cfg.validate();
  io::write_text_file(o.out + "/config.ini", io::echo_run_config(cfg));
  std::cout << "wrote " << texts.size() << " documents, " << o.classes + o.vocab_size << " word vectors and "
            << o.out << "/config.ini\n";
}

std::vector<pipeline::InputDocument> inputs(const std::optional<std::string>& text,
                                            const std::optional<std::string>& file, const io::ModelArchive& a) {
  if (text && file) throw ConfigError("give --text or --file, not both");
  if (text) return {{"0", *text}};
  if (!file) throw ConfigError("one of --text or --file is required");
  return pipeline::read_documents(*file, pipeline::archived_config(a).data.text_column);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emotion recognition with recurrent networks, transfer learning and tf-idf baselines"};
  app.require_subcommand(1);

  std::string config_path, out_dir, model_path, data_path, features_path, labels_path;
  std::size_t runs = 10;
  std::optional<std::string> text, file;
  double split_ratio = 0.8;
  std::uint64_t seed = 1;
  SynthOptions synth;

  auto* train = app.add_subcommand("train", "Train over several seeded runs and write archive, metrics and report");
  train->add_option("--config", config_path, "Run configuration file")->required();
  train->add_option("--out", out_dir, "Output directory")->required();
  train->add_option("--runs", runs, "Number of independent runs")->capture_default_str();

  auto* transfer = app.add_subcommand("transfer", "Pretrain on sentiment, swap the head, fine-tune on the target");
  transfer->add_option("--config", config_path, "Run configuration file with a [transfer] section")->required();
  transfer->add_option("--out", out_dir, "Output directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score an archived model on a labeled dataset");
  evaluate->add_option("--model", model_path, "Model archive")->required();
  evaluate->add_option("--data", data_path, "Dataset CSV in the training schema")->required();

  auto* predict = app.add_subcommand("predict", "Predict label and probabilities (or scores) for raw text");
  predict->add_option("--model", model_path, "Model archive")->required();
  predict->add_option("--text", text, "A single document");
  predict->add_option("--file", file, "One document per line, or a CSV with a text column");

  auto* features = app.add_subcommand("affect-features", "Write per-document class probabilities as features");
  features->add_option("--model", model_path, "Classification model archive")->required();
  features->add_option("--file", file, "One document per line, or a CSV with a text column")->required();
  features->add_option("--out", out_dir, "Output features CSV")->required();

  auto* downstream = app.add_subcommand("downstream", "Logistic regression on affect features");
  downstream->add_option("--features", features_path, "Features CSV (doc_id,p_0,...)")->required();
  downstream->add_option("--labels", labels_path, "Labels CSV (doc_id,label)")->required();
  downstream->add_option("--model", model_path, "Archive whose K the features must match");
  downstream->add_option("--split", split_ratio, "Training fraction")->capture_default_str();
  downstream->add_option("--seed", seed, "Split and training seed")->capture_default_str();

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic marker corpus, word vectors and sample config");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--classes", synth.classes)->capture_default_str();
  synth_cmd->add_option("--docs-per-class", synth.docs_per_class)->capture_default_str();
  synth_cmd->add_option("--vocab-size", synth.vocab_size, "Distinct noise tokens")->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "Noise token probability")->capture_default_str();
  synth_cmd->add_option("--doc-length", synth.doc_length)->capture_default_str();
  synth_cmd->add_option("--embed-dim", synth.embed_dim)->capture_default_str();
  synth_cmd->add_option("--source-docs-per-class", synth.source_docs_per_class,
                        "Also write a binary sentiment source corpus")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) {
      pipeline::run_train(io::load_run_config(config_path), out_dir, runs, std::cout, std::cerr);
    } else if (*transfer) {
      pipeline::run_transfer(io::load_run_config(config_path), out_dir, std::cout, std::cerr);
    } else if (*evaluate) {
      std::cout << pipeline::run_evaluate(io::load_archive(model_path), data_path);
    } else if (*predict) {
      const auto a = io::load_archive(model_path);
      std::cout << pipeline::run_predict(a, inputs(text, file, a));
    } else if (*features) {
      const auto a = io::load_archive(model_path);
      io::write_text_file(out_dir, pipeline::run_affect_features(a, inputs(std::nullopt, file, a)));
      std::cout << "wrote " << out_dir << "\n";
    } else if (*downstream) {
      std::size_t k = 0;
      if (!model_path.empty()) k = io::load_archive(model_path).network.config().outputs;
      const auto r = pipeline::run_downstream(features_path, labels_path, k, split_ratio, seed);
      std::cout << "train_documents " << r.train_size << "\ntest_documents " << r.test_size << "\ntrain_accuracy "
                << r.train_accuracy << "\ntest_accuracy " << r.test_accuracy << "\n";
    } else if (*synth_cmd) {
      run_synth(synth);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ShapeError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const TrainingError& e) {
    std::cerr << "training failure: " << e.what() << "\n";
    return kExitTraining;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTraining;
  }
  return 0;
}
