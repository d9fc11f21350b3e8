#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "asag/cli.hpp"
#include "asag/corpus.hpp"
#include "asag/csv.hpp"
#include "asag/model_io.hpp"
#include "support/oracles.hpp"

using namespace asag;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("asag_cli_" + std::to_string(rand()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

void write_dataset_csv(const Dataset& dataset, const std::string& path, bool with_labels) {
  std::vector<csv::Row> rows;
  rows.push_back(with_labels ? csv::Row{"id", "text", "label"} : csv::Row{"id", "text"});
  for (const auto& r : dataset.responses) {
    csv::Row row = {r.id, r.text};
    if (with_labels) row.push_back(r.label ? std::to_string(*r.label) : "");
    rows.push_back(std::move(row));
  }
  csv::write_file(path, rows);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("train then predict end to end") {
  TempDir dir;
  const Dataset train = oracles::synthetic_corpus(60, 0.0, 5);
  write_dataset_csv(train, dir.file("train.csv"), true);
  const Dataset test = oracles::synthetic_corpus(20, 0.0, 99);
  write_dataset_csv(test, dir.file("test.csv"), false);

  CHECK(cli::run({"train", "--task", "A", "--data", dir.file("train.csv"), "--config",
                  "taskA-best", "--seed", "3", "--out", dir.file("model.json")}) == 0);
  CHECK(fs::exists(dir.file("model.json")));

  CHECK(cli::run({"predict", "--model", dir.file("model.json"), "--data", dir.file("test.csv"),
                  "--out", dir.file("preds.csv")}) == 0);

  const auto rows = csv::read_file(dir.file("preds.csv"));
  REQUIRE(rows.size() == test.size() + 1);  // header + one row per input
  CHECK(rows[0] == csv::Row{"id", "label", "probability"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].size() == 3);
    CHECK((rows[i][1] == "0" || rows[i][1] == "1"));
    const double p = std::stod(rows[i][2]);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("predict output is byte-identical across reruns") {
  TempDir dir;
  const Dataset train = oracles::synthetic_corpus(50, 0.1, 6);
  write_dataset_csv(train, dir.file("train.csv"), true);
  write_dataset_csv(train, dir.file("query.csv"), true);

  CHECK(cli::run({"train", "--task", "A", "--data", dir.file("train.csv"), "--config",
                  "taskA-best", "--seed", "11", "--out", dir.file("m.json")}) == 0);
  CHECK(cli::run({"predict", "--model", dir.file("m.json"), "--data", dir.file("query.csv"),
                  "--split", "train", "--out", dir.file("p1.csv")}) == 0);
  CHECK(cli::run({"predict", "--model", dir.file("m.json"), "--data", dir.file("query.csv"),
                  "--split", "train", "--out", dir.file("p2.csv")}) == 0);
  CHECK(slurp(dir.file("p1.csv")) == slurp(dir.file("p2.csv")));

  // retraining with the same seed gives the same model file except timestamps
  CHECK(cli::run({"train", "--task", "A", "--data", dir.file("train.csv"), "--config",
                  "taskA-best", "--seed", "11", "--out", dir.file("m2.json")}) == 0);
  CHECK(slurp(dir.file("m.json")) == slurp(dir.file("m2.json")));
}

TEST_CASE("cv emits one row per config with verbatim labels") {
  TempDir dir;
  const Dataset train = oracles::synthetic_corpus(60, 0.05, 7);
  write_dataset_csv(train, dir.file("train.csv"), true);
  {
    std::ofstream configs(dir.file("configs.txt"));
    configs << "1-gram+RF\n1-gram+logreg\n1-gram+SVD+RF\n1-gram+SVD+logreg\n"
            << "TF-IDF+RF\nTF-IDF+logreg\nTF-IDF+SVD+RF\nTF-IDF+SVD+logreg\n";
  }
  CHECK(cli::run({"cv", "--task", "A", "--data", dir.file("train.csv"), "--configs",
                  dir.file("configs.txt"), "--k", "5", "--seed", "2", "--out",
                  dir.file("folds.csv")}) == 0);

  const auto rows = csv::read_file(dir.file("folds.csv"));
  REQUIRE(rows.size() == 1 + 8 * 5);  // header + 8 configs x 5 folds
  const std::vector<std::string> expected = {
      "1-gram+RF",     "1-gram+logreg",  "1-gram+SVD+RF",  "1-gram+SVD+logreg",
      "TF-IDF+RF",     "TF-IDF+logreg",  "TF-IDF+SVD+RF",  "TF-IDF+SVD+logreg"};
  for (std::size_t c = 0; c < expected.size(); ++c) {
    CHECK(rows[1 + c * 5][0] == expected[c]);
  }
}

TEST_CASE("tune writes a resumable log and a summary") {
  TempDir dir;
  const Dataset train = oracles::synthetic_corpus(40, 0.1, 8);
  write_dataset_csv(train, dir.file("train.csv"), true);

  CHECK(cli::run({"tune", "--task", "A", "--data", dir.file("train.csv"), "--trials", "6",
                  "--seed", "4", "--k", "4", "--log", dir.file("trials.jsonl"), "--out",
                  dir.file("best.json")}) == 0);
  CHECK(fs::exists(dir.file("trials.jsonl")));
  CHECK(fs::exists(dir.file("best.json")));
  {
    std::ifstream log(dir.file("trials.jsonl"));
    std::size_t lines = 0;
    std::string line;
    while (std::getline(log, line)) {
      if (!line.empty()) ++lines;
    }
    CHECK(lines == 6);
  }

  // resume: two more trials append to the same log
  CHECK(cli::run({"tune", "--task", "A", "--data", dir.file("train.csv"), "--trials", "8",
                  "--seed", "4", "--k", "4", "--log", dir.file("trials.jsonl")}) == 0);
  {
    std::ifstream log(dir.file("trials.jsonl"));
    std::size_t lines = 0;
    std::string line;
    while (std::getline(log, line)) {
      if (!line.empty()) ++lines;
    }
    CHECK(lines == 8);
  }
}

TEST_CASE("analyze writes the full artifact set") {
  TempDir dir;
  const Dataset train = oracles::synthetic_corpus(50, 0.0, 9);
  write_dataset_csv(train, dir.file("train.csv"), true);

  CHECK(cli::run({"train", "--task", "B", "--data", dir.file("train.csv"), "--config",
                  "taskB-best", "--out", dir.file("model.json")}) == 0);
  CHECK(cli::run({"analyze", "--model", dir.file("model.json"), "--data", dir.file("train.csv"),
                  "--split", "train", "--out-dir", dir.file("analysis"), "--iters", "150"}) == 0);

  for (const char* name :
       {"embedding.csv", "embedding.svg", "histogram.csv", "histogram.svg", "summary.txt"}) {
    CHECK(fs::exists(fs::path(dir.file("analysis")) / name));
  }
  const std::string summary = slurp((fs::path(dir.file("analysis")) / "summary.txt").string());
  CHECK(summary.find("uncertainty band") != std::string::npos);

  const auto embedding = csv::read_file((fs::path(dir.file("analysis")) / "embedding.csv").string());
  CHECK(embedding.size() == train.size() + 1);
}

TEST_CASE("overlay flips are applied before training") {
  TempDir dir;
  Dataset train = oracles::synthetic_counts_dataset(30, 30);
  write_dataset_csv(train, dir.file("train.csv"), true);
  {
    std::ofstream overlay(dir.file("overlay.csv"));
    overlay << "id,corrected_label\nr0,0\nr1,0\nr30,1\n";
  }
  CHECK(cli::run({"train", "--task", "A", "--data", dir.file("train.csv"), "--config",
                  "taskA-best", "--overlay", dir.file("overlay.csv"), "--out",
                  dir.file("model.json")}) == 0);
  const PipelineModel model = load_model(dir.file("model.json"));
  CHECK(model.config.use_label_overlay);

  // fingerprint reflects the corrected labels
  const Dataset corrected = apply_overlay(train, load_overlay(dir.file("overlay.csv"))).dataset;
  CHECK(model.data_fingerprint == dataset_fingerprint(corrected));
}

TEST_CASE("fingerprint guard fails loudly on drift") {
  TempDir dir;
  const Dataset train = oracles::synthetic_corpus(40, 0.0, 10);
  write_dataset_csv(train, dir.file("train.csv"), true);
  CHECK(cli::run({"train", "--task", "A", "--data", dir.file("train.csv"), "--config",
                  "taskA-best", "--out", dir.file("model.json")}) == 0);

  const PipelineModel model = load_model(dir.file("model.json"));
  CHECK(cli::run({"predict", "--model", dir.file("model.json"), "--data", dir.file("train.csv"),
                  "--split", "train", "--out", dir.file("p.csv"), "--expect-fingerprint",
                  model.data_fingerprint}) == 0);
  CHECK(cli::run({"predict", "--model", dir.file("model.json"), "--data", dir.file("train.csv"),
                  "--split", "train", "--out", dir.file("p.csv"), "--expect-fingerprint",
                  "deadbeefdeadbeef"}) == 2);
}

TEST_CASE("exit codes distinguish usage and data errors") {
  TempDir dir;
  // unknown flag -> usage error
  CHECK(cli::run({"train", "--bogus"}) == 1);
  // unknown subcommand -> usage error
  CHECK(cli::run({"frobnicate"}) == 1);
  // missing file -> data error
  CHECK(cli::run({"train", "--task", "A", "--data", dir.file("absent.csv"), "--config",
                  "taskA-best", "--out", dir.file("m.json")}) == 2);
  // preset/task mismatch -> usage error
  const Dataset train = oracles::synthetic_corpus(30, 0.0, 11);
  write_dataset_csv(train, dir.file("train.csv"), true);
  CHECK(cli::run({"train", "--task", "B", "--data", dir.file("train.csv"), "--config",
                  "taskA-best", "--out", dir.file("m.json")}) == 1);
  // malformed data -> data error
  {
    std::ofstream bad(dir.file("bad.csv"));
    bad << "id,text,label\nr1,abc,7\n";
  }
  CHECK(cli::run({"train", "--task", "A", "--data", dir.file("bad.csv"), "--config",
                  "taskA-best", "--out", dir.file("m.json")}) == 2);
}

TEST_CASE("config files work alongside presets") {
  TempDir dir;
  const Dataset train = oracles::synthetic_corpus(40, 0.0, 12);
  write_dataset_csv(train, dir.file("train.csv"), true);

  PipelineConfig config;
  config.vectorizer = VectorizerKind::Tfidf;
  config.classifier = ClassifierFamily::NaiveBayes;
  config.params.alpha = 0.5;
  {
    std::ofstream out(dir.file("config.json"));
    out << config_to_json(config).dump(2);
  }
  CHECK(cli::run({"train", "--task", "A", "--data", dir.file("train.csv"), "--config",
                  dir.file("config.json"), "--out", dir.file("model.json")}) == 0);
  const PipelineModel model = load_model(dir.file("model.json"));
  CHECK(model.config.classifier == ClassifierFamily::NaiveBayes);
  CHECK(model.config.params.alpha == 0.5);
}

}  // TEST_SUITE
