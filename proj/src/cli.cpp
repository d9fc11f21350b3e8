#include "asag/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "asag/corpus.hpp"
#include "asag/csv.hpp"
#include "asag/errors.hpp"
#include "asag/eval.hpp"
#include "asag/model_io.hpp"
#include "asag/pipeline.hpp"
#include "asag/rng.hpp"
#include "asag/tune.hpp"
#include "asag/viz.hpp"

namespace asag::cli {

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kCvSalt = 0xCF01;

struct CommonOptions {
  std::string data_path;
  std::string task = "A";
  std::string split = "train";
  std::string overlay_path;
  std::string lexicon_dir;
  std::uint64_t seed = 0;
};

LexiconSet load_lexicons(const std::string& dir) {
  LexiconSet lex;
  if (dir.empty()) return lex;
  if (!fs::is_directory(dir)) throw DataError("lexicon directory not found: " + dir);
  const auto maybe = [&](const char* name) { return (fs::path(dir) / name).string(); };
  if (fs::exists(maybe("slang.tsv"))) lex.slang_map = load_word_map(maybe("slang.tsv"));
  if (fs::exists(maybe("lemma.tsv"))) lex.lemma_map = load_word_map(maybe("lemma.tsv"));
  if (fs::exists(maybe("stopwords.txt"))) lex.stopwords = load_word_set(maybe("stopwords.txt"));
  if (fs::exists(maybe("vocab.txt"))) lex.reference_vocab = load_word_set(maybe("vocab.txt"));
  lex.validate();
  return lex;
}

Dataset load_with_overlay(const CommonOptions& opts, bool apply) {
  Dataset dataset =
      load_dataset(opts.data_path, task_from_string(opts.task), split_from_string(opts.split));
  if (apply && !opts.overlay_path.empty()) {
    const OverlayResult result = apply_overlay(dataset, load_overlay(opts.overlay_path));
    std::cout << "applied label overlay: " << result.flips_to_positive << " flips 0->1, "
              << result.flips_to_negative << " flips 1->0\n";
    return result.dataset;
  }
  return dataset;
}

std::vector<PipelineConfig> read_config_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config list: " + path);
  std::vector<PipelineConfig> configs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      if (line[0] == '{') {
        configs.push_back(config_from_json(nlohmann::json::parse(line)));
      } else {
        bool preset = false;
        for (const auto& name : preset_names()) {
          if (line == name) {
            configs.push_back(preset_config(name));
            preset = true;
            break;
          }
        }
        if (!preset) configs.push_back(config_from_descriptor(line));
      }
    } catch (const std::exception& e) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (configs.empty()) throw DataError(path + ": no configurations found");
  return configs;
}

void check_preset_task(const std::string& config_name, const std::string& task) {
  if (config_name == "taskA-best" && task != "A")
    throw CLI::ValidationError("preset taskA-best requires --task A");
  if (config_name == "taskB-best" && task != "B")
    throw CLI::ValidationError("preset taskB-best requires --task B");
}

int cmd_train(const CommonOptions& opts, const std::string& config_arg,
              const std::string& out_path, bool seed_given) {
  check_preset_task(config_arg, opts.task);
  PipelineConfig config = load_config(config_arg);
  if (seed_given) config.seed = opts.seed;
  if (!opts.overlay_path.empty()) {
    config.use_label_overlay = true;
    config.overlay_path = opts.overlay_path;
  }

  const Dataset dataset = load_with_overlay(opts, /*apply=*/true);
  const LexiconSet lexicons = load_lexicons(opts.lexicon_dir);
  const PipelineModel model = fit_pipeline(config, lexicons, dataset);
  save_model(model, out_path);

  std::cout << "trained " << config.descriptor() << " on task " << opts.task << " ("
            << dataset.size() << " responses, vocabulary " << model.vocabulary.size()
            << " terms)\n"
            << "data fingerprint: " << model.data_fingerprint << "\n"
            << "model written to " << out_path << "\n";
  return 0;
}

int cmd_cv(const CommonOptions& opts, const std::string& configs_path, std::size_t k,
           const std::string& out_path) {
  const Dataset dataset = load_with_overlay(opts, /*apply=*/true);
  const LexiconSet lexicons = load_lexicons(opts.lexicon_dir);
  const std::vector<PipelineConfig> configs = read_config_list(configs_path);

  std::vector<CvReport> reports;
  reports.reserve(configs.size());
  for (const PipelineConfig& config : configs) {
    reports.push_back(cross_validate(config, lexicons, dataset, k, opts.seed));
  }

  std::cout << report_table(reports);
  const CvReport& chosen = select_pessimistic(reports);
  std::cout << "pessimistic choice (mean F1 - std): " << chosen.config_descriptor << " ("
            << chosen.mean.f1 - chosen.stddev.f1 << ")\n";

  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write report: " + out_path);
    out << report_csv(reports);
    std::cout << "per-fold metrics written to " << out_path << "\n";
  }
  return 0;
}

int cmd_tune(const CommonOptions& opts, std::size_t n_trials, std::size_t k,
             const std::string& log_path, const std::string& out_path, const TpeParams& params) {
  const Dataset base = load_with_overlay(opts, /*apply=*/false);
  Dataset overlaid = base;
  if (!opts.overlay_path.empty()) {
    overlaid = apply_overlay(base, load_overlay(opts.overlay_path)).dataset;
  }
  const LexiconSet lexicons = load_lexicons(opts.lexicon_dir);
  const SearchSpace space = build_paper_space();

  std::vector<Trial> history;
  if (!log_path.empty() && fs::exists(log_path)) {
    history = load_trial_log(log_path);
    if (!history.empty())
      std::cout << "resuming from " << history.size() << " logged trials\n";
  }

  const std::uint64_t cv_seed = rng::mix(opts.seed, kCvSalt);
  PipelineConfig base_config;
  const Objective objective = [&](const ParamMap& sampled) {
    PipelineConfig config = config_from_params(sampled, base_config);
    const Dataset& dataset = config.use_label_overlay ? overlaid : base;
    return cross_validate(config, lexicons, dataset, k, cv_seed).mean.f1;
  };

  std::unique_ptr<FileTrialSink> sink;
  if (!log_path.empty()) sink = std::make_unique<FileTrialSink>(log_path);
  const std::vector<Trial> trials =
      optimize(objective, space, n_trials, params, opts.seed, std::move(history), sink.get());

  const Trial& best = trials.front();
  if (best.status != Trial::Status::Ok) throw NumericError("tune: every trial failed");
  std::cout << "best objective (mean F1): " << best.objective << "\n";
  std::cout << "best config:\n";
  for (const auto& [name, value] : best.config)
    std::cout << "  " << name << " = " << param_to_string(value) << "\n";

  std::cout << "best per classifier family:\n";
  for (const auto& [family, trial] : best_per_family(trials)) {
    std::cout << "  " << family << ": F1 " << trial.objective << "\n";
  }

  if (!out_path.empty()) {
    nlohmann::json out_doc;
    out_doc["best_config"] = config_to_json(config_from_params(best.config, base_config));
    out_doc["best_objective"] = best.objective;
    nlohmann::json families = nlohmann::json::object();
    for (const auto& [family, trial] : best_per_family(trials)) {
      families[family] = {
          {"objective", trial.objective},
          {"config", config_to_json(config_from_params(trial.config, base_config))}};
    }
    out_doc["best_per_family"] = std::move(families);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write tune summary: " + out_path);
    out << out_doc.dump(2) << "\n";
    std::cout << "tune summary written to " << out_path << "\n";
  }
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& split, const std::string& out_path,
                const std::string& expect_fingerprint) {
  const PipelineModel model = load_model(model_path);
  if (!expect_fingerprint.empty() && expect_fingerprint != model.data_fingerprint) {
    throw DataError("fingerprint mismatch: model was trained on " + model.data_fingerprint +
                    ", expected " + expect_fingerprint);
  }
  const Dataset dataset = load_dataset(data_path, model.task, split_from_string(split));
  const std::vector<double> probs = pipeline_predict_proba(model, dataset);

  std::vector<csv::Row> rows;
  rows.push_back({"id", "label", "probability"});
  char buffer[32];
  for (std::size_t i = 0; i < probs.size(); ++i) {
    std::snprintf(buffer, sizeof(buffer), "%.6f", probs[i]);
    rows.push_back({dataset.responses[i].id, std::to_string(label_of(probs[i])), buffer});
  }
  csv::write_file(out_path, rows);
  std::cout << "wrote " << probs.size() << " predictions to " << out_path << "\n";
  return 0;
}

int cmd_analyze(const std::string& model_path, const std::string& data_path,
                const std::string& split, const std::string& out_dir, double perplexity,
                std::size_t n_iters, std::uint64_t seed) {
  const PipelineModel model = load_model(model_path);
  const Dataset dataset = load_dataset(data_path, model.task, split_from_string(split));
  fs::create_directories(out_dir);

  std::vector<std::string> ids;
  std::vector<std::optional<int>> labels;
  std::vector<std::string> texts;
  bool all_labeled = true;
  for (const auto& r : dataset.responses) {
    ids.push_back(r.id);
    labels.push_back(r.label);
    texts.push_back(r.text);
    all_labeled = all_labeled && r.label.has_value();
  }

  const DenseMatrix features = pipeline_dense_features(model, texts);

  TsneConfig tsne_config;
  tsne_config.seed = seed;
  tsne_config.n_iters = n_iters;
  if (perplexity > 0.0) {
    tsne_config.perplexity = perplexity;
  } else {
    tsne_config.perplexity =
        std::min(30.0, std::max(2.0, static_cast<double>(features.rows) / 4.0));
  }
  const Embedding2D embedding = tsne(features, tsne_config);
  write_embedding_csv((fs::path(out_dir) / "embedding.csv").string(), ids, embedding, labels);
  {
    std::ofstream svg(fs::path(out_dir) / "embedding.svg", std::ios::binary);
    svg << embedding_svg(embedding, labels);
  }

  const std::vector<double> probs = pipeline_predict_proba(model, texts);
  std::vector<int> label_values;
  if (all_labeled) {
    for (const auto& l : labels) label_values.push_back(*l);
  }
  const HistogramData hist =
      probability_histogram(probs, 20, all_labeled ? &label_values : nullptr);
  write_histogram_csv((fs::path(out_dir) / "histogram.csv").string(), hist);
  {
    std::ofstream svg(fs::path(out_dir) / "histogram.svg", std::ios::binary);
    svg << histogram_svg(hist);
  }

  const BandCount band = uncertainty_band_count(probs);
  {
    std::ofstream summary(fs::path(out_dir) / "summary.txt", std::ios::binary);
    summary << "model: " << model.config.descriptor() << "\n"
            << "task: " << to_string(model.task) << "\n"
            << "points: " << probs.size() << "\n"
            << "uncertainty band [0.4, 0.6]: " << band.count << " predictions";
    char buffer[32];
    if (band.fraction_defined) {
      std::snprintf(buffer, sizeof(buffer), "%.4f", band.fraction);
      summary << " (fraction " << buffer << ")";
    }
    summary << "\n"
            << "tsne KL divergence: " << embedding.kl_divergence << "\n";
    if (!embedding.notice.empty()) summary << "note: " << embedding.notice << "\n";
  }
  std::cout << "analysis written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"free-text short answer scoring pipeline"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string config_arg, out_path, configs_path, model_path, expect_fingerprint;
  std::string log_path, tune_out, out_dir;
  std::size_t k = 5, n_trials = 50, n_iters = 1000;
  double perplexity = 0.0;
  TpeParams tpe;
  bool seed_given = false;

  auto add_common = [&](CLI::App* cmd, bool with_overlay = true) {
    cmd->add_option("--data", opts.data_path, "dataset CSV (id,text[,label])")->required();
    cmd->add_option("--task", opts.task, "task identifier (A or B)")
        ->check(CLI::IsMember({"A", "B"}));
    cmd->add_option("--split", opts.split, "dataset split")
        ->check(CLI::IsMember({"train", "dev", "test"}));
    cmd->add_option("--seed", opts.seed, "master random seed")
        ->each([&](const std::string&) { seed_given = true; });
    cmd->add_option("--lexicon-dir", opts.lexicon_dir,
                    "directory with slang.tsv, lemma.tsv, stopwords.txt, vocab.txt");
    if (with_overlay)
      cmd->add_option("--overlay", opts.overlay_path, "label-correction overlay CSV");
  };

  CLI::App* train = app.add_subcommand("train", "fit a pipeline and save the model");
  add_common(train);
  train->add_option("--config", config_arg, "preset name or JSON config file")->required();
  train->add_option("--out", out_path, "output model path")->required();

  CLI::App* cv = app.add_subcommand("cv", "stratified cross-validation over configurations");
  add_common(cv);
  cv->add_option("--configs", configs_path,
                 "file with one config per line (descriptor, preset, or JSON)")
      ->required();
  cv->add_option("--k", k, "number of folds");
  cv->add_option("--out", out_path, "per-fold metrics CSV");

  CLI::App* tune_cmd = app.add_subcommand("tune", "hyperparameter search");
  add_common(tune_cmd);
  tune_cmd->add_option("--trials", n_trials, "total number of trials")->required();
  tune_cmd->add_option("--k", k, "cross-validation folds per trial");
  tune_cmd->add_option("--log", log_path, "append-only JSONL trial log (resumes if present)");
  tune_cmd->add_option("--out", tune_out, "summary JSON output");
  tune_cmd->add_option("--n-startup", tpe.n_startup, "random trials before TPE engages");
  tune_cmd->add_option("--gamma", tpe.gamma, "good-trial quantile");
  tune_cmd->add_option("--n-candidates", tpe.n_candidates, "candidate draws per suggestion");
  tune_cmd->add_option("--prior-weight", tpe.prior_weight, "categorical prior weight");

  CLI::App* predict = app.add_subcommand("predict", "score new responses with a saved model");
  predict->add_option("--model", model_path, "model JSON path")->required();
  predict->add_option("--data", opts.data_path, "dataset CSV")->required();
  predict->add_option("--split", opts.split, "dataset split")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  predict->add_option("--out", out_path, "predictions CSV")->required();
  predict->add_option("--expect-fingerprint", expect_fingerprint,
                      "fail unless the model's training fingerprint matches");

  CLI::App* analyze = app.add_subcommand("analyze", "t-SNE embedding and probability analysis");
  analyze->add_option("--model", model_path, "model JSON path")->required();
  analyze->add_option("--data", opts.data_path, "dataset CSV")->required();
  analyze->add_option("--split", opts.split, "dataset split")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  analyze->add_option("--out-dir", out_dir, "output directory")->required();
  analyze->add_option("--seed", opts.seed, "embedding seed");
  analyze->add_option("--perplexity", perplexity, "t-SNE perplexity (0 = auto)");
  analyze->add_option("--iters", n_iters, "t-SNE iterations");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  // predict uses the model's recorded task; default its split to test.
  if (predict->parsed() && predict->count("--split") == 0) opts.split = "test";

  try {
    if (train->parsed()) return cmd_train(opts, config_arg, out_path, seed_given);
    if (cv->parsed()) return cmd_cv(opts, configs_path, k, out_path);
    if (tune_cmd->parsed()) return cmd_tune(opts, n_trials, k, log_path, tune_out, tpe);
    if (predict->parsed())
      return cmd_predict(model_path, opts.data_path, opts.split, out_path, expect_fingerprint);
    if (analyze->parsed())
      return cmd_analyze(model_path, opts.data_path, opts.split, out_dir, perplexity, n_iters,
                         opts.seed);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

}  // namespace asag::cli
