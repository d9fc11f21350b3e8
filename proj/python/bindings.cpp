#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "asag/corpus.hpp"
#include "asag/errors.hpp"
#include "asag/eval.hpp"
#include "asag/features.hpp"
#include "asag/model_io.hpp"
#include "asag/models.hpp"
#include "asag/pipeline.hpp"
#include "asag/textprep.hpp"
#include "asag/tune.hpp"
#include "asag/viz.hpp"

namespace py = pybind11;
using namespace asag;

namespace {

LexiconSet lexicons_from_dicts(const std::map<std::string, std::string>& slang,
                               const std::map<std::string, std::string>& lemma,
                               const std::set<std::string>& stopwords,
                               const std::set<std::string>& vocab) {
  LexiconSet lex;
  lex.slang_map = slang;
  lex.lemma_map = lemma;
  lex.stopwords = stopwords;
  lex.reference_vocab = vocab;
  lex.validate();
  return lex;
}

std::vector<std::vector<double>> dense_to_lists(const DenseMatrix& m) {
  std::vector<std::vector<double>> rows(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) rows[i].assign(m.row(i).begin(), m.row(i).end());
  return rows;
}

DenseMatrix dense_from_lists(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows[0].size() : 0;
  DenseMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) throw DataError("ragged matrix");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

SparseMatrix sparse_from_lists(const std::vector<std::vector<double>>& rows) {
  const DenseMatrix dense = dense_from_lists(rows);
  SparseMatrix sparse(0, dense.cols);
  std::vector<std::pair<std::size_t, double>> entries;
  for (std::size_t i = 0; i < dense.rows; ++i) {
    entries.clear();
    for (std::size_t j = 0; j < dense.cols; ++j) {
      if (dense.at(i, j) != 0.0) entries.emplace_back(j, dense.at(i, j));
    }
    sparse.append_row(entries);
  }
  return sparse;
}

}  // namespace

PYBIND11_MODULE(_asag, m) {
  m.doc() = "short-answer scoring pipeline (C++ core)";

  py::register_exception<DataError>(m, "DataError");
  py::register_exception<NumericError>(m, "NumericError");

  // ---- corpus ----
  py::enum_<Task>(m, "Task").value("A", Task::A).value("B", Task::B);
  py::enum_<Split>(m, "Split")
      .value("train", Split::Train)
      .value("dev", Split::Dev)
      .value("test", Split::Test);

  py::class_<LabeledResponse>(m, "LabeledResponse")
      .def(py::init([](std::string id, std::string text, std::optional<int> label) {
             return LabeledResponse{std::move(id), std::move(text), label};
           }),
           py::arg("id"), py::arg("text"), py::arg("label") = std::nullopt)
      .def_readwrite("id", &LabeledResponse::id)
      .def_readwrite("text", &LabeledResponse::text)
      .def_readwrite("label", &LabeledResponse::label);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("task", &Dataset::task)
      .def_readwrite("split", &Dataset::split)
      .def_readwrite("responses", &Dataset::responses)
      .def("__len__", &Dataset::size);

  py::class_<DatasetStats>(m, "DatasetStats")
      .def_readonly("n_total", &DatasetStats::n_total)
      .def_readonly("n_positive", &DatasetStats::n_positive)
      .def_readonly("n_negative", &DatasetStats::n_negative)
      .def_readonly("positive_fraction", &DatasetStats::positive_fraction)
      .def_readonly("avg_chars", &DatasetStats::avg_chars);

  m.def("load_dataset", &load_dataset, py::arg("path"), py::arg("task"), py::arg("split"));
  m.def("parse_dataset", &parse_dataset, py::arg("csv_content"), py::arg("task"),
        py::arg("split"), py::arg("source_name") = "<memory>");
  m.def("load_overlay", &load_overlay, py::arg("path"));
  m.def(
      "apply_overlay",
      [](const Dataset& dataset, const std::map<std::string, int>& entries) {
        LabelOverlay overlay;
        overlay.entries = entries;
        const OverlayResult result = apply_overlay(dataset, overlay);
        return py::make_tuple(result.dataset, result.flips_to_positive,
                              result.flips_to_negative);
      },
      py::arg("dataset"), py::arg("entries"));
  m.def("summarize", &summarize, py::arg("dataset"));
  m.def("dataset_fingerprint", &dataset_fingerprint, py::arg("dataset"));

  // ---- textprep ----
  m.def("tokenize", &tokenize, py::arg("text"));
  m.def("similarity", &similarity, py::arg("query"), py::arg("candidate"));
  m.def(
      "correct_typos",
      [](const TokenList& tokens, const std::set<std::string>& vocab, double cutoff) {
        LexiconSet lex;
        lex.reference_vocab = vocab;
        return correct_typos(tokens, lex, cutoff);
      },
      py::arg("tokens"), py::arg("reference_vocab"), py::arg("cutoff") = 0.6);
  m.def(
      "preprocess",
      [](const std::string& text, const std::map<std::string, std::string>& slang,
         const std::map<std::string, std::string>& lemma, const std::set<std::string>& stopwords,
         const std::set<std::string>& vocab, bool use_slang, bool use_typo, double typo_cutoff,
         bool use_lemma, bool use_stopwords) {
        PrepConfig config;
        config.use_slang_norm = use_slang;
        config.use_typo_correction = use_typo;
        config.typo_cutoff = typo_cutoff;
        config.use_lemmatize = use_lemma;
        config.use_stopword_removal = use_stopwords;
        return preprocess(text, lexicons_from_dicts(slang, lemma, stopwords, vocab), config);
      },
      py::arg("text"), py::arg("slang") = std::map<std::string, std::string>{},
      py::arg("lemma") = std::map<std::string, std::string>{},
      py::arg("stopwords") = std::set<std::string>{},
      py::arg("reference_vocab") = std::set<std::string>{}, py::arg("use_slang_norm") = false,
      py::arg("use_typo_correction") = false, py::arg("typo_cutoff") = 0.6,
      py::arg("use_lemmatize") = false, py::arg("use_stopword_removal") = false);

  // ---- features ----
  py::class_<Vocabulary>(m, "Vocabulary")
      .def_readonly("terms", &Vocabulary::terms)
      .def_readonly("doc_freq", &Vocabulary::doc_freq)
      .def("__len__", &Vocabulary::size);

  m.def("build_vocabulary", &build_vocabulary, py::arg("docs"), py::arg("min_df") = 1);
  m.def(
      "count_vectorize",
      [](const std::vector<TokenList>& docs, const Vocabulary& vocab) {
        return dense_to_lists(count_vectorize(docs, vocab).to_dense());
      },
      py::arg("docs"), py::arg("vocab"));
  m.def(
      "tfidf_transform",
      [](const std::vector<std::vector<double>>& counts) {
        const SparseMatrix sparse = sparse_from_lists(counts);
        return dense_to_lists(apply_tfidf(sparse, fit_idf(sparse)).to_dense());
      },
      py::arg("counts"));
  m.def(
      "truncated_svd",
      [](const std::vector<std::vector<double>>& x, std::size_t k, std::uint64_t seed) {
        const SvdModel model = truncated_svd(sparse_from_lists(x), k, seed);
        return py::make_tuple(model.singular_values, dense_to_lists(model.right_vectors));
      },
      py::arg("x"), py::arg("k"), py::arg("seed") = 0);

  // ---- models (via pipeline configs) ----
  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_property(
          "vectorizer",
          [](const PipelineConfig& c) { return to_string(c.vectorizer); },
          [](PipelineConfig& c, const std::string& v) { c.vectorizer = vectorizer_from_string(v); })
      .def_property(
          "classifier",
          [](const PipelineConfig& c) { return to_string(c.classifier); },
          [](PipelineConfig& c, const std::string& v) { c.classifier = classifier_from_string(v); })
      .def_readwrite("use_svd", &PipelineConfig::use_svd)
      .def_readwrite("svd_k", &PipelineConfig::svd_k)
      .def_readwrite("min_df", &PipelineConfig::min_df)
      .def_readwrite("seed", &PipelineConfig::seed)
      .def_property(
          "n_estimators",
          [](const PipelineConfig& c) { return c.params.n_estimators; },
          [](PipelineConfig& c, std::size_t v) { c.params.n_estimators = v; })
      .def_property(
          "c_reg", [](const PipelineConfig& c) { return c.params.c_reg; },
          [](PipelineConfig& c, double v) { c.params.c_reg = v; })
      .def_property(
          "alpha", [](const PipelineConfig& c) { return c.params.alpha; },
          [](PipelineConfig& c, double v) { c.params.alpha = v; })
      .def_property(
          "k_nn", [](const PipelineConfig& c) { return c.params.k_nn; },
          [](PipelineConfig& c, std::size_t v) { c.params.k_nn = v; })
      .def("descriptor", &PipelineConfig::descriptor);

  m.def("preset_config", &preset_config, py::arg("name"));
  m.def("preset_names", &preset_names);
  m.def("config_from_descriptor", &config_from_descriptor, py::arg("descriptor"));

  py::class_<PipelineModel>(m, "PipelineModel")
      .def_property_readonly("descriptor",
                             [](const PipelineModel& m_) { return m_.config.descriptor(); })
      .def_property_readonly("data_fingerprint",
                             [](const PipelineModel& m_) { return m_.data_fingerprint; })
      .def_property_readonly("vocabulary_size",
                             [](const PipelineModel& m_) { return m_.vocabulary.size(); })
      .def("predict_proba",
           [](const PipelineModel& m_, const std::vector<std::string>& texts) {
             return pipeline_predict_proba(m_, texts);
           })
      .def("predict", [](const PipelineModel& m_, const std::vector<std::string>& texts) {
        return predict_labels(pipeline_predict_proba(m_, texts));
      });

  m.def(
      "fit_pipeline",
      [](const PipelineConfig& config, const Dataset& train) {
        return fit_pipeline(config, LexiconSet{}, train);
      },
      py::arg("config"), py::arg("train"));
  m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
  m.def("load_model", &load_model, py::arg("path"));

  // ---- eval ----
  py::class_<MetricSet>(m, "MetricSet")
      .def_readonly("precision", &MetricSet::precision)
      .def_readonly("recall", &MetricSet::recall)
      .def_readonly("f1", &MetricSet::f1)
      .def_readonly("degenerate", &MetricSet::degenerate);

  py::class_<CvReport>(m, "CvReport")
      .def_readonly("config_descriptor", &CvReport::config_descriptor)
      .def_readonly("folds", &CvReport::folds)
      .def_readonly("mean", &CvReport::mean)
      .def_readonly("stddev", &CvReport::stddev);

  m.def(
      "confusion",
      [](const std::vector<int>& y_true, const std::vector<int>& y_pred) {
        const ConfusionCounts c = confusion(y_true, y_pred);
        return py::make_tuple(c.tp, c.fp, c.fn, c.tn);
      },
      py::arg("y_true"), py::arg("y_pred"));
  m.def(
      "metrics",
      [](std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
        return metrics(ConfusionCounts{tp, fp, fn, tn});
      },
      py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));
  m.def("f1_score", &f1_score, py::arg("precision"), py::arg("recall"));
  m.def(
      "stratified_kfold",
      [](const std::vector<int>& y, std::size_t k, std::uint64_t seed) {
        return stratified_kfold(y, k, seed).fold_of;
      },
      py::arg("y"), py::arg("k"), py::arg("seed") = 0);
  m.def(
      "cross_validate",
      [](const PipelineConfig& config, const Dataset& dataset, std::size_t k,
         std::uint64_t seed) { return cross_validate(config, LexiconSet{}, dataset, k, seed); },
      py::arg("config"), py::arg("dataset"), py::arg("k") = 5, py::arg("seed") = 0);
  m.def(
      "select_pessimistic",
      [](const std::vector<CvReport>& reports) { return select_pessimistic(reports); },
      py::arg("reports"));

  // ---- tune ----
  m.def(
      "optimize_quadratic_demo",
      [](std::size_t n_trials, std::uint64_t seed) {
        SearchSpace space;
        space.dimensions = {Dimension::uniform("x", -10.0, 10.0)};
        const auto trials = optimize(
            [](const ParamMap& config) {
              const double x = std::get<double>(config.at("x"));
              return -(x - 2.0) * (x - 2.0);
            },
            space, n_trials, TpeParams{}, seed);
        return py::make_tuple(std::get<double>(trials.front().config.at("x")),
                              trials.front().objective);
      },
      py::arg("n_trials") = 60, py::arg("seed") = 0);
  m.def(
      "tune_pipeline",
      [](const Dataset& dataset, std::size_t n_trials, std::size_t k, std::uint64_t seed) {
        const SearchSpace space = build_paper_space();
        const Objective objective = [&](const ParamMap& params) {
          const PipelineConfig config = config_from_params(params, PipelineConfig{});
          return cross_validate(config, LexiconSet{}, dataset, k, seed).mean.f1;
        };
        const auto trials = optimize(objective, space, n_trials, TpeParams{}, seed);
        py::list out;
        for (const Trial& t : trials) {
          py::dict d;
          d["status"] = t.status == Trial::Status::Ok ? "ok" : "failed";
          if (t.status == Trial::Status::Ok) d["objective"] = t.objective;
          py::dict config;
          for (const auto& [name, value] : t.config) config[name.c_str()] = param_to_string(value);
          d["config"] = config;
          out.append(d);
        }
        return out;
      },
      py::arg("dataset"), py::arg("n_trials") = 10, py::arg("k") = 5, py::arg("seed") = 0);

  // ---- viz ----
  m.def(
      "tsne",
      [](const std::vector<std::vector<double>>& x, double perplexity, std::size_t n_iters,
         std::uint64_t seed) {
        TsneConfig config;
        config.perplexity = perplexity;
        config.n_iters = n_iters;
        config.seed = seed;
        const Embedding2D embedding = tsne(dense_from_lists(x), config);
        return py::make_tuple(dense_to_lists(embedding.points), embedding.kl_divergence,
                              embedding.notice);
      },
      py::arg("x"), py::arg("perplexity") = 30.0, py::arg("n_iters") = 1000,
      py::arg("seed") = 0);
  m.def(
      "probability_histogram",
      [](const std::vector<double>& probs, std::size_t n_bins) {
        const HistogramData h = probability_histogram(probs, n_bins);
        return py::make_tuple(h.edges, h.counts);
      },
      py::arg("probs"), py::arg("n_bins") = 20);
  m.def(
      "uncertainty_band_count",
      [](const std::vector<double>& probs, double lo, double hi) {
        const BandCount band = uncertainty_band_count(probs, lo, hi);
        return py::make_tuple(band.count, band.fraction, band.fraction_defined);
      },
      py::arg("probs"), py::arg("lo") = 0.4, py::arg("hi") = 0.6);
}
