#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asag/corpus.hpp"
#include "asag/features.hpp"
#include "asag/models.hpp"
#include "asag/textprep.hpp"
#include "asag/tune.hpp"

namespace asag {

enum class VectorizerKind { UnigramCount, Tfidf };
enum class ClassifierFamily { LogReg, Forest, NaiveBayes, Knn };

std::string to_string(VectorizerKind kind);
std::string to_string(ClassifierFamily family);
VectorizerKind vectorizer_from_string(const std::string& s);
ClassifierFamily classifier_from_string(const std::string& s);

// Hyperparameters for all families; the selected family reads its own fields.
struct ClassifierParams {
  double c_reg = 1.0;  // logreg
  double tol = 1e-6;
  std::size_t max_iter = 1000;
  std::size_t n_estimators = 200;  // forest
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_leaf = 1;
  bool bootstrap = true;
  double alpha = 1.0;  // naive Bayes
  std::size_t k_nn = 5;  // knn

  bool operator==(const ClassifierParams&) const = default;
};

struct PipelineConfig {
  PrepConfig prep;
  VectorizerKind vectorizer = VectorizerKind::UnigramCount;
  bool use_svd = false;
  std::size_t svd_k = 100;  // capped at min(n_rows, n_cols) - 1 when fitting
  std::size_t min_df = 1;
  ClassifierFamily classifier = ClassifierFamily::Forest;
  ClassifierParams params;
  std::uint64_t seed = 0;
  bool use_label_overlay = false;
  std::string overlay_path;  // optional; recorded for provenance

  // Row label in the style of the cross-validation tables, e.g. "1-gram+SVD+RF".
  std::string descriptor() const;

  bool operator==(const PipelineConfig&) const = default;
};

// Shorthand parser for descriptor strings like "TF-IDF+SVD+logreg"; unknown
// names raise DataError.
PipelineConfig config_from_descriptor(const std::string& descriptor);

// Named presets for the two headline configurations.
PipelineConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

// Applies a sampled search-space assignment on top of a base configuration.
PipelineConfig config_from_params(const ParamMap& params, const PipelineConfig& base);

// A fully fitted scoring pipeline: preprocessing lexicons, vocabulary,
// optional idf and LSA factors, and the classifier.
struct PipelineModel {
  PipelineConfig config;
  Task task = Task::A;  // task the model was trained on
  LexiconSet lexicons;
  Vocabulary vocabulary;
  std::optional<IdfWeights> idf;
  std::optional<SvdModel> svd;
  std::vector<double> nb_offset;  // per-column shift making LSA features nonnegative for NB
  AnyClassifier classifier;
  std::string data_fingerprint;
};

PipelineModel fit_pipeline(const PipelineConfig& config, const LexiconSet& lexicons,
                           const Dataset& train);

// Feature-space transform of new texts under a fitted pipeline.
FeatureMatrix pipeline_transform(const PipelineModel& model, const std::vector<std::string>& texts);

std::vector<double> pipeline_predict_proba(const PipelineModel& model,
                                           const std::vector<std::string>& texts);
std::vector<double> pipeline_predict_proba(const PipelineModel& model, const Dataset& data);

// Dense view of the features used for embedding analysis: LSA projection when
// the pipeline has one, densified raw features otherwise.
DenseMatrix pipeline_dense_features(const PipelineModel& model,
                                    const std::vector<std::string>& texts);

}  // namespace asag
