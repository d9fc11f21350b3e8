#include "asag/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "asag/errors.hpp"
#include "asag/rng.hpp"

namespace asag {

namespace {

constexpr std::uint64_t kSvdSalt = 0x53564400;     // "SVD"
constexpr std::uint64_t kForestSalt = 0x464F5200;  // "FOR"

std::vector<TokenList> prep_all(const PipelineConfig& config, const LexiconSet& lexicons,
                                const std::vector<std::string>& texts) {
  std::vector<TokenList> docs;
  docs.reserve(texts.size());
  for (const auto& text : texts) docs.push_back(preprocess(text, lexicons, config.prep));
  return docs;
}

std::vector<std::string> texts_of(const Dataset& data) {
  std::vector<std::string> texts;
  texts.reserve(data.responses.size());
  for (const auto& r : data.responses) texts.push_back(r.text);
  return texts;
}

std::vector<int> labels_of(const Dataset& data) {
  std::vector<int> labels;
  labels.reserve(data.responses.size());
  for (const auto& r : data.responses) {
    if (!r.label.has_value()) throw DataError("dataset row " + r.id + " lacks a label");
    labels.push_back(*r.label);
  }
  return labels;
}

bool param_as_bool(const ParamValue& v) {
  const std::string s = param_to_string(v);
  if (s == "true") return true;
  if (s == "false") return false;
  throw DataError("expected true/false, got " + s);
}

double param_as_double(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw DataError("expected a numeric parameter");
}

std::int64_t param_as_int(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw DataError("expected an integer parameter");
}

}  // namespace

std::string to_string(VectorizerKind kind) {
  return kind == VectorizerKind::UnigramCount ? "unigram" : "tfidf";
}

std::string to_string(ClassifierFamily family) {
  switch (family) {
    case ClassifierFamily::LogReg: return "logreg";
    case ClassifierFamily::Forest: return "forest";
    case ClassifierFamily::NaiveBayes: return "naive_bayes";
    case ClassifierFamily::Knn: return "knn";
  }
  return "forest";
}

VectorizerKind vectorizer_from_string(const std::string& s) {
  if (s == "unigram" || s == "count" || s == "1-gram") return VectorizerKind::UnigramCount;
  if (s == "tfidf" || s == "tf-idf" || s == "TF-IDF") return VectorizerKind::Tfidf;
  throw DataError("unknown vectorizer: " + s);
}

ClassifierFamily classifier_from_string(const std::string& s) {
  if (s == "logreg") return ClassifierFamily::LogReg;
  if (s == "forest" || s == "rf" || s == "RF") return ClassifierFamily::Forest;
  if (s == "naive_bayes" || s == "nb" || s == "NB") return ClassifierFamily::NaiveBayes;
  if (s == "knn" || s == "kNN") return ClassifierFamily::Knn;
  throw DataError("unknown classifier: " + s);
}

std::string PipelineConfig::descriptor() const {
  std::string out = vectorizer == VectorizerKind::UnigramCount ? "1-gram" : "TF-IDF";
  if (use_svd) out += "+SVD";
  out += "+";
  switch (classifier) {
    case ClassifierFamily::LogReg: out += "logreg"; break;
    case ClassifierFamily::Forest: out += "RF"; break;
    case ClassifierFamily::NaiveBayes: out += "NB"; break;
    case ClassifierFamily::Knn: out += "kNN"; break;
  }
  return out;
}

PipelineConfig config_from_descriptor(const std::string& descriptor) {
  std::vector<std::string> parts;
  std::string token;
  for (char c : descriptor) {
    if (c == '+') {
      parts.push_back(token);
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  parts.push_back(token);
  if (parts.size() < 2 || parts.size() > 3)
    throw DataError("bad config descriptor: " + descriptor);

  PipelineConfig config;
  config.vectorizer = vectorizer_from_string(parts.front());
  config.use_svd = parts.size() == 3;
  if (config.use_svd && parts[1] != "SVD" && parts[1] != "svd")
    throw DataError("bad config descriptor: " + descriptor);
  config.classifier = classifier_from_string(parts.back());
  return config;
}

PipelineConfig preset_config(const std::string& name) {
  if (name == "taskA-best") {
    PipelineConfig config;
    config.vectorizer = VectorizerKind::UnigramCount;
    config.use_svd = true;
    config.classifier = ClassifierFamily::Forest;
    config.params.n_estimators = 200;
    return config;
  }
  if (name == "taskB-best") {
    PipelineConfig config;
    config.vectorizer = VectorizerKind::Tfidf;
    config.use_svd = false;
    config.classifier = ClassifierFamily::LogReg;
    return config;
  }
  throw DataError("unknown preset: " + name);
}

std::vector<std::string> preset_names() { return {"taskA-best", "taskB-best"}; }

PipelineConfig config_from_params(const ParamMap& params, const PipelineConfig& base) {
  PipelineConfig config = base;
  for (const auto& [name, value] : params) {
    if (name == "vectorizer") config.vectorizer = vectorizer_from_string(param_to_string(value));
    else if (name == "use_svd") config.use_svd = param_as_bool(value);
    else if (name == "svd_k") config.svd_k = static_cast<std::size_t>(param_as_int(value));
    else if (name == "use_typo_correction") config.prep.use_typo_correction = param_as_bool(value);
    else if (name == "use_stopword_removal") config.prep.use_stopword_removal = param_as_bool(value);
    else if (name == "use_slang_norm") config.prep.use_slang_norm = param_as_bool(value);
    else if (name == "use_lemmatize") config.prep.use_lemmatize = param_as_bool(value);
    else if (name == "use_label_overlay") config.use_label_overlay = param_as_bool(value);
    else if (name == "classifier") config.classifier = classifier_from_string(param_to_string(value));
    else if (name == "logreg_c_reg") config.params.c_reg = param_as_double(value);
    else if (name == "forest_n_estimators") config.params.n_estimators = static_cast<std::size_t>(param_as_int(value));
    else if (name == "forest_min_samples_leaf") config.params.min_samples_leaf = static_cast<std::size_t>(param_as_int(value));
    else if (name == "nb_alpha") config.params.alpha = param_as_double(value);
    else if (name == "knn_k") config.params.k_nn = static_cast<std::size_t>(param_as_int(value));
    else throw DataError("unknown search parameter: " + name);
  }
  return config;
}

PipelineModel fit_pipeline(const PipelineConfig& config, const LexiconSet& lexicons,
                           const Dataset& train) {
  config.prep.validate();
  lexicons.validate();
  if (train.responses.empty()) throw DataError("cannot fit on an empty dataset");

  PipelineModel model;
  model.config = config;
  model.task = train.task;
  model.lexicons = lexicons;
  model.data_fingerprint = dataset_fingerprint(train);

  const std::vector<std::string> texts = texts_of(train);
  const std::vector<int> labels = labels_of(train);
  const std::vector<TokenList> docs = prep_all(config, lexicons, texts);

  model.vocabulary = build_vocabulary(docs, config.min_df);
  SparseMatrix x = count_vectorize(docs, model.vocabulary);
  if (config.vectorizer == VectorizerKind::Tfidf) {
    model.idf = fit_idf(x);
    x = apply_tfidf(x, *model.idf);
  }

  FeatureMatrix features;
  if (config.use_svd) {
    const std::size_t min_dim = std::min(x.n_rows, x.n_cols);
    if (min_dim < 2) throw DataError("matrix too small for LSA");
    const std::size_t k = std::clamp<std::size_t>(config.svd_k, 1, min_dim - 1);
    model.svd = truncated_svd(x, k, rng::mix(config.seed, kSvdSalt));
    features = FeatureMatrix(project(*model.svd, x));
  } else {
    features = FeatureMatrix(x);
  }

  // Multinomial NB needs nonnegative input; LSA features are signed, so shift
  // each column by its training minimum (clamped at zero on new data).
  if (config.classifier == ClassifierFamily::NaiveBayes && config.use_svd) {
    const auto& dense = std::get<DenseMatrix>(features.data);
    model.nb_offset.assign(dense.cols, 0.0);
    for (std::size_t j = 0; j < dense.cols; ++j) {
      double lo = 0.0;
      for (std::size_t i = 0; i < dense.rows; ++i) lo = std::min(lo, dense.at(i, j));
      model.nb_offset[j] = lo;
    }
    DenseMatrix shifted = dense;
    for (std::size_t i = 0; i < shifted.rows; ++i)
      for (std::size_t j = 0; j < shifted.cols; ++j)
        shifted.at(i, j) = std::max(0.0, shifted.at(i, j) - model.nb_offset[j]);
    features = FeatureMatrix(std::move(shifted));
  }

  switch (config.classifier) {
    case ClassifierFamily::LogReg:
      model.classifier = fit_logreg(features, labels, config.params.c_reg, config.params.tol,
                                    config.params.max_iter);
      break;
    case ClassifierFamily::Forest: {
      ForestOptions options;
      options.n_estimators = config.params.n_estimators;
      options.max_depth = config.params.max_depth;
      options.min_samples_leaf = config.params.min_samples_leaf;
      options.bootstrap = config.params.bootstrap;
      model.classifier = fit_forest(features, labels, options, rng::mix(config.seed, kForestSalt));
      break;
    }
    case ClassifierFamily::NaiveBayes:
      model.classifier = fit_naive_bayes(features, labels, config.params.alpha);
      break;
    case ClassifierFamily::Knn:
      model.classifier = fit_knn(features, labels, config.params.k_nn);
      break;
  }
  return model;
}

FeatureMatrix pipeline_transform(const PipelineModel& model, const std::vector<std::string>& texts) {
  const std::vector<TokenList> docs = prep_all(model.config, model.lexicons, texts);
  SparseMatrix x = count_vectorize(docs, model.vocabulary);
  if (model.config.vectorizer == VectorizerKind::Tfidf) {
    if (!model.idf.has_value()) throw DataError("model lacks idf weights");
    x = apply_tfidf(x, *model.idf);
  }
  if (model.config.use_svd) {
    if (!model.svd.has_value()) throw DataError("model lacks LSA factors");
    DenseMatrix projected = project(*model.svd, x);
    if (!model.nb_offset.empty()) {
      for (std::size_t i = 0; i < projected.rows; ++i)
        for (std::size_t j = 0; j < projected.cols; ++j)
          projected.at(i, j) = std::max(0.0, projected.at(i, j) - model.nb_offset[j]);
    }
    return FeatureMatrix(std::move(projected));
  }
  return FeatureMatrix(std::move(x));
}

std::vector<double> pipeline_predict_proba(const PipelineModel& model,
                                           const std::vector<std::string>& texts) {
  return predict_proba(model.classifier, pipeline_transform(model, texts));
}

std::vector<double> pipeline_predict_proba(const PipelineModel& model, const Dataset& data) {
  return pipeline_predict_proba(model, texts_of(data));
}

DenseMatrix pipeline_dense_features(const PipelineModel& model,
                                    const std::vector<std::string>& texts) {
  const FeatureMatrix features = pipeline_transform(model, texts);
  return features.densify();
}

}  // namespace asag
