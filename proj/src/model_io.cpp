#include "asag/model_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "asag/base64.hpp"
#include "asag/errors.hpp"

namespace asag {

namespace {

using json = nlohmann::json;

json dense_to_json(const DenseMatrix& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"data", pack_f64(m.data)}};
}

DenseMatrix dense_from_json(const json& j) {
  DenseMatrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data = unpack_f64(j.at("data").get<std::string>(), m.rows * m.cols);
  return m;
}

json f64_to_json(const std::vector<double>& v) {
  return json{{"count", v.size()}, {"data", pack_f64(v)}};
}

std::vector<double> f64_from_json(const json& j) {
  return unpack_f64(j.at("data").get<std::string>(), j.at("count").get<std::size_t>());
}

json i32_to_json(const std::vector<std::int32_t>& v) {
  return json{{"count", v.size()}, {"data", pack_i32(v)}};
}

std::vector<std::int32_t> i32_from_json(const json& j) {
  return unpack_i32(j.at("data").get<std::string>(), j.at("count").get<std::size_t>());
}

json tree_to_json(const Tree& tree) {
  const std::size_t n = tree.nodes.size();
  std::vector<std::int32_t> feature(n), left(n), right(n);
  std::vector<double> threshold(n), count0(n), count1(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TreeNode& node = tree.nodes[i];
    feature[i] = node.feature;
    left[i] = node.left;
    right[i] = node.right;
    threshold[i] = node.threshold;
    count0[i] = node.count0;
    count1[i] = node.count1;
  }
  return json{{"n_nodes", n},
              {"feature", pack_i32(feature)},
              {"left", pack_i32(left)},
              {"right", pack_i32(right)},
              {"threshold", pack_f64(threshold)},
              {"count0", pack_f64(count0)},
              {"count1", pack_f64(count1)}};
}

Tree tree_from_json(const json& j) {
  const auto n = j.at("n_nodes").get<std::size_t>();
  const auto feature = unpack_i32(j.at("feature").get<std::string>(), n);
  const auto left = unpack_i32(j.at("left").get<std::string>(), n);
  const auto right = unpack_i32(j.at("right").get<std::string>(), n);
  const auto threshold = unpack_f64(j.at("threshold").get<std::string>(), n);
  const auto count0 = unpack_f64(j.at("count0").get<std::string>(), n);
  const auto count1 = unpack_f64(j.at("count1").get<std::string>(), n);
  Tree tree;
  tree.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    tree.nodes[i] = TreeNode{feature[i], threshold[i], left[i], right[i], count0[i], count1[i]};
  }
  return tree;
}

json classifier_to_json(const AnyClassifier& classifier) {
  json j;
  if (const auto* logreg = std::get_if<LogRegModel>(&classifier)) {
    j["family"] = "logreg";
    j["weights"] = f64_to_json(logreg->weights);
    j["intercept"] = f64_to_json({logreg->intercept});
    j["c_reg"] = logreg->c_reg;
    j["converged"] = logreg->converged;
    j["n_iters"] = logreg->n_iters;
  } else if (const auto* forest = std::get_if<ForestModel>(&classifier)) {
    j["family"] = "forest";
    j["seed"] = forest->seed;
    j["n_features"] = forest->n_features;
    j["n_estimators"] = forest->options.n_estimators;
    if (forest->options.max_depth) j["max_depth"] = *forest->options.max_depth;
    j["min_samples_leaf"] = forest->options.min_samples_leaf;
    j["bootstrap"] = forest->options.bootstrap;
    json trees = json::array();
    for (const Tree& tree : forest->trees) trees.push_back(tree_to_json(tree));
    j["trees"] = std::move(trees);
  } else if (const auto* nb = std::get_if<NaiveBayesModel>(&classifier)) {
    j["family"] = "naive_bayes";
    j["log_prior"] = f64_to_json({nb->log_prior[0], nb->log_prior[1]});
    j["loglik0"] = f64_to_json(nb->loglik0);
    j["loglik1"] = f64_to_json(nb->loglik1);
    j["alpha"] = nb->alpha;
  } else {
    const auto& knn = std::get<KnnModel>(classifier);
    j["family"] = "knn";
    j["train"] = dense_to_json(knn.train);
    std::vector<std::int32_t> labels(knn.labels.begin(), knn.labels.end());
    j["labels"] = i32_to_json(labels);
    j["k_nn"] = knn.k_nn;
  }
  return j;
}

AnyClassifier classifier_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "logreg") {
    LogRegModel m;
    m.weights = f64_from_json(j.at("weights"));
    m.intercept = f64_from_json(j.at("intercept")).at(0);
    m.c_reg = j.at("c_reg").get<double>();
    m.converged = j.at("converged").get<bool>();
    m.n_iters = j.at("n_iters").get<std::size_t>();
    return m;
  }
  if (family == "forest") {
    ForestModel m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.options.n_estimators = j.at("n_estimators").get<std::size_t>();
    if (j.contains("max_depth")) m.options.max_depth = j["max_depth"].get<std::size_t>();
    m.options.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
    m.options.bootstrap = j.at("bootstrap").get<bool>();
    for (const json& tj : j.at("trees")) m.trees.push_back(tree_from_json(tj));
    if (m.trees.size() != m.options.n_estimators)
      throw DataError("model file: tree count mismatch");
    return m;
  }
  if (family == "naive_bayes") {
    NaiveBayesModel m;
    const auto prior = f64_from_json(j.at("log_prior"));
    if (prior.size() != 2) throw DataError("model file: bad prior size");
    m.log_prior = {prior[0], prior[1]};
    m.loglik0 = f64_from_json(j.at("loglik0"));
    m.loglik1 = f64_from_json(j.at("loglik1"));
    m.alpha = j.at("alpha").get<double>();
    if (m.loglik0.size() != m.loglik1.size()) throw DataError("model file: likelihood size mismatch");
    return m;
  }
  if (family == "knn") {
    KnnModel m;
    m.train = dense_from_json(j.at("train"));
    const auto labels = i32_from_json(j.at("labels"));
    m.labels.assign(labels.begin(), labels.end());
    m.k_nn = j.at("k_nn").get<std::size_t>();
    if (m.labels.size() != m.train.rows) throw DataError("model file: label count mismatch");
    return m;
  }
  throw DataError("model file: unknown classifier family " + family);
}

json lexicons_to_json(const LexiconSet& lex) {
  json j;
  j["slang"] = lex.slang_map;
  j["lemma"] = lex.lemma_map;
  j["stopwords"] = lex.stopwords;
  j["reference_vocab"] = lex.reference_vocab;
  return j;
}

LexiconSet lexicons_from_json(const json& j) {
  LexiconSet lex;
  lex.slang_map = j.at("slang").get<std::map<std::string, std::string>>();
  lex.lemma_map = j.at("lemma").get<std::map<std::string, std::string>>();
  for (const auto& w : j.at("stopwords")) lex.stopwords.insert(w.get<std::string>());
  for (const auto& w : j.at("reference_vocab")) lex.reference_vocab.insert(w.get<std::string>());
  return lex;
}

}  // namespace

json config_to_json(const PipelineConfig& config) {
  json j;
  j["prep"] = {{"use_slang_norm", config.prep.use_slang_norm},
               {"use_typo_correction", config.prep.use_typo_correction},
               {"typo_cutoff", config.prep.typo_cutoff},
               {"use_lemmatize", config.prep.use_lemmatize},
               {"use_stopword_removal", config.prep.use_stopword_removal}};
  j["vectorizer"] = to_string(config.vectorizer);
  j["use_svd"] = config.use_svd;
  j["svd_k"] = config.svd_k;
  j["min_df"] = config.min_df;
  j["classifier"] = to_string(config.classifier);
  json params;
  params["c_reg"] = config.params.c_reg;
  params["tol"] = config.params.tol;
  params["max_iter"] = config.params.max_iter;
  params["n_estimators"] = config.params.n_estimators;
  if (config.params.max_depth) params["max_depth"] = *config.params.max_depth;
  params["min_samples_leaf"] = config.params.min_samples_leaf;
  params["bootstrap"] = config.params.bootstrap;
  params["alpha"] = config.params.alpha;
  params["k_nn"] = config.params.k_nn;
  j["params"] = std::move(params);
  j["seed"] = config.seed;
  j["use_label_overlay"] = config.use_label_overlay;
  j["overlay_path"] = config.overlay_path;
  return j;
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig config;
  if (j.contains("prep")) {
    const json& p = j["prep"];
    config.prep.use_slang_norm = p.value("use_slang_norm", false);
    config.prep.use_typo_correction = p.value("use_typo_correction", false);
    config.prep.typo_cutoff = p.value("typo_cutoff", 0.6);
    config.prep.use_lemmatize = p.value("use_lemmatize", false);
    config.prep.use_stopword_removal = p.value("use_stopword_removal", false);
  }
  config.vectorizer = vectorizer_from_string(j.value("vectorizer", "unigram"));
  config.use_svd = j.value("use_svd", false);
  config.svd_k = j.value("svd_k", std::size_t{100});
  config.min_df = j.value("min_df", std::size_t{1});
  config.classifier = classifier_from_string(j.value("classifier", "forest"));
  if (j.contains("params")) {
    const json& p = j["params"];
    config.params.c_reg = p.value("c_reg", 1.0);
    config.params.tol = p.value("tol", 1e-6);
    config.params.max_iter = p.value("max_iter", std::size_t{1000});
    config.params.n_estimators = p.value("n_estimators", std::size_t{200});
    if (p.contains("max_depth")) config.params.max_depth = p["max_depth"].get<std::size_t>();
    config.params.min_samples_leaf = p.value("min_samples_leaf", std::size_t{1});
    config.params.bootstrap = p.value("bootstrap", true);
    config.params.alpha = p.value("alpha", 1.0);
    config.params.k_nn = p.value("k_nn", std::size_t{5});
  }
  config.seed = j.value("seed", std::uint64_t{0});
  config.use_label_overlay = j.value("use_label_overlay", false);
  config.overlay_path = j.value("overlay_path", std::string{});
  config.prep.validate();
  return config;
}

json model_to_json(const PipelineModel& model) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["task"] = to_string(model.task);
  j["config"] = config_to_json(model.config);
  j["lexicons"] = lexicons_to_json(model.lexicons);
  j["vocabulary"] = {{"terms", model.vocabulary.terms}, {"doc_freq", model.vocabulary.doc_freq}};
  if (model.idf) {
    j["idf"] = {{"n_docs", model.idf->n_docs_fitted}, {"values", f64_to_json(model.idf->idf)}};
  }
  if (model.svd) {
    json s;
    s["k"] = model.svd->k;
    s["singular_values"] = f64_to_json(model.svd->singular_values);
    s["right_vectors"] = dense_to_json(model.svd->right_vectors);
    j["svd"] = std::move(s);
  }
  if (!model.nb_offset.empty()) j["nb_offset"] = f64_to_json(model.nb_offset);
  j["classifier"] = classifier_to_json(model.classifier);
  j["data_fingerprint"] = model.data_fingerprint;
  j["checksum"] = fnv1a_hex(j.dump());
  return j;
}

PipelineModel model_from_json(const json& doc) {
  if (!doc.contains("format_version"))
    throw DataError("model file: missing format_version");
  const int version = doc["format_version"].get<int>();
  if (version != kModelFormatVersion)
    throw DataError("model file: unsupported format_version " + std::to_string(version));

  json body = doc;
  if (!body.contains("checksum")) throw DataError("model file: missing checksum");
  const std::string stored = body["checksum"].get<std::string>();
  body.erase("checksum");
  if (fnv1a_hex(body.dump()) != stored)
    throw DataError("model file: checksum mismatch (corrupted file)");

  PipelineModel model;
  model.config = config_from_json(body.at("config"));
  model.task = task_from_string(body.value("task", "A"));
  model.lexicons = lexicons_from_json(body.at("lexicons"));
  model.vocabulary.terms = body.at("vocabulary").at("terms").get<std::vector<std::string>>();
  model.vocabulary.doc_freq =
      body.at("vocabulary").at("doc_freq").get<std::vector<std::size_t>>();
  if (model.vocabulary.doc_freq.size() != model.vocabulary.terms.size())
    throw DataError("model file: vocabulary size mismatch");
  for (std::size_t i = 0; i < model.vocabulary.terms.size(); ++i)
    model.vocabulary.index.emplace(model.vocabulary.terms[i], i);

  if (body.contains("idf")) {
    IdfWeights idf;
    idf.n_docs_fitted = body["idf"].at("n_docs").get<std::size_t>();
    idf.idf = f64_from_json(body["idf"].at("values"));
    if (idf.idf.size() != model.vocabulary.terms.size())
      throw DataError("model file: idf dimension mismatch");
    model.idf = std::move(idf);
  }
  if (body.contains("svd")) {
    SvdModel svd;
    svd.k = body["svd"].at("k").get<std::size_t>();
    svd.singular_values = f64_from_json(body["svd"].at("singular_values"));
    svd.right_vectors = dense_from_json(body["svd"].at("right_vectors"));
    if (svd.right_vectors.cols != svd.k || svd.singular_values.size() != svd.k)
      throw DataError("model file: svd dimension mismatch");
    if (svd.right_vectors.rows != model.vocabulary.terms.size())
      throw DataError("model file: svd factor does not match vocabulary");
    model.svd = std::move(svd);
  }
  if (body.contains("nb_offset")) model.nb_offset = f64_from_json(body["nb_offset"]);
  model.classifier = classifier_from_json(body.at("classifier"));
  model.data_fingerprint = body.at("data_fingerprint").get<std::string>();

  const std::size_t expected_dim =
      model.svd ? model.svd->k : model.vocabulary.terms.size();
  if (feature_dimension(model.classifier) != expected_dim)
    throw DataError("model file: classifier dimension inconsistent with features");
  return model;
}

void save_model(const PipelineModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path);
  out << model_to_json(model).dump(2) << "\n";
  if (!out) throw DataError("failed writing model file: " + path);
}

PipelineModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw DataError("model file " + path + " is corrupted: " + e.what());
  }
  try {
    return model_from_json(doc);
  } catch (const json::exception& e) {
    throw DataError("model file " + path + " is malformed: " + e.what());
  }
}

PipelineConfig load_config(const std::string& preset_or_path) {
  for (const auto& name : preset_names()) {
    if (preset_or_path == name) return preset_config(name);
  }
  if (!std::filesystem::exists(preset_or_path))
    throw DataError("config is neither a preset nor an existing file: " + preset_or_path);
  std::ifstream in(preset_or_path, std::ios::binary);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw DataError("config file " + preset_or_path + ": " + e.what());
  }
  try {
    return config_from_json(doc);
  } catch (const json::exception& e) {
    throw DataError("config file " + preset_or_path + ": " + e.what());
  }
}

}  // namespace asag
