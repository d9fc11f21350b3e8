#include "asag/models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "asag/errors.hpp"
#include "asag/rng.hpp"

namespace asag {

namespace {

double softplus(double x) {
  // ln(1 + e^x) without overflow.
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_binary_labels(const std::vector<int>& y) {
  for (int v : y) {
    if (v != 0 && v != 1) throw DataError("labels must be 0 or 1");
  }
}

void check_rows_match(std::size_t n_rows, const std::vector<int>& y) {
  if (n_rows != y.size()) throw DataError("row count does not match label count");
}

}  // namespace

std::size_t FeatureMatrix::n_rows() const {
  return std::visit([](const auto& m) {
    if constexpr (std::is_same_v<std::decay_t<decltype(m)>, SparseMatrix>) return m.n_rows;
    else return m.rows;
  }, data);
}

std::size_t FeatureMatrix::n_cols() const {
  return std::visit([](const auto& m) {
    if constexpr (std::is_same_v<std::decay_t<decltype(m)>, SparseMatrix>) return m.n_cols;
    else return m.cols;
  }, data);
}

DenseMatrix FeatureMatrix::densify(std::size_t max_cols) const {
  if (n_cols() > max_cols)
    throw DataError("refusing to densify a matrix with " + std::to_string(n_cols()) +
                    " columns (limit " + std::to_string(max_cols) + ")");
  if (const auto* s = std::get_if<SparseMatrix>(&data)) return s->to_dense();
  return std::get<DenseMatrix>(data);
}

void FeatureMatrix::check_finite() const {
  const auto check = [](const std::vector<double>& values) {
    for (double v : values) {
      if (!std::isfinite(v)) throw DataError("feature matrix contains non-finite values");
    }
  };
  if (const auto* s = std::get_if<SparseMatrix>(&data)) check(s->values);
  else check(std::get<DenseMatrix>(data).data);
}

double logreg_objective(const FeatureMatrix& x, const std::vector<int>& y, double c_reg,
                        const std::vector<double>& weights, double intercept) {
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double z = intercept;
    x.for_row(i, [&](std::size_t j, double v) { z += weights[j] * v; });
    const double margin = (y[i] == 1 ? 1.0 : -1.0) * z;
    loss += softplus(-margin);
  }
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  return 0.5 * reg + c_reg * loss;
}

void logreg_gradient(const FeatureMatrix& x, const std::vector<int>& y, double c_reg,
                     const std::vector<double>& weights, double intercept,
                     std::vector<double>& grad_w, double& grad_b) {
  grad_w.assign(weights.size(), 0.0);
  grad_b = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double z = intercept;
    x.for_row(i, [&](std::size_t j, double v) { z += weights[j] * v; });
    const double sign = y[i] == 1 ? 1.0 : -1.0;
    const double coef = -c_reg * sign * sigmoid(-sign * z);
    x.for_row(i, [&](std::size_t j, double v) { grad_w[j] += coef * v; });
    grad_b += coef;
  }
  for (std::size_t j = 0; j < weights.size(); ++j) grad_w[j] += weights[j];
}

LogRegModel fit_logreg(const FeatureMatrix& x, const std::vector<int>& y, double c_reg,
                       double tol, std::size_t max_iter) {
  check_rows_match(x.n_rows(), y);
  check_binary_labels(y);
  x.check_finite();
  if (c_reg <= 0.0) throw DataError("c_reg must be positive");
  const auto positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  if (positives == 0 || positives == y.size())
    throw DataError("logistic regression needs both classes present");

  LogRegModel model;
  model.c_reg = c_reg;
  model.weights.assign(x.n_cols(), 0.0);
  model.intercept = 0.0;

  std::vector<double> grad(x.n_cols(), 0.0);
  double grad_b = 0.0;
  double step = 1.0;
  double objective = logreg_objective(x, y, c_reg, model.weights, model.intercept);

  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    logreg_gradient(x, y, c_reg, model.weights, model.intercept, grad, grad_b);
    double inf_norm = std::abs(grad_b);
    double sq_norm = grad_b * grad_b;
    for (double g : grad) {
      inf_norm = std::max(inf_norm, std::abs(g));
      sq_norm += g * g;
    }
    if (inf_norm <= tol) {
      model.converged = true;
      break;
    }

    // Backtracking line search on the steepest-descent direction.
    step *= 2.0;
    std::vector<double> trial_w(model.weights.size());
    double trial_b = 0.0;
    double trial_obj = 0.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t j = 0; j < trial_w.size(); ++j)
        trial_w[j] = model.weights[j] - step * grad[j];
      trial_b = model.intercept - step * grad_b;
      trial_obj = logreg_objective(x, y, c_reg, trial_w, trial_b);
      if (trial_obj <= objective - 1e-4 * step * sq_norm) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // step underflow: no further descent possible
    model.weights.swap(trial_w);
    model.intercept = trial_b;
    objective = trial_obj;
  }
  model.n_iters = iter;
  return model;
}

std::vector<double> predict_proba(const LogRegModel& model, const FeatureMatrix& x) {
  if (x.n_cols() != model.weights.size())
    throw DataError("logreg: feature dimension mismatch");
  std::vector<double> probs(x.n_rows());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double z = model.intercept;
    x.for_row(i, [&](std::size_t j, double v) { z += model.weights[j] * v; });
    probs[i] = sigmoid(z);
  }
  return probs;
}

namespace {

struct SplitChoice {
  double gini = std::numeric_limits<double>::infinity();
  std::int32_t feature = -1;
  double threshold = 0.0;
};

double weighted_gini(double l0, double l1, double r0, double r1) {
  const double nl = l0 + l1;
  const double nr = r0 + r1;
  const double gl = nl > 0.0 ? 1.0 - (l0 * l0 + l1 * l1) / (nl * nl) : 0.0;
  const double gr = nr > 0.0 ? 1.0 - (r0 * r0 + r1 * r1) / (nr * nr) : 0.0;
  return (nl * gl + nr * gr) / (nl + nr);
}

class TreeBuilder {
public:
  TreeBuilder(const DenseMatrix& x, const std::vector<int>& y, const ForestOptions& options,
              rng::Engine& engine)
      : x_(x), y_(y), options_(options), engine_(engine),
        n_split_features_(static_cast<std::size_t>(
            std::ceil(std::sqrt(static_cast<double>(x.cols))))) {}

  Tree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

private:
  std::int32_t make_leaf(const std::vector<std::size_t>& rows) {
    TreeNode node;
    for (std::size_t r : rows) {
      if (y_[r] == 1) node.count1 += 1.0;
      else node.count0 += 1.0;
    }
    tree_.nodes.push_back(node);
    return static_cast<std::int32_t>(tree_.nodes.size() - 1);
  }

  std::vector<std::size_t> sample_features() {
    const std::size_t d = x_.cols;
    const std::size_t take = std::min(n_split_features_, d);
    std::vector<std::size_t> pool(d);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + engine_.index(d - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(take);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  std::int32_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    std::size_t n1 = 0;
    for (std::size_t r : rows) n1 += static_cast<std::size_t>(y_[r] == 1);
    const bool pure = n1 == 0 || n1 == rows.size();
    const bool depth_capped = options_.max_depth && depth >= *options_.max_depth;
    if (pure || depth_capped || rows.size() < 2 * options_.min_samples_leaf ||
        rows.size() < 2) {
      return make_leaf(rows);
    }

    const SplitChoice split = best_split(rows);
    if (split.feature < 0) return make_leaf(rows);

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      if (x_.at(r, static_cast<std::size_t>(split.feature)) <= split.threshold)
        left_rows.push_back(r);
      else
        right_rows.push_back(r);
    }

    const std::int32_t node_id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{split.feature, split.threshold, -1, -1, 0.0, 0.0});
    rows.clear();
    rows.shrink_to_fit();
    const std::int32_t left_id = grow(std::move(left_rows), depth + 1);
    const std::int32_t right_id = grow(std::move(right_rows), depth + 1);
    tree_.nodes[node_id].left = left_id;
    tree_.nodes[node_id].right = right_id;
    return node_id;
  }

  SplitChoice best_split(const std::vector<std::size_t>& rows) {
    SplitChoice best;
    std::vector<std::pair<double, int>> ordered(rows.size());
    for (const std::size_t f : sample_features()) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        ordered[i] = {x_.at(rows[i], f), y_[rows[i]]};
      std::sort(ordered.begin(), ordered.end());
      if (ordered.front().first == ordered.back().first) continue;

      double total0 = 0.0, total1 = 0.0;
      for (const auto& [_, label] : ordered) (label == 1 ? total1 : total0) += 1.0;

      double l0 = 0.0, l1 = 0.0;
      for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
        (ordered[i].second == 1 ? l1 : l0) += 1.0;
        if (ordered[i].first == ordered[i + 1].first) continue;
        const std::size_t n_left = i + 1;
        const std::size_t n_right = ordered.size() - n_left;
        if (n_left < options_.min_samples_leaf || n_right < options_.min_samples_leaf)
          continue;
        const double threshold = ordered[i].first + 0.5 * (ordered[i + 1].first - ordered[i].first);
        const double g = weighted_gini(l0, l1, total0 - l0, total1 - l1);
        if (g < best.gini) {
          best.gini = g;
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = threshold;
        }
      }
    }
    return best;
  }

  const DenseMatrix& x_;
  const std::vector<int>& y_;
  const ForestOptions& options_;
  rng::Engine& engine_;
  std::size_t n_split_features_;
  Tree tree_;
};

Tree fit_one_tree(const DenseMatrix& x, const std::vector<int>& y, const ForestOptions& options,
                  std::uint64_t seed, std::size_t tree_index) {
  rng::Engine engine(seed + tree_index);
  std::vector<std::size_t> rows(x.rows);
  if (options.bootstrap) {
    for (std::size_t i = 0; i < x.rows; ++i) rows[i] = engine.index(x.rows);
  } else {
    std::iota(rows.begin(), rows.end(), 0);
  }
  TreeBuilder builder(x, y, options, engine);
  return builder.build(std::move(rows));
}

double tree_proba(const Tree& tree, std::span<const double> row) {
  std::int32_t node = 0;
  while (!tree.nodes[node].is_leaf()) {
    const TreeNode& t = tree.nodes[node];
    node = row[static_cast<std::size_t>(t.feature)] <= t.threshold ? t.left : t.right;
  }
  const TreeNode& leaf = tree.nodes[node];
  return leaf.count1 / (leaf.count0 + leaf.count1);
}

}  // namespace

ForestModel fit_forest(const FeatureMatrix& x, const std::vector<int>& y,
                       const ForestOptions& options, std::uint64_t seed) {
  check_rows_match(x.n_rows(), y);
  check_binary_labels(y);
  x.check_finite();
  if (options.n_estimators < 1) throw DataError("n_estimators must be at least 1");
  if (x.n_rows() < 2) throw DataError("forest needs at least 2 training rows");

  const DenseMatrix dense = x.densify();
  ForestModel model;
  model.options = options;
  model.seed = seed;
  model.n_features = dense.cols;
  model.trees.resize(options.n_estimators);

  const std::size_t n_threads = std::max<std::size_t>(1, options.n_threads);
  if (n_threads == 1) {
    for (std::size_t i = 0; i < options.n_estimators; ++i)
      model.trees[i] = fit_one_tree(dense, y, options, seed, i);
  } else {
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    for (std::size_t t = 0; t < n_threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < options.n_estimators;
             i = next.fetch_add(1)) {
          model.trees[i] = fit_one_tree(dense, y, options, seed, i);
        }
      });
    }
    for (auto& w : workers) w.join();
  }
  return model;
}

std::vector<double> predict_proba(const ForestModel& model, const FeatureMatrix& x) {
  if (x.n_cols() != model.n_features) throw DataError("forest: feature dimension mismatch");
  if (model.trees.empty()) throw DataError("forest: model not fitted");
  const DenseMatrix dense = x.densify();
  std::vector<double> probs(dense.rows, 0.0);
  for (std::size_t i = 0; i < dense.rows; ++i) {
    double total = 0.0;
    for (const Tree& tree : model.trees) total += tree_proba(tree, dense.row(i));
    probs[i] = total / static_cast<double>(model.trees.size());
  }
  return probs;
}

NaiveBayesModel fit_naive_bayes(const FeatureMatrix& x, const std::vector<int>& y, double alpha) {
  check_rows_match(x.n_rows(), y);
  check_binary_labels(y);
  x.check_finite();
  if (alpha <= 0.0) throw DataError("alpha must be positive");

  const std::size_t d = x.n_cols();
  std::vector<double> sums0(d, 0.0), sums1(d, 0.0);
  std::array<std::size_t, 2> class_counts{0, 0};
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto& sums = y[i] == 1 ? sums1 : sums0;
    ++class_counts[static_cast<std::size_t>(y[i])];
    x.for_row(i, [&](std::size_t j, double v) {
      if (v < 0.0) throw DataError("naive Bayes requires nonnegative features");
      sums[j] += v;
    });
  }

  NaiveBayesModel model;
  model.alpha = alpha;
  const double n = static_cast<double>(y.size());
  model.log_prior = {std::log(static_cast<double>(class_counts[0]) / n),
                     std::log(static_cast<double>(class_counts[1]) / n)};
  model.loglik0.resize(d);
  model.loglik1.resize(d);
  const double total0 = std::accumulate(sums0.begin(), sums0.end(), 0.0);
  const double total1 = std::accumulate(sums1.begin(), sums1.end(), 0.0);
  const double dd = static_cast<double>(d);
  for (std::size_t j = 0; j < d; ++j) {
    model.loglik0[j] = std::log((sums0[j] + alpha) / (total0 + alpha * dd));
    model.loglik1[j] = std::log((sums1[j] + alpha) / (total1 + alpha * dd));
  }
  return model;
}

std::vector<double> predict_proba(const NaiveBayesModel& model, const FeatureMatrix& x) {
  if (x.n_cols() != model.loglik0.size())
    throw DataError("naive Bayes: feature dimension mismatch");
  std::vector<double> probs(x.n_rows());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double log0 = model.log_prior[0];
    double log1 = model.log_prior[1];
    x.for_row(i, [&](std::size_t j, double v) {
      if (v < 0.0) throw DataError("naive Bayes requires nonnegative features");
      log0 += v * model.loglik0[j];
      log1 += v * model.loglik1[j];
    });
    const double peak = std::max(log0, log1);
    const double e0 = std::exp(log0 - peak);
    const double e1 = std::exp(log1 - peak);
    probs[i] = e1 / (e0 + e1);
  }
  return probs;
}

KnnModel fit_knn(const FeatureMatrix& x, const std::vector<int>& y, std::size_t k_nn) {
  check_rows_match(x.n_rows(), y);
  check_binary_labels(y);
  x.check_finite();
  if (k_nn < 1) throw DataError("k_nn must be at least 1");
  if (k_nn > x.n_rows()) throw DataError("k_nn exceeds the number of training rows");
  KnnModel model;
  model.train = x.densify();
  model.labels = y;
  model.k_nn = k_nn;
  return model;
}

std::vector<double> predict_proba(const KnnModel& model, const FeatureMatrix& x) {
  if (x.n_cols() != model.train.cols) throw DataError("knn: feature dimension mismatch");
  const DenseMatrix queries = x.densify();
  std::vector<double> probs(queries.rows);
  std::vector<std::pair<double, std::size_t>> dist(model.train.rows);
  for (std::size_t i = 0; i < queries.rows; ++i) {
    const auto q = queries.row(i);
    for (std::size_t r = 0; r < model.train.rows; ++r) {
      const auto t = model.train.row(r);
      double sq = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) {
        const double diff = q[j] - t[j];
        sq += diff * diff;
      }
      dist[r] = {sq, r};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(model.k_nn),
                      dist.end());
    std::size_t votes = 0;
    for (std::size_t k = 0; k < model.k_nn; ++k) votes += static_cast<std::size_t>(model.labels[dist[k].second] == 1);
    probs[i] = static_cast<double>(votes) / static_cast<double>(model.k_nn);
  }
  return probs;
}

std::vector<double> predict_proba(const AnyClassifier& model, const FeatureMatrix& x) {
  return std::visit([&](const auto& m) { return predict_proba(m, x); }, model);
}

std::size_t feature_dimension(const AnyClassifier& model) {
  return std::visit([](const auto& m) -> std::size_t {
    using T = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<T, LogRegModel>) return m.weights.size();
    else if constexpr (std::is_same_v<T, ForestModel>) return m.n_features;
    else if constexpr (std::is_same_v<T, NaiveBayesModel>) return m.loglik0.size();
    else return m.train.cols;
  }, model);
}

std::vector<int> predict_labels(const std::vector<double>& probabilities) {
  std::vector<int> labels(probabilities.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = label_of(probabilities[i]);
  return labels;
}

EnsemblePrediction ensemble_predict(const VotingEnsemble& ensemble, const FeatureMatrix& x) {
  if (ensemble.members.size() < 2) throw DataError("voting ensemble needs at least 2 members");
  const std::size_t dim = feature_dimension(ensemble.members.front());
  for (const auto& member : ensemble.members) {
    if (feature_dimension(member) != dim)
      throw DataError("voting ensemble members disagree on feature dimension");
  }

  const std::size_t n = x.n_rows();
  std::vector<std::vector<double>> member_probs;
  member_probs.reserve(ensemble.members.size());
  for (const auto& member : ensemble.members) member_probs.push_back(predict_proba(member, x));

  EnsemblePrediction out;
  out.labels.resize(n);
  out.probabilities.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    std::size_t votes = 0;
    for (const auto& probs : member_probs) {
      mean += probs[i];
      votes += static_cast<std::size_t>(label_of(probs[i]) == 1);
    }
    mean /= static_cast<double>(ensemble.members.size());
    out.probabilities[i] = mean;
    if (ensemble.mode == VotingMode::Soft) {
      out.labels[i] = label_of(mean);
    } else {
      const std::size_t against = ensemble.members.size() - votes;
      if (votes > against) out.labels[i] = 1;
      else if (votes < against) out.labels[i] = 0;
      else out.labels[i] = label_of(mean);
    }
  }
  return out;
}

}  // namespace asag
