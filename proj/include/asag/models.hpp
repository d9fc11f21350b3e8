#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "asag/matrix.hpp"

namespace asag {

// Design matrix handed to the classifiers; rows are documents.
struct FeatureMatrix {
  std::variant<SparseMatrix, DenseMatrix> data;

  FeatureMatrix() : data(SparseMatrix{}) {}
  FeatureMatrix(SparseMatrix m) : data(std::move(m)) {}
  FeatureMatrix(DenseMatrix m) : data(std::move(m)) {}

  std::size_t n_rows() const;
  std::size_t n_cols() const;

  // Applies f(col, value) to the stored entries of one row.
  template <typename F>
  void for_row(std::size_t i, F&& f) const {
    if (const auto* s = std::get_if<SparseMatrix>(&data)) {
      for (std::size_t k = s->row_offsets[i]; k < s->row_offsets[i + 1]; ++k)
        f(s->col_indices[k], s->values[k]);
    } else {
      const auto& d = std::get<DenseMatrix>(data);
      for (std::size_t j = 0; j < d.cols; ++j) {
        if (d.at(i, j) != 0.0) f(j, d.at(i, j));
      }
    }
  }

  // Dense copy; refuses pathologically wide matrices.
  DenseMatrix densify(std::size_t max_cols = 20000) const;

  void check_finite() const;
};

struct LogRegModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double c_reg = 1.0;
  bool converged = false;
  std::size_t n_iters = 0;
};

// Minimizes 0.5*|w|^2 + c_reg * sum_i softplus(-y_i * (w.x_i + b)) with labels
// mapped to {-1,+1} and an unpenalized intercept. Full-batch gradient descent
// with backtracking line search; stops when the gradient infinity norm falls
// below tol.
LogRegModel fit_logreg(const FeatureMatrix& x, const std::vector<int>& y, double c_reg = 1.0,
                       double tol = 1e-6, std::size_t max_iter = 1000);

// Objective and gradient of the regularized logistic loss, exposed for
// gradient checking.
double logreg_objective(const FeatureMatrix& x, const std::vector<int>& y, double c_reg,
                        const std::vector<double>& weights, double intercept);
void logreg_gradient(const FeatureMatrix& x, const std::vector<int>& y, double c_reg,
                     const std::vector<double>& weights, double intercept,
                     std::vector<double>& grad_w, double& grad_b);

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double count0 = 0.0;  // leaf class counts
  double count1 = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;
};

struct ForestOptions {
  std::size_t n_estimators = 200;
  std::optional<std::size_t> max_depth;  // unlimited when absent
  std::size_t min_samples_leaf = 1;
  bool bootstrap = true;
  std::size_t n_threads = 1;
};

struct ForestModel {
  std::vector<Tree> trees;
  ForestOptions options;
  std::uint64_t seed = 0;
  std::size_t n_features = 0;
};

// Gini-impurity CART forest. Tree i draws its bootstrap sample and split
// features from an engine seeded with seed + i, so serial and parallel
// training build identical forests. Each split evaluates ceil(sqrt(d))
// features and thresholds at midpoints of consecutive distinct values; ties
// prefer the lowest feature id, then the lowest threshold.
ForestModel fit_forest(const FeatureMatrix& x, const std::vector<int>& y,
                       const ForestOptions& options, std::uint64_t seed);

struct NaiveBayesModel {
  std::array<double, 2> log_prior{0.0, 0.0};
  std::vector<double> loglik0;  // per-feature log likelihood, class 0
  std::vector<double> loglik1;
  double alpha = 1.0;
};

// Multinomial naive Bayes with add-alpha smoothing; features must be nonnegative.
NaiveBayesModel fit_naive_bayes(const FeatureMatrix& x, const std::vector<int>& y,
                                double alpha = 1.0);

struct KnnModel {
  DenseMatrix train;
  std::vector<int> labels;
  std::size_t k_nn = 5;
};

// Euclidean k-nearest-neighbors; distance ties prefer the lower training row index.
KnnModel fit_knn(const FeatureMatrix& x, const std::vector<int>& y, std::size_t k_nn = 5);

std::vector<double> predict_proba(const LogRegModel& model, const FeatureMatrix& x);
std::vector<double> predict_proba(const ForestModel& model, const FeatureMatrix& x);
std::vector<double> predict_proba(const NaiveBayesModel& model, const FeatureMatrix& x);
std::vector<double> predict_proba(const KnnModel& model, const FeatureMatrix& x);

using AnyClassifier = std::variant<LogRegModel, ForestModel, NaiveBayesModel, KnnModel>;

std::vector<double> predict_proba(const AnyClassifier& model, const FeatureMatrix& x);
std::size_t feature_dimension(const AnyClassifier& model);

inline int label_of(double probability) { return probability >= 0.5 ? 1 : 0; }
std::vector<int> predict_labels(const std::vector<double>& probabilities);

enum class VotingMode { Hard, Soft };

struct VotingEnsemble {
  std::vector<AnyClassifier> members;
  VotingMode mode = VotingMode::Soft;
};

struct EnsemblePrediction {
  std::vector<int> labels;
  std::vector<double> probabilities;  // mean of member probabilities
};

// Hard mode: majority label, ties resolved by the mean probability at 0.5.
// Soft mode: mean probability thresholded at 0.5.
EnsemblePrediction ensemble_predict(const VotingEnsemble& ensemble, const FeatureMatrix& x);

}  // namespace asag
