#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asag/matrix.hpp"

namespace asag {

struct TsneConfig {
  double perplexity = 30.0;
  std::size_t n_iters = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iters = 250;
  std::uint64_t seed = 0;
};

struct Embedding2D {
  DenseMatrix points;  // n x 2, one row per input point
  double kl_divergence = 0.0;
  std::string notice;  // set when duplicate rows were folded together
};

DenseMatrix pairwise_sq_distances(const DenseMatrix& x);

// Per-point Gaussian bandwidths calibrated by bisection so that the entropy of
// the conditional neighbor distribution hits log2(perplexity) within 1e-5.
// Optional weights fold duplicate-point multiplicities into the distribution.
std::vector<double> calibrate_sigma(const DenseMatrix& sq_distances, double perplexity,
                                    const std::vector<double>& weights = {});

// Symmetrized joint neighbor probabilities (nonnegative, sums to 1).
DenseMatrix joint_probabilities(const DenseMatrix& sq_distances, double perplexity,
                                const std::vector<double>& weights = {});

// KL(P || Q) for a 2-D embedding y under the Student-t kernel, optionally with
// its gradient (n x 2).
double kl_objective(const DenseMatrix& p, const DenseMatrix& y, DenseMatrix* grad = nullptr);

// Exact O(n^2) t-SNE with early exaggeration, momentum switching, per-iteration
// re-centering, and a step-halving safeguard that keeps the KL divergence
// nonincreasing once exaggeration ends. Duplicate rows are folded into one
// point with multiplicity and share coordinates in the output.
Embedding2D tsne(const DenseMatrix& x, const TsneConfig& config);

struct HistogramData {
  std::vector<double> edges;   // n_bins + 1, uniform over [0, 1]
  std::vector<std::size_t> counts;
  std::vector<std::size_t> counts_pos;  // per-class split, empty without labels
  std::vector<std::size_t> counts_neg;
};

// Uniform bins over [0, 1], right-open except the last.
HistogramData probability_histogram(const std::vector<double>& probs, std::size_t n_bins = 20,
                                    const std::vector<int>* labels = nullptr);

struct BandCount {
  std::size_t count = 0;
  double fraction = 0.0;
  bool fraction_defined = false;
};

// Inclusive count of probabilities within [lo, hi].
BandCount uncertainty_band_count(const std::vector<double>& probs, double lo = 0.4,
                                 double hi = 0.6);

// CSV and self-contained SVG renderings.
void write_embedding_csv(const std::string& path, const std::vector<std::string>& ids,
                         const Embedding2D& embedding,
                         const std::vector<std::optional<int>>& labels);
std::string embedding_svg(const Embedding2D& embedding,
                          const std::vector<std::optional<int>>& labels);
void write_histogram_csv(const std::string& path, const HistogramData& hist);
std::string histogram_svg(const HistogramData& hist);

}  // namespace asag
