#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asag/matrix.hpp"
#include "asag/textprep.hpp"

namespace asag {

struct Vocabulary {
  std::vector<std::string> terms;             // lexicographic order
  std::map<std::string, std::size_t> index;   // term -> column
  std::vector<std::size_t> doc_freq;          // aligned with terms

  std::size_t size() const { return terms.size(); }
};

struct IdfWeights {
  std::vector<double> idf;
  std::size_t n_docs_fitted = 0;
};

struct SvdModel {
  std::size_t k = 0;
  std::vector<double> singular_values;        // nonincreasing
  DenseMatrix right_vectors;                  // n_cols x k, orthonormal columns
  std::optional<DenseMatrix> left_vectors;    // n_rows x k, for the fitted data
};

// Terms with document frequency >= min_df, ordered lexicographically.
Vocabulary build_vocabulary(const std::vector<TokenList>& docs, std::size_t min_df = 1);

// Entry (i, j) counts occurrences of term j in document i; unknown tokens are ignored.
SparseMatrix count_vectorize(const std::vector<TokenList>& docs, const Vocabulary& vocab);

// Smoothed idf: ln((1 + N) / (1 + df)) + 1.
IdfWeights fit_idf(const SparseMatrix& counts);

// count * idf followed by row-wise L2 normalization; zero rows stay zero.
SparseMatrix apply_tfidf(const SparseMatrix& counts, const IdfWeights& idf);

// Top-k singular triplets of X. Uses an exact dense decomposition when
// min(n_rows, n_cols) <= dense_cutoff, otherwise a randomized range finder
// with oversampling 10 and 4 power iterations. The sign of each right vector
// is fixed so its largest-magnitude entry is positive.
SvdModel truncated_svd(const SparseMatrix& x, std::size_t k, std::uint64_t seed,
                       std::size_t dense_cutoff = 200);

// LSA embedding of new data: X * right_vectors (no singular-value scaling).
DenseMatrix project(const SvdModel& model, const SparseMatrix& x);
DenseMatrix project(const SvdModel& model, const DenseMatrix& x);

struct ThinSvd {
  DenseMatrix u;                      // m x r orthonormal columns
  std::vector<double> singular_values;  // length r, nonincreasing
  DenseMatrix v;                      // n x r orthonormal columns
};

// Exact thin SVD of a dense matrix by one-sided Jacobi rotations applied to
// whichever side has fewer columns.
ThinSvd dense_svd(const DenseMatrix& a, int max_sweeps = 60);

}  // namespace asag
