#include "asag/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "asag/errors.hpp"
#include "asag/rng.hpp"

namespace asag {

namespace {

// One-sided Jacobi on the columns of a (m x n, n <= m expected but not
// required). Rotates column pairs until they are mutually orthogonal.
struct JacobiFactors {
  DenseMatrix u;  // m x n
  std::vector<double> sigma;
  DenseMatrix v;  // n x n
};

JacobiFactors one_sided_jacobi(DenseMatrix a, int max_sweeps) {
  const std::size_t m = a.rows;
  const std::size_t n = a.cols;
  DenseMatrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

  constexpr double kTol = 1e-14;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = a.at(i, p);
          const double y = a.at(i, q);
          app += x * x;
          aqq += y * y;
          apq += x * y;
        }
        if (std::abs(apq) <= kTol * std::sqrt(app * aqq)) continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = a.at(i, p);
          const double y = a.at(i, q);
          a.at(i, p) = c * x - s * y;
          a.at(i, q) = s * x + c * y;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double x = v.at(i, p);
          const double y = v.at(i, q);
          v.at(i, p) = c * x - s * y;
          v.at(i, q) = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }
  if (sweep == max_sweeps)
    throw NumericError("svd: Jacobi rotations did not converge within " +
                       std::to_string(max_sweeps) + " sweeps");

  JacobiFactors out;
  out.sigma.resize(n);
  out.u = DenseMatrix(m, n);
  for (std::size_t j = 0; j < n; ++j) {
    double norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) norm += a.at(i, j) * a.at(i, j);
    norm = std::sqrt(norm);
    out.sigma[j] = norm;
    if (norm > 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.u.at(i, j) = a.at(i, j) / norm;
    }
  }

  // Sort triplets by descending singular value.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return out.sigma[i] > out.sigma[j]; });
  JacobiFactors sorted;
  sorted.sigma.resize(n);
  sorted.u = DenseMatrix(m, n);
  sorted.v = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    sorted.sigma[j] = out.sigma[src];
    for (std::size_t i = 0; i < m; ++i) sorted.u.at(i, j) = out.u.at(i, src);
    for (std::size_t i = 0; i < n; ++i) sorted.v.at(i, j) = v.at(i, src);
  }
  return sorted;
}

// Modified Gram-Schmidt, run twice for numerical safety. Columns that vanish
// are left as zero.
void orthonormalize_columns(DenseMatrix& m) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      for (std::size_t prev = 0; prev < j; ++prev) {
        double dot = 0.0;
        for (std::size_t i = 0; i < m.rows; ++i) dot += m.at(i, j) * m.at(i, prev);
        for (std::size_t i = 0; i < m.rows; ++i) m.at(i, j) -= dot * m.at(i, prev);
      }
      double norm = 0.0;
      for (std::size_t i = 0; i < m.rows; ++i) norm += m.at(i, j) * m.at(i, j);
      norm = std::sqrt(norm);
      if (norm > 1e-300) {
        for (std::size_t i = 0; i < m.rows; ++i) m.at(i, j) /= norm;
      } else {
        for (std::size_t i = 0; i < m.rows; ++i) m.at(i, j) = 0.0;
      }
    }
  }
}

void fix_signs(DenseMatrix& right, DenseMatrix* left) {
  for (std::size_t j = 0; j < right.cols; ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < right.rows; ++i) {
      const double mag = std::abs(right.at(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (right.at(arg, j) < 0.0) {
      for (std::size_t i = 0; i < right.rows; ++i) right.at(i, j) = -right.at(i, j);
      if (left) {
        for (std::size_t i = 0; i < left->rows; ++i) left->at(i, j) = -left->at(i, j);
      }
    }
  }
}

SvdModel truncate_factors(const DenseMatrix& u, const std::vector<double>& sigma,
                          const DenseMatrix& v, std::size_t k) {
  SvdModel model;
  model.k = k;
  model.singular_values.assign(sigma.begin(), sigma.begin() + k);
  model.right_vectors = DenseMatrix(v.rows, k);
  DenseMatrix left(u.rows, k);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < v.rows; ++i) model.right_vectors.at(i, j) = v.at(i, j);
    for (std::size_t i = 0; i < u.rows; ++i) left.at(i, j) = u.at(i, j);
  }
  fix_signs(model.right_vectors, &left);
  model.left_vectors = std::move(left);
  return model;
}

}  // namespace

Vocabulary build_vocabulary(const std::vector<TokenList>& docs, std::size_t min_df) {
  if (docs.empty()) throw DataError("build_vocabulary: no documents");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::set<std::string> in_doc(doc.begin(), doc.end());
    for (const auto& token : in_doc) ++df[token];
  }
  Vocabulary vocab;
  for (const auto& [term, freq] : df) {
    if (freq >= min_df) {
      vocab.index.emplace(term, vocab.terms.size());
      vocab.terms.push_back(term);
      vocab.doc_freq.push_back(freq);
    }
  }
  if (vocab.terms.empty()) throw DataError("empty vocabulary: every term fell below min_df");
  return vocab;
}

SparseMatrix count_vectorize(const std::vector<TokenList>& docs, const Vocabulary& vocab) {
  if (vocab.terms.empty()) throw DataError("count_vectorize: empty vocabulary");
  SparseMatrix counts(0, vocab.terms.size());
  std::vector<std::pair<std::size_t, double>> row;
  for (const auto& doc : docs) {
    std::map<std::size_t, double> cells;
    for (const auto& token : doc) {
      const auto it = vocab.index.find(token);
      if (it != vocab.index.end()) cells[it->second] += 1.0;
    }
    row.assign(cells.begin(), cells.end());
    counts.append_row(row);
  }
  return counts;
}

IdfWeights fit_idf(const SparseMatrix& counts) {
  IdfWeights weights;
  weights.n_docs_fitted = counts.n_rows;
  std::vector<std::size_t> df(counts.n_cols, 0);
  for (std::size_t c : counts.col_indices) ++df[c];
  weights.idf.resize(counts.n_cols);
  const double n = static_cast<double>(counts.n_rows);
  for (std::size_t t = 0; t < counts.n_cols; ++t) {
    weights.idf[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
  }
  return weights;
}

SparseMatrix apply_tfidf(const SparseMatrix& counts, const IdfWeights& idf) {
  if (counts.n_cols != idf.idf.size())
    throw DataError("apply_tfidf: column count does not match idf size");
  SparseMatrix out = counts;
  for (std::size_t i = 0; i < out.n_rows; ++i) {
    double norm = 0.0;
    for (std::size_t k = out.row_offsets[i]; k < out.row_offsets[i + 1]; ++k) {
      out.values[k] *= idf.idf[out.col_indices[k]];
      norm += out.values[k] * out.values[k];
    }
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (std::size_t k = out.row_offsets[i]; k < out.row_offsets[i + 1]; ++k)
        out.values[k] /= norm;
    }
  }
  return out;
}

ThinSvd dense_svd(const DenseMatrix& a, int max_sweeps) {
  ThinSvd out;
  if (a.cols <= a.rows) {
    JacobiFactors f = one_sided_jacobi(a, max_sweeps);
    out.u = std::move(f.u);
    out.singular_values = std::move(f.sigma);
    out.v = std::move(f.v);
  } else {
    JacobiFactors f = one_sided_jacobi(transpose(a), max_sweeps);
    out.u = std::move(f.v);
    out.singular_values = std::move(f.sigma);
    out.v = std::move(f.u);
  }
  return out;
}

SvdModel truncated_svd(const SparseMatrix& x, std::size_t k, std::uint64_t seed,
                       std::size_t dense_cutoff) {
  const std::size_t min_dim = std::min(x.n_rows, x.n_cols);
  if (k < 1 || k > min_dim)
    throw DataError("truncated_svd: k must lie in [1, min(n_rows, n_cols)]");

  if (min_dim <= dense_cutoff) {
    const ThinSvd f = dense_svd(x.to_dense());
    return truncate_factors(f.u, f.singular_values, f.v, k);
  }

  // Randomized range finder: oversampled Gaussian sketch plus power iterations.
  const std::size_t oversample = 10;
  const std::size_t l = std::min(k + oversample, min_dim);
  rng::Engine engine(rng::mix(seed, 0x5BD1));
  DenseMatrix omega(x.n_cols, l);
  for (double& v : omega.data) v = engine.normal();

  DenseMatrix q = spmm(x, omega);  // n_rows x l
  orthonormalize_columns(q);
  const int power_iterations = 4;
  for (int t = 0; t < power_iterations; ++t) {
    DenseMatrix z = spmm_t(x, q);  // n_cols x l
    orthonormalize_columns(z);
    q = spmm(x, z);
    orthonormalize_columns(q);
  }

  DenseMatrix w = spmm_t(x, q);  // n_cols x l, equals (Q^T X)^T
  const JacobiFactors f = one_sided_jacobi(w, 60);
  // X ~= Q Q^T X = (Q f.v) diag(sigma) f.u^T
  const DenseMatrix u_full = matmul(q, f.v);
  return truncate_factors(u_full, f.sigma, f.u, k);
}

DenseMatrix project(const SvdModel& model, const SparseMatrix& x) {
  if (x.n_cols != model.right_vectors.rows)
    throw DataError("project: feature dimension does not match the fitted factors");
  return spmm(x, model.right_vectors);
}

DenseMatrix project(const SvdModel& model, const DenseMatrix& x) {
  if (x.cols != model.right_vectors.rows)
    throw DataError("project: feature dimension does not match the fitted factors");
  return matmul(x, model.right_vectors);
}

}  // namespace asag
