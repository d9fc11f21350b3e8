#include "asag/matrix.hpp"

#include <cmath>

#include "asag/errors.hpp"

namespace asag {

void SparseMatrix::append_row(const std::vector<std::pair<std::size_t, double>>& entries) {
  std::size_t last_col = 0;
  bool first = true;
  for (const auto& [col, val] : entries) {
    if (!first && col <= last_col) throw DataError("sparse row: columns not strictly increasing");
    if (col >= n_cols) throw DataError("sparse row: column out of range");
    first = false;
    last_col = col;
    if (val == 0.0) continue;
    col_indices.push_back(col);
    values.push_back(val);
  }
  ++n_rows;
  row_offsets.push_back(values.size());
}

void SparseMatrix::validate() const {
  if (row_offsets.size() != n_rows + 1) throw DataError("sparse: bad offset count");
  if (row_offsets.front() != 0 || row_offsets.back() != values.size())
    throw DataError("sparse: bad offset bounds");
  if (col_indices.size() != values.size()) throw DataError("sparse: index/value size mismatch");
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (row_offsets[i] > row_offsets[i + 1]) throw DataError("sparse: offsets not monotone");
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      if (col_indices[k] >= n_cols) throw DataError("sparse: column out of range");
      if (k > row_offsets[i] && col_indices[k] <= col_indices[k - 1])
        throw DataError("sparse: columns not strictly increasing");
      if (values[k] == 0.0) throw DataError("sparse: explicit zero stored");
    }
  }
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix out(n_rows, n_cols);
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      out.at(i, col_indices[k]) = values[k];
    }
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix out(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out.at(j, i) = m.at(i, j);
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows) throw DataError("matmul: dimension mismatch");
  DenseMatrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const auto brow = b.row(k);
      auto orow = out.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows != b.rows) throw DataError("matmul_at_b: dimension mismatch");
  DenseMatrix out(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const auto arow = a.row(k);
    const auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      auto orow = out.row(i);
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& b) {
  if (s.n_cols != b.rows) throw DataError("spmm: dimension mismatch");
  DenseMatrix out(s.n_rows, b.cols);
  for (std::size_t i = 0; i < s.n_rows; ++i) {
    auto orow = out.row(i);
    for (std::size_t k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k) {
      const double v = s.values[k];
      const auto brow = b.row(s.col_indices[k]);
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += v * brow[j];
    }
  }
  return out;
}

DenseMatrix spmm_t(const SparseMatrix& s, const DenseMatrix& b) {
  if (s.n_rows != b.rows) throw DataError("spmm_t: dimension mismatch");
  DenseMatrix out(s.n_cols, b.cols);
  for (std::size_t i = 0; i < s.n_rows; ++i) {
    const auto brow = b.row(i);
    for (std::size_t k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k) {
      const double v = s.values[k];
      auto orow = out.row(s.col_indices[k]);
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += v * brow[j];
    }
  }
  return out;
}

double frobenius_norm(const DenseMatrix& m) {
  double sum = 0.0;
  for (double v : m.data) sum += v * v;
  return std::sqrt(sum);
}

}  // namespace asag
