#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace asag {

// Row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

// Row-compressed sparse matrix. Column indices are strictly increasing within
// each row and explicit zeros are never stored.
struct SparseMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::size_t> row_offsets{0};
  std::vector<std::size_t> col_indices;
  std::vector<double> values;

  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols)
      : n_rows(rows), n_cols(cols), row_offsets(rows + 1, 0) {}

  std::size_t nnz() const { return values.size(); }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {col_indices.data() + row_offsets[i], row_offsets[i + 1] - row_offsets[i]};
  }
  std::span<const double> row_vals(std::size_t i) const {
    return {values.data() + row_offsets[i], row_offsets[i + 1] - row_offsets[i]};
  }

  // Appends a row given (column, value) pairs sorted by column; zero values are skipped.
  void append_row(const std::vector<std::pair<std::size_t, double>>& entries);

  // Checks structural invariants; throws DataError when violated.
  void validate() const;

  DenseMatrix to_dense() const;
};

DenseMatrix transpose(const DenseMatrix& m);

// C = A * B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// C = A^T * B
DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b);

// C = S * B  (sparse times dense)
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& b);

// C = S^T * B
DenseMatrix spmm_t(const SparseMatrix& s, const DenseMatrix& b);

double frobenius_norm(const DenseMatrix& m);

}  // namespace asag
