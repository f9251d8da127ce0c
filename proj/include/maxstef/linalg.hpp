#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace maxstef {

// Row-major dense matrix just big enough for per-face / per-cell solves
// (n = number of species, typically 2..4).
class SmallMatrix {
 public:
  SmallMatrix() = default;
  SmallMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Solves A x = b in place by LU with partial pivoting. Throws NumericalError
// with `context` in the message when the matrix is numerically singular.
std::vector<double> lu_solve(SmallMatrix a, std::vector<double> b,
                             const std::string& context);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns eigenvalues and the orthogonal matrix whose COLUMNS are the
// eigenvectors (a = q diag(lambda) q^T). Eigenvalues below
// snap_tol * max|lambda| in magnitude are snapped to exactly zero so that
// structural conservation modes are preserved to rounding.
struct SymmetricEigen {
  std::vector<double> eigenvalues;
  SmallMatrix eigenvectors;
};

SymmetricEigen jacobi_eigen(SmallMatrix a, double snap_tol = 1e-13);

}  // namespace maxstef
