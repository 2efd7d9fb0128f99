#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mabt/errors.hpp"

namespace mabt {

using Vector = std::vector<double>;

// Column-major dense matrix; columns are contiguous so the kernel layer can
// stream them.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

bool all_finite(std::span<const double> v);

// y = A x
Vector matvec(const Matrix& a, std::span<const double> x);
// y = A' x
Vector tmatvec(const Matrix& a, std::span<const double> x);
// A'A, symmetric
Matrix gram(const Matrix& a);
// quadratic form x'Ax + b'x
double quad_form(const Matrix& a, std::span<const double> b, std::span<const double> x);

// Householder QR of an n x k matrix (n >= 1, k >= 1), optionally with
// Businger-Golub column pivoting. Rank is judged against
//   tol = n * eps * max column norm of the input,
// the deterministic threshold used throughout for collinearity detection.
class HouseholderQR {
 public:
  HouseholderQR(const Matrix& a, bool pivot);

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return k_; }
  double rank_tol() const { return tol_; }
  bool pivoted() const { return pivoted_; }

  // Number of leading diagonal entries of R above the rank tolerance. With
  // pivoting this is the numerical rank; without, it is the longest
  // full-rank leading block (what nested model chains need).
  std::size_t rank() const { return rank_; }

  // True when the leading j x j block of R is full rank.
  bool prefix_full_rank(std::size_t j) const { return j <= rank_; }

  // In-place y -> Q'y.
  void apply_qt(std::span<double> y) const;

  // Least squares coefficients for the full k-column problem. Requires
  // rank() == cols(); pivoting is undone.
  Vector solve(std::span<const double> y) const;

  // Coefficients for the leading j columns of the *unpivoted* factorization
  // (nested-model fast path). qty is Q'y.
  Vector solve_prefix(std::size_t j, std::span<const double> qty) const;

  // Thin orthogonal factor, n x min(k, n).
  Matrix thin_q() const;

 private:
  std::size_t n_ = 0, k_ = 0, rank_ = 0;
  bool pivoted_ = false;
  double tol_ = 0.0;
  Matrix qr_;                 // packed reflectors + R
  std::vector<double> tau_;
  std::vector<std::size_t> perm_;  // perm_[j] = original column index at slot j
};

// Cholesky factorization A = L L' of a symmetric positive definite matrix.
// Returns false when a non-positive pivot is hit.
bool cholesky(const Matrix& a, Matrix& lower);
// Solves A x = b given the lower factor.
Vector cholesky_solve(const Matrix& lower, std::span<const double> b);
// Inverse from the lower factor.
Matrix cholesky_inverse(const Matrix& lower);

struct SymEigen {
  Vector values;   // ascending
  Matrix vectors;  // columns match values
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Exact enough for
// the small (M <= ~50) matrices this project handles.
SymEigen sym_eigen(const Matrix& a);

// Standard normal quantile (Wichura's AS241, double precision).
double normal_quantile(double p);

}  // namespace mabt
