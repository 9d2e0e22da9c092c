#pragma once

#include <cstddef>
#include <vector>

namespace fedfolio {

using Vector = std::vector<double>;

// Dense square matrix, row-major. Sized for client counts (n <= a few
// hundred), so everything here is direct dense arithmetic.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& at(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
  double* row(std::size_t r) { return data_.data() + r * n_; }
  const double* row(std::size_t r) const { return data_.data() + r * n_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  static Matrix identity(std::size_t n);

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

namespace linalg {

double dot(const Vector& x, const Vector& y);
// y = A x
Vector matvec(const Matrix& a, const Vector& x);
// x' A x
double quadratic_form(const Matrix& a, const Vector& x);

// Lower-triangular Cholesky factor of a symmetric positive definite
// matrix. Returns false if a pivot is non-positive or non-finite.
bool cholesky(const Matrix& a, Matrix& lower);

// Solves A x = b given the Cholesky factor L (A = L L').
Vector cholesky_solve(const Matrix& lower, const Vector& b);

// Upper bound on the largest eigenvalue via Gershgorin discs.
double gershgorin_bound(const Matrix& a);

double max_abs_asymmetry(const Matrix& a);

}  // namespace linalg
}  // namespace fedfolio
