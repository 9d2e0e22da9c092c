#include "fedfolio/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "fedfolio/error.hpp"
#include "fedfolio/kernels.hpp"

namespace fedfolio {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

namespace linalg {

double dot(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCategory::kDimensionMismatch,
                "dot: " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  return kernels::dot(x.data(), y.data(), x.size());
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.size() != x.size()) {
    throw Error(ErrorCategory::kDimensionMismatch,
                "matvec: matrix " + std::to_string(a.size()) + " vs vector " +
                    std::to_string(x.size()));
  }
  Vector y(x.size());
  kernels::matvec(a.data(), x.data(), y.data(), a.size(), a.size());
  return y;
}

double quadratic_form(const Matrix& a, const Vector& x) {
  Vector ax = matvec(a, x);
  return kernels::dot(x.data(), ax.data(), x.size());
}

bool cholesky(const Matrix& a, Matrix& lower) {
  const std::size_t n = a.size();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a.at(i, i)));
  // Pivots of an exactly singular matrix can round to a tiny positive value,
  // so reject anything below a relative floor instead of testing the sign.
  const double pivot_floor = 1e-12 * max_diag;
  lower = Matrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = kernels::dot(lower.row(i), lower.row(j), j);
      if (i == j) {
        double d = a.at(i, i) - s;
        if (!(d > pivot_floor) || !std::isfinite(d)) return false;
        lower.at(i, i) = std::sqrt(d);
      } else {
        lower.at(i, j) = (a.at(i, j) - s) / lower.at(j, j);
      }
    }
  }
  return true;
}

Vector cholesky_solve(const Matrix& lower, const Vector& b) {
  const std::size_t n = lower.size();
  assert(b.size() == n);
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = kernels::dot(lower.row(i), y.data(), i);
    y[i] = (b[i] - s) / lower.at(i, i);
  }
  // Back substitution with L'. Column access on the row-major factor.
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = 0.0;
    for (std::size_t j = ii + 1; j < n; ++j) {
      s += lower.at(j, ii) * x[j];
    }
    x[ii] = (y[ii] - s) / lower.at(ii, ii);
  }
  return x;
}

double gershgorin_bound(const Matrix& a) {
  const std::size_t n = a.size();
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      radius += std::abs(a.at(i, j));
    }
    bound = std::max(bound, radius);
  }
  return bound;
}

double max_abs_asymmetry(const Matrix& a) {
  const std::size_t n = a.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      worst = std::max(worst, std::abs(a.at(i, j) - a.at(j, i)));
    }
  }
  return worst;
}

}  // namespace linalg
}  // namespace fedfolio
