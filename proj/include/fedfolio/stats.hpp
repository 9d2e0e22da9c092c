#pragma once

#include <cstddef>

#include "fedfolio/linalg.hpp"

namespace fedfolio::stats {

double mean(const Vector& x);

// Unbiased sample standard deviation (divisor n - 1); requires n >= 2.
double sample_std(const Vector& x);

// Regularized incomplete beta function I_x(a, b), a, b > 0, x in [0, 1],
// evaluated by the continued-fraction expansion.
double incomplete_beta(double a, double b, double x);

// CDF of Student's t distribution with nu > 0 degrees of freedom.
double student_t_cdf(double t, double nu);

struct PairedTest {
  double mean_diff = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;  // one-sided, H1: mean(x - y) > 0
  std::size_t n = 0;
};

// Paired one-sided t-test on per-index differences x_i - y_i. A zero-spread
// difference vector degenerates to p = 0 / 0.5 / 1 by the sign of the mean.
PairedTest paired_one_sided(const Vector& x, const Vector& y);

}  // namespace fedfolio::stats
