#include "fedfolio/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fedfolio/error.hpp"
#include "fedfolio/kernels.hpp"

namespace fedfolio::stats {

double mean(const Vector& x) {
  if (x.empty()) {
    throw Error(ErrorCategory::kInvalidConfig, "mean of an empty sample");
  }
  return kernels::sum(x.data(), x.size()) / static_cast<double>(x.size());
}

double sample_std(const Vector& x) {
  if (x.size() < 2) {
    throw Error(ErrorCategory::kInvalidConfig,
                "sample std needs at least two observations");
  }
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) {
    double d = v - m;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error(ErrorCategory::kNoConvergence,
              "incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorCategory::kInvalidConfig,
                "incomplete beta needs a > 0 and b > 0");
  }
  if (!(x >= 0.0) || !(x <= 1.0)) {
    throw Error(ErrorCategory::kInvalidConfig,
                "incomplete beta needs x in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double nu) {
  if (!(nu > 0.0)) {
    throw Error(ErrorCategory::kInvalidConfig,
                "t distribution needs nu > 0");
  }
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  const double x = nu / (nu + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

PairedTest paired_one_sided(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCategory::kDimensionMismatch,
                "paired samples have different lengths");
  }
  if (x.size() < 2) {
    throw Error(ErrorCategory::kInvalidConfig,
                "paired test needs at least two pairs");
  }
  Vector d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];

  PairedTest out;
  out.n = d.size();
  out.mean_diff = mean(d);
  const double sd = sample_std(d);
  if (sd == 0.0) {
    if (out.mean_diff > 0.0) {
      out.t_stat = std::numeric_limits<double>::infinity();
      out.p_value = 0.0;
    } else if (out.mean_diff < 0.0) {
      out.t_stat = -std::numeric_limits<double>::infinity();
      out.p_value = 1.0;
    } else {
      out.t_stat = 0.0;
      out.p_value = 0.5;
    }
    return out;
  }
  out.t_stat = out.mean_diff / (sd / std::sqrt(static_cast<double>(out.n)));
  out.p_value =
      1.0 - student_t_cdf(out.t_stat, static_cast<double>(out.n - 1));
  return out;
}

}  // namespace fedfolio::stats
