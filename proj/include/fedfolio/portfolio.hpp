#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fedfolio/linalg.hpp"

namespace fedfolio {

// Per-client time series of realized per-round returns, client-major so a
// client's series is contiguous. All clients share the same length.
class ReturnHistory {
 public:
  ReturnHistory() = default;
  ReturnHistory(std::size_t clients, std::size_t rounds)
      : clients_(clients), rounds_(rounds), data_(clients * rounds, 0.0) {}

  // Builds from one row per client; rows must be of equal length and finite.
  static ReturnHistory from_rows(const std::vector<Vector>& rows);

  std::size_t clients() const { return clients_; }
  std::size_t rounds() const { return rounds_; }
  double at(std::size_t client, std::size_t round) const {
    return data_[client * rounds_ + round];
  }
  double& at(std::size_t client, std::size_t round) {
    return data_[client * rounds_ + round];
  }
  const double* row(std::size_t client) const {
    return data_.data() + client * rounds_;
  }

  // Throws invalid-config on non-finite entries.
  void validate() const;

 private:
  std::size_t clients_ = 0;
  std::size_t rounds_ = 0;
  std::vector<double> data_;
};

// Scalar summaries of (mean, inverse-covariance) that parameterize the
// closed-form minimum-variance solution:
//   t1 = e'V^-1 r,  t2 = r'V^-1 r,  t3 = e'V^-1 e,  t4 = t2*t3 - t1^2.
struct Theta {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  double t4 = 0.0;
};

// Mean vector and ridge-regularized covariance of client returns, with the
// derived quantities the solvers need. Immutable after construction.
class CovarianceModel {
 public:
  static CovarianceModel from_moments(Vector mean, Matrix cov, double ridge);

  std::size_t clients() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  double ridge() const { return ridge_; }
  const Theta& theta() const { return theta_; }
  const Vector& vinv_ones() const { return vinv_ones_; }
  const Vector& vinv_mean() const { return vinv_mean_; }

  // Covariance-vector product. Models estimated from a short window keep
  // the centered series, so V*w = C(C'w)/(T-1) + ridge*w costs 2nT instead
  // of n^2 when the window is much shorter than the client count.
  Vector apply_cov(const Vector& w) const;
  // Allocation-free form for tight loops; scratch is resized as needed.
  void apply_cov(const Vector& w, Vector& out, Vector& scratch) const;

  // True when the mean vector is (numerically) a multiple of the ones
  // vector: the frontier collapses to the single minimum-variance point.
  bool degenerate_means() const;

 private:
  friend CovarianceModel estimate_covariance(const ReturnHistory& history,
                                             double ridge);
  CovarianceModel() = default;
  Vector mean_;
  Matrix cov_;
  double ridge_ = 0.0;
  Theta theta_;
  Vector vinv_ones_;
  Vector vinv_mean_;
  Vector centered_cols_;  // window x n, round-major; empty for moment models
  std::size_t window_ = 0;
};

// Sample mean of each client's series.
Vector estimate_mean(const ReturnHistory& history);

// Unbiased sample covariance (divisor T-1) plus ridge*I on the diagonal.
// With fewer than two rounds the sample term is zero and a positive ridge
// is required.
CovarianceModel estimate_covariance(const ReturnHistory& history,
                                    double ridge);

// Default ridge: 1e-6 * trace(S)/n.
double default_ridge(const ReturnHistory& history);
CovarianceModel estimate_covariance_auto(const ReturnHistory& history);

double expected_portfolio_return(const Vector& weights, const Vector& mean);
double portfolio_variance(const Vector& weights, const CovarianceModel& model);
// Gradient of the portfolio variance: component i is 2*Cov(r_i, R_p).
Vector marginal_risk(const Vector& weights, const CovarianceModel& model);

enum class WeightMode : std::uint8_t {
  kClosedForm,  // unconstrained equality-constrained solution
  kLongOnly,    // numeric solve on the probability simplex
};

struct AllocationWeights {
  Vector weights;
  double target_return = 0.0;
  WeightMode mode = WeightMode::kClosedForm;
  // Set when the model was degenerate and the solve fell back to the
  // global minimum-variance weights.
  bool degenerate_fallback = false;
  bool converged = true;
  std::size_t iterations = 0;
  double objective = 0.0;
};

// Closed-form minimum-variance weights meeting w'e = 1 and w'mean = target.
// Degenerate models fall back to the global minimum-variance point.
AllocationWeights solve_min_variance(const CovarianceModel& model,
                                     double target_return);

struct FrontierPoint {
  double expected_return = 0.0;
  double std_dev = 0.0;
  AllocationWeights weights;
  bool efficient = false;  // on or above the minimum-variance vertex
};

FrontierPoint global_min_variance(const CovarianceModel& model);

// One minimum-variance point per target. A degenerate model yields the
// single vertex point flagged as a fallback.
std::vector<FrontierPoint> efficient_frontier(
    const CovarianceModel& model, const std::vector<double>& targets);

// The frontier hyperbola E = vertex_return +/- slope * sigma.
struct FrontierAsymptotes {
  double vertex_return = 0.0;
  double vertex_std = 0.0;
  double slope = 0.0;
};

FrontierAsymptotes frontier_asymptotes(const CovarianceModel& model);

// Evenly spaced targets spanning vertex_return +/- 3*sqrt(t4)/t3.
std::vector<double> auto_targets(const CovarianceModel& model,
                                 std::size_t count = 41);

struct SolverOptions {
  std::size_t max_iters = 5000;
  // 0 selects 1/(2 * Gershgorin bound of the quadratic's Hessian half).
  double step = 0.0;
  // Stop when the objective decrease falls below this.
  double tol = 1e-10;
  // Penalty on (w'mean - target)^2 is penalty_scale * trace(V).
  double penalty_scale = 1e3;
  // When false the return constraint is projected instead of penalized and
  // weights may go negative: the equality-constrained oracle mode.
  bool nonnegative = true;
  // Optional warm start; used when its length matches the model, else the
  // solve starts from the uniform vector.
  Vector initial;
  // When set, receives the objective value after every iteration.
  std::vector<double>* trace = nullptr;

  bool operator==(const SolverOptions&) const = default;
};

// Projected-gradient minimization of w'Vw + penalty*(w'mean - target)^2
// over the probability simplex (or, in oracle mode, over the affine set
// {w'e = 1, w'mean = target}).
AllocationWeights solve_long_only(const CovarianceModel& model,
                                  double target_return,
                                  const SolverOptions& options = {});

// Euclidean projection onto {w >= 0, sum w = 1}. Exposed for tests.
Vector project_onto_simplex(Vector v);
// Allocation-free form for tight loops; scratch holds the sorted copy.
Vector project_onto_simplex(Vector v, Vector& scratch);

}  // namespace fedfolio
