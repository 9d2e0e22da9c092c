#include "fedfolio/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>

#include "fedfolio/error.hpp"
#include "fedfolio/kernels.hpp"

namespace fedfolio {

namespace {

constexpr double kDegenerateRelTol = 1e-10;

Matrix add_ridge(Matrix m, double ridge) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.at(i, i) += ridge;
  }
  return m;
}

double trace(const Matrix& m) {
  double t = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) t += m.at(i, i);
  return t;
}

}  // namespace

ReturnHistory ReturnHistory::from_rows(const std::vector<Vector>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw Error(ErrorCategory::kInsufficientHistory,
                "return history is empty");
  }
  const std::size_t t = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != t) {
      throw Error(ErrorCategory::kInvalidConfig,
                  "return history rows have unequal lengths");
    }
  }
  ReturnHistory h(rows.size(), t);
  for (std::size_t c = 0; c < rows.size(); ++c) {
    for (std::size_t k = 0; k < t; ++k) h.at(c, k) = rows[c][k];
  }
  h.validate();
  return h;
}

void ReturnHistory::validate() const {
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCategory::kInvalidConfig,
                  "return history contains a non-finite value");
    }
  }
}

Vector estimate_mean(const ReturnHistory& history) {
  if (history.clients() == 0 || history.rounds() == 0) {
    throw Error(ErrorCategory::kInsufficientHistory,
                "mean estimation needs at least one round of returns");
  }
  const std::size_t n = history.clients();
  const std::size_t t = history.rounds();
  Vector mean(n);
  for (std::size_t i = 0; i < n; ++i) {
    mean[i] = kernels::sum(history.row(i), t) / static_cast<double>(t);
  }
  return mean;
}

CovarianceModel CovarianceModel::from_moments(Vector mean, Matrix cov,
                                              double ridge) {
  const std::size_t n = mean.size();
  if (cov.size() != n) {
    throw Error(ErrorCategory::kDimensionMismatch,
                "mean length " + std::to_string(n) + " vs covariance size " +
                    std::to_string(cov.size()));
  }
  if (ridge < 0.0) {
    throw Error(ErrorCategory::kInvalidConfig, "ridge must be >= 0");
  }
  if (linalg::max_abs_asymmetry(cov) > 1e-12) {
    throw Error(ErrorCategory::kInvalidConfig,
                "covariance matrix is not symmetric");
  }

  CovarianceModel model;
  model.mean_ = std::move(mean);
  model.cov_ = add_ridge(std::move(cov), ridge);
  model.ridge_ = ridge;

  Matrix lower;
  if (!linalg::cholesky(model.cov_, lower)) {
    throw Error(ErrorCategory::kSingularCovariance,
                "covariance is not positive definite (ridge " +
                    std::to_string(ridge) + ")");
  }
  Vector ones(n, 1.0);
  model.vinv_ones_ = linalg::cholesky_solve(lower, ones);
  model.vinv_mean_ = linalg::cholesky_solve(lower, model.mean_);
  model.theta_.t1 = kernels::sum(model.vinv_mean_.data(), n);
  model.theta_.t2 = linalg::dot(model.mean_, model.vinv_mean_);
  model.theta_.t3 = kernels::sum(model.vinv_ones_.data(), n);
  model.theta_.t4 =
      model.theta_.t2 * model.theta_.t3 - model.theta_.t1 * model.theta_.t1;
  return model;
}

bool CovarianceModel::degenerate_means() const {
  double scale = std::max(theta_.t2 * theta_.t3, 1e-300);
  return theta_.t4 <= kDegenerateRelTol * scale;
}

Vector CovarianceModel::apply_cov(const Vector& w) const {
  Vector out, scratch;
  apply_cov(w, out, scratch);
  return out;
}

void CovarianceModel::apply_cov(const Vector& w, Vector& out,
                                Vector& scratch) const {
  const std::size_t n = clients();
  const std::size_t t = window_;
  if (w.size() != n) {
    throw Error(ErrorCategory::kDimensionMismatch,
                "apply_cov: model " + std::to_string(n) + " vs vector " +
                    std::to_string(w.size()));
  }
  if (t == 0 || 2 * t >= n) {
    out = linalg::matvec(cov_, w);
    return;
  }
  scratch.resize(t);
  for (std::size_t k = 0; k < t; ++k) {
    scratch[k] = kernels::dot(&centered_cols_[k * n], w.data(), n);
  }
  const double scale = 1.0 / static_cast<double>(t - 1);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = ridge_ * w[i];
  for (std::size_t k = 0; k < t; ++k) {
    kernels::axpy(scale * scratch[k], &centered_cols_[k * n], out.data(), n);
  }
}

CovarianceModel estimate_covariance(const ReturnHistory& history,
                                    double ridge) {
  if (history.clients() == 0 || history.rounds() == 0) {
    throw Error(ErrorCategory::kInsufficientHistory,
                "covariance estimation needs return history");
  }
  if (ridge < 0.0) {
    throw Error(ErrorCategory::kInvalidConfig, "ridge must be >= 0");
  }
  const std::size_t n = history.clients();
  const std::size_t t = history.rounds();
  if (t < 2 && ridge == 0.0) {
    throw Error(ErrorCategory::kSingularCovariance,
                "sample covariance needs T >= 2 rounds when ridge is zero");
  }

  Vector mean = estimate_mean(history);
  Matrix s(n);
  Vector centered;
  if (t >= 2) {
    // Two-pass: center the series, then S_ij = <d_i, d_j> / (T-1).
    centered.resize(n * t);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = history.row(i);
      for (std::size_t k = 0; k < t; ++k) {
        centered[i * t + k] = row[k] - mean[i];
      }
    }
    const double denom = static_cast<double>(t - 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double v =
            kernels::dot(&centered[i * t], &centered[j * t], t) / denom;
        s.at(i, j) = v;
        s.at(j, i) = v;
      }
    }
  }
  CovarianceModel model =
      CovarianceModel::from_moments(std::move(mean), std::move(s), ridge);
  if (t >= 2) {
    // Round-major so apply_cov streams over length-n spans.
    model.centered_cols_.resize(n * t);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < t; ++k) {
        model.centered_cols_[k * n + i] = centered[i * t + k];
      }
    }
    model.window_ = t;
  }
  return model;
}

double default_ridge(const ReturnHistory& history) {
  const std::size_t n = history.clients();
  const std::size_t t = history.rounds();
  if (n == 0 || t < 2) return 0.0;
  double tr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = history.row(i);
    double m = kernels::sum(row, t) / static_cast<double>(t);
    double ss = 0.0;
    for (std::size_t k = 0; k < t; ++k) {
      double d = row[k] - m;
      ss += d * d;
    }
    tr += ss / static_cast<double>(t - 1);
  }
  return 1e-6 * tr / static_cast<double>(n);
}

CovarianceModel estimate_covariance_auto(const ReturnHistory& history) {
  return estimate_covariance(history, default_ridge(history));
}

double expected_portfolio_return(const Vector& weights, const Vector& mean) {
  if (weights.size() != mean.size()) {
    throw Error(ErrorCategory::kDimensionMismatch,
                "weights length " + std::to_string(weights.size()) +
                    " vs mean length " + std::to_string(mean.size()));
  }
  return kernels::dot(weights.data(), mean.data(), weights.size());
}

double portfolio_variance(const Vector& weights,
                          const CovarianceModel& model) {
  if (weights.size() != model.clients()) {
    throw Error(ErrorCategory::kDimensionMismatch,
                "weights length " + std::to_string(weights.size()) +
                    " vs model size " + std::to_string(model.clients()));
  }
  return linalg::quadratic_form(model.cov(), weights);
}

Vector marginal_risk(const Vector& weights, const CovarianceModel& model) {
  if (weights.size() != model.clients()) {
    throw Error(ErrorCategory::kDimensionMismatch,
                "weights length " + std::to_string(weights.size()) +
                    " vs model size " + std::to_string(model.clients()));
  }
  Vector g = linalg::matvec(model.cov(), weights);
  for (double& v : g) v *= 2.0;
  return g;
}

AllocationWeights solve_min_variance(const CovarianceModel& model,
                                     double target_return) {
  const std::size_t n = model.clients();
  const Theta& th = model.theta();

  AllocationWeights out;
  out.mode = WeightMode::kClosedForm;
  out.target_return = target_return;

  if (model.degenerate_means()) {
    // Frontier collapses to a point; report the vertex weights.
    out.weights = model.vinv_ones();
    for (double& w : out.weights) w /= th.t3;
    out.degenerate_fallback = true;
    out.target_return = th.t1 / th.t3;
    out.objective = 1.0 / th.t3;
    return out;
  }

  const Vector& a = model.vinv_ones();
  const Vector& b = model.vinv_mean();
  out.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double base = (th.t2 * a[i] - th.t1 * b[i]) / th.t4;
    double slope = (th.t3 * b[i] - th.t1 * a[i]) / th.t4;
    out.weights[i] = base + target_return * slope;
  }
  out.objective = portfolio_variance(out.weights, model);
  return out;
}

FrontierPoint global_min_variance(const CovarianceModel& model) {
  const Theta& th = model.theta();
  FrontierPoint point;
  point.expected_return = th.t1 / th.t3;
  point.std_dev = std::sqrt(1.0 / th.t3);
  point.efficient = true;
  point.weights.mode = WeightMode::kClosedForm;
  point.weights.target_return = point.expected_return;
  point.weights.weights = model.vinv_ones();
  for (double& w : point.weights.weights) w /= th.t3;
  point.weights.objective = 1.0 / th.t3;
  return point;
}

std::vector<FrontierPoint> efficient_frontier(
    const CovarianceModel& model, const std::vector<double>& targets) {
  std::vector<FrontierPoint> points;
  if (model.degenerate_means()) {
    FrontierPoint vertex = global_min_variance(model);
    vertex.weights.degenerate_fallback = true;
    points.push_back(std::move(vertex));
    return points;
  }
  const double vertex_return = model.theta().t1 / model.theta().t3;
  points.reserve(targets.size());
  for (double t : targets) {
    FrontierPoint p;
    p.weights = solve_min_variance(model, t);
    p.expected_return = t;
    p.std_dev = std::sqrt(portfolio_variance(p.weights.weights, model));
    p.efficient = t >= vertex_return - 1e-12 * std::max(1.0, std::abs(vertex_return));
    points.push_back(std::move(p));
  }
  return points;
}

FrontierAsymptotes frontier_asymptotes(const CovarianceModel& model) {
  const Theta& th = model.theta();
  FrontierAsymptotes a;
  a.vertex_return = th.t1 / th.t3;
  a.vertex_std = std::sqrt(1.0 / th.t3);
  a.slope = std::sqrt(std::max(th.t4, 0.0) / th.t3);
  return a;
}

std::vector<double> auto_targets(const CovarianceModel& model,
                                 std::size_t count) {
  const Theta& th = model.theta();
  const double center = th.t1 / th.t3;
  const double halfspan = 3.0 * std::sqrt(std::max(th.t4, 0.0)) / th.t3;
  if (count < 2) return {center};
  std::vector<double> targets(count);
  for (std::size_t i = 0; i < count; ++i) {
    double u = -1.0 + 2.0 * static_cast<double>(i) /
                          static_cast<double>(count - 1);
    targets[i] = center + u * halfspan;
  }
  return targets;
}

Vector project_onto_simplex(Vector v) {
  Vector scratch;
  return project_onto_simplex(std::move(v), scratch);
}

Vector project_onto_simplex(Vector v, Vector& scratch) {
  const std::size_t n = v.size();
  scratch.assign(v.begin(), v.end());
  std::sort(scratch.begin(), scratch.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = 0.0;
  std::size_t support = 0;
  for (std::size_t j = 0; j < n; ++j) {
    cumulative += scratch[j];
    double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (scratch[j] - candidate > 0.0) {
      tau = candidate;
      support = j + 1;
    }
  }
  (void)support;
  for (double& x : v) x = std::max(x - tau, 0.0);
  return v;
}

namespace {

// Simplex projection that reuses the ordering from the previous call.
// Successive solver iterates are nearly sorted already, so an insertion
// repair of the carried permutation replaces the full sort. The sorted
// sequence (and therefore tau) is bitwise identical to the public routine.
Vector project_simplex_tracked(Vector v, Vector& sorted,
                               std::vector<std::uint32_t>& order) {
  const std::size_t n = v.size();
  if (order.size() != n) {
    order.resize(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
  }
  sorted.resize(n);
  for (std::size_t j = 0; j < n; ++j) sorted[j] = v[order[j]];
  for (std::size_t j = 1; j < n; ++j) {
    double x = sorted[j];
    std::uint32_t oi = order[j];
    std::size_t k = j;
    while (k > 0 && sorted[k - 1] < x) {
      sorted[k] = sorted[k - 1];
      order[k] = order[k - 1];
      --k;
    }
    sorted[k] = x;
    order[k] = oi;
  }
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cumulative += sorted[j];
    double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) tau = candidate;
  }
  for (double& x : v) x = std::max(x - tau, 0.0);
  return v;
}

// Projection onto the affine set {e'w = 1, mean'w = target} via the 2x2
// Gram system of the constraint normals.
class AffineProjector {
 public:
  AffineProjector(const Vector& mean, double target)
      : mean_(mean), target_(target) {
    const double n = static_cast<double>(mean.size());
    const double s = kernels::sum(mean.data(), mean.size());
    const double q = kernels::dot(mean.data(), mean.data(), mean.size());
    det_ = n * q - s * s;
    if (det_ <= 1e-14 * std::max(n * q, 1e-300)) {
      throw Error(ErrorCategory::kDegenerateMeans,
                  "mean vector is proportional to ones; the equality "
                  "constraints are not independent");
    }
    g00_ = n;
    g01_ = s;
    g11_ = q;
  }

  void project(Vector& w) const {
    const std::size_t n = w.size();
    double c0 = kernels::sum(w.data(), n) - 1.0;
    double c1 = kernels::dot(w.data(), mean_.data(), n) - target_;
    // Solve G y = c for the correction multipliers.
    double y0 = (g11_ * c0 - g01_ * c1) / det_;
    double y1 = (g00_ * c1 - g01_ * c0) / det_;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] -= y0 + y1 * mean_[i];
    }
  }

 private:
  const Vector& mean_;
  double target_;
  double g00_, g01_, g11_, det_;
};

}  // namespace

AllocationWeights solve_long_only(const CovarianceModel& model,
                                  double target_return,
                                  const SolverOptions& options) {
  const std::size_t n = model.clients();
  if (options.max_iters < 1) {
    throw Error(ErrorCategory::kInvalidConfig, "solver iters must be >= 1");
  }
  const Matrix& v = model.cov();
  const Vector& mean = model.mean();

  const bool nonneg = options.nonnegative;
  const bool degenerate = model.degenerate_means();
  if (degenerate) {
    // Every feasible portfolio earns the same return, so the target carries
    // no information. Answer with the minimum-variance point instead.
    if (!nonneg) return solve_min_variance(model, target_return);
    target_return = model.theta().t1 / model.theta().t3;
  }
  const double penalty = nonneg ? options.penalty_scale * trace(v) : 0.0;

  double step = options.step;
  if (step <= 0.0) {
    double hessian_bound = linalg::gershgorin_bound(v);
    if (nonneg) {
      hessian_bound += penalty * kernels::dot(mean.data(), mean.data(), n);
    }
    step = 1.0 / (2.0 * std::max(hessian_bound, 1e-300));
  }

  std::unique_ptr<AffineProjector> affine;
  if (!nonneg) {
    affine = std::make_unique<AffineProjector>(mean, target_return);
  }
  Vector proj_scratch;
  std::vector<std::uint32_t> proj_order;
  auto project = [&](Vector& w) {
    if (nonneg) {
      w = project_simplex_tracked(std::move(w), proj_scratch, proj_order);
    } else {
      affine->project(w);
    }
  };

  Vector w(n, 1.0 / static_cast<double>(n));
  if (options.initial.size() == n) w = options.initial;
  project(w);

  Vector vw, cov_scratch;
  model.apply_cov(w, vw, cov_scratch);
  double gap =
      nonneg ? kernels::dot(w.data(), mean.data(), n) - target_return : 0.0;
  double f = kernels::dot(w.data(), vw.data(), n) + penalty * gap * gap;
  Vector best_w = w;
  double best_f = f;
  if (options.trace) {
    options.trace->clear();
    options.trace->push_back(f);
  }

  AllocationWeights out;
  out.mode = nonneg ? WeightMode::kLongOnly : WeightMode::kClosedForm;
  out.target_return = target_return;
  out.degenerate_fallback = degenerate;
  out.converged = false;

  std::size_t iter = 0;
  for (; iter < options.max_iters; ++iter) {
    // One fused pass: w -= step * (2*V*w + 2*penalty*gap*mean).
    const double coef = 2.0 * penalty * gap;
    if (nonneg) {
      for (std::size_t i = 0; i < n; ++i) {
        w[i] -= step * (2.0 * vw[i] + coef * mean[i]);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) w[i] -= step * (2.0 * vw[i]);
    }
    project(w);

    model.apply_cov(w, vw, cov_scratch);
    if (nonneg) {
      gap = kernels::dot(w.data(), mean.data(), n) - target_return;
    }
    double f_next =
        kernels::dot(w.data(), vw.data(), n) + penalty * gap * gap;
    if (options.trace) options.trace->push_back(f_next);
    if (f_next < best_f) {
      best_f = f_next;
      best_w = w;
    }
    if (std::abs(f - f_next) < options.tol) {
      out.converged = true;
      ++iter;
      break;
    }
    f = f_next;
  }

  out.iterations = iter;
  out.weights = std::move(best_w);
  out.objective = best_f;
  return out;
}

}  // namespace fedfolio
