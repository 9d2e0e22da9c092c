#include "fedfolio/alloc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedfolio/error.hpp"
#include "fedfolio/kernels.hpp"

namespace fedfolio {

Strategy parse_strategy(const std::string& name) {
  if (name == "portfolio") return Strategy::kPortfolio;
  if (name == "random") return Strategy::kRandom;
  if (name == "greedy") return Strategy::kGreedy;
  if (name == "auction") return Strategy::kAuction;
  throw Error(ErrorCategory::kInvalidConfig,
              "unknown strategy \"" + name +
                  "\" (expected portfolio|random|greedy|auction)");
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kPortfolio: return "portfolio";
    case Strategy::kRandom: return "random";
    case Strategy::kGreedy: return "greedy";
    case Strategy::kAuction: return "auction";
  }
  return "unknown";
}

void AllocationRequest::validate() const {
  if (!(budget > 0.0)) {
    throw Error(ErrorCategory::kInvalidConfig, "budget must be > 0");
  }
  if (eligible.empty()) {
    throw Error(ErrorCategory::kInvalidConfig,
                "no eligible clients to allocate to");
  }
  for (std::size_t k = 1; k < eligible.size(); ++k) {
    if (eligible[k] <= eligible[k - 1]) {
      throw Error(ErrorCategory::kInvalidConfig,
                  "eligible client ids must be strictly ascending");
    }
  }
  if (unit_costs.size() != eligible.size()) {
    throw Error(ErrorCategory::kInvalidConfig,
                "unit_costs length does not match eligible clients");
  }
  for (double c : unit_costs) {
    if (!(c > 0.0)) {
      throw Error(ErrorCategory::kInvalidConfig, "unit costs must be > 0");
    }
  }
  if (history.size() != eligible.size()) {
    throw Error(ErrorCategory::kInvalidConfig,
                "history rows do not match eligible clients");
  }
  for (std::size_t k = 1; k < history.size(); ++k) {
    if (history[k].size() != history[0].size()) {
      throw Error(ErrorCategory::kInvalidConfig,
                  "history rows have unequal lengths");
    }
  }
  if (!(cap > 0.0) || cap > 1.0) {
    throw Error(ErrorCategory::kInvalidConfig, "cap must be in (0, 1]");
  }
  if (cap * static_cast<double>(eligible.size()) < 1.0 - 1e-12) {
    throw Error(ErrorCategory::kInvalidConfig,
                "cap * eligible count < 1; the budget cannot be placed");
  }
}

namespace {

Vector window_means(const std::vector<Vector>& history) {
  Vector means(history.size(), 0.0);
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (!history[i].empty()) {
      means[i] = kernels::sum(history[i].data(), history[i].size()) /
                 static_cast<double>(history[i].size());
    }
  }
  return means;
}

RewardAllocation uniform_allocation(const AllocationRequest& req,
                                    const std::string& strategy,
                                    bool fallback) {
  const double n = static_cast<double>(req.eligible.size());
  const double share = std::min(req.budget / n, req.cap * req.budget);
  RewardAllocation out;
  out.strategy = strategy;
  out.fallback_uniform = fallback;
  out.weights.assign(req.eligible.size(), 1.0 / n);
  for (std::size_t id : req.eligible) out.rewards[id] = share;
  out.unspent = req.budget - share * n;
  return out;
}

// Fill clients with min(cap*B, remaining) in the given preference order.
RewardAllocation rank_fill(const AllocationRequest& req,
                           const std::vector<std::size_t>& order,
                           const std::string& strategy) {
  RewardAllocation out;
  out.strategy = strategy;
  const double cap_amount = req.cap * req.budget;
  double remaining = req.budget;
  for (std::size_t k : order) {
    if (remaining <= 1e-12 * req.budget) break;
    double give = std::min(cap_amount, remaining);
    out.rewards[req.eligible[k]] = give;
    remaining -= give;
  }
  out.unspent = std::max(remaining, 0.0);
  return out;
}

}  // namespace

Vector cap_redistribute(const Vector& weights, double budget, double cap) {
  const std::size_t n = weights.size();
  const double cap_amount = cap * budget;
  Vector rewards(n, 0.0);
  std::vector<bool> capped(n, false);
  double remaining = budget;

  for (std::size_t pass = 0; pass < n; ++pass) {
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!capped[i]) mass += weights[i];
    }
    if (mass <= 1e-15 || remaining <= 0.0) break;

    bool clipped = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (capped[i]) continue;
      if (remaining * weights[i] / mass > cap_amount) {
        rewards[i] = cap_amount;
        capped[i] = true;
        remaining -= cap_amount;
        clipped = true;
      }
    }
    if (!clipped) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!capped[i]) rewards[i] = remaining * weights[i] / mass;
      }
      remaining = 0.0;
      break;
    }
  }
  return rewards;
}

RewardAllocation allocate_uniform(const AllocationRequest& req) {
  req.validate();
  return uniform_allocation(req, "uniform", false);
}

RewardAllocation allocate_portfolio(const AllocationRequest& req,
                                    const PortfolioOptions& options) {
  req.validate();
  const std::size_t t = req.history.empty() ? 0 : req.history[0].size();
  if (t < 2) {
    return uniform_allocation(req, "portfolio", true);
  }

  AllocationWeights solved;
  try {
    ReturnHistory history = ReturnHistory::from_rows(req.history);
    CovarianceModel model =
        options.ridge < 0.0 ? estimate_covariance_auto(history)
                            : estimate_covariance(history, options.ridge);
    if (model.degenerate_means()) {
      return uniform_allocation(req, "portfolio", true);
    }
    const Theta& th = model.theta();
    double target = th.t1 / th.t3;
    switch (options.target.kind) {
      case TargetSpec::Kind::kGmv:
        break;
      case TargetSpec::Kind::kAbsolute:
        target = options.target.value;
        break;
      case TargetSpec::Kind::kGmvOffset:
        target += options.target.value * std::sqrt(std::max(th.t4, 0.0)) /
                  th.t3;
        break;
    }
    solved = solve_long_only(model, target, options.solver);
  } catch (const Error& e) {
    switch (e.category()) {
      case ErrorCategory::kSingularCovariance:
      case ErrorCategory::kDegenerateMeans:
      case ErrorCategory::kInsufficientHistory:
      case ErrorCategory::kNoConvergence:
        return uniform_allocation(req, "portfolio", true);
      default:
        throw;
    }
  }

  RewardAllocation out;
  out.strategy = "portfolio";
  out.weights = solved.weights;
  Vector rewards = cap_redistribute(solved.weights, req.budget, req.cap);
  double spent = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (rewards[i] > 0.0) {
      out.rewards[req.eligible[i]] = rewards[i];
      spent += rewards[i];
    }
  }
  out.unspent = std::max(req.budget - spent, 0.0);
  return out;
}

RewardAllocation allocate_random(const AllocationRequest& req, Rng& rng) {
  req.validate();
  std::vector<std::size_t> order(req.eligible.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  RewardAllocation out;
  out.strategy = "random";
  const double cap_amount = req.cap * req.budget;
  double remaining = req.budget;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (remaining <= 1e-12 * req.budget) break;
    std::size_t j = static_cast<std::size_t>(
        rng.uniform_int(i, order.size() - 1));
    std::swap(order[i], order[j]);
    double give = std::min(cap_amount, remaining);
    out.rewards[req.eligible[order[i]]] = give;
    remaining -= give;
  }
  out.unspent = std::max(remaining, 0.0);
  return out;
}

RewardAllocation allocate_greedy(const AllocationRequest& req) {
  req.validate();
  if (req.history.empty() || req.history[0].empty()) {
    return uniform_allocation(req, "greedy", true);
  }
  Vector means = window_means(req.history);
  std::vector<std::size_t> order(req.eligible.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     if (means[a] != means[b]) return means[a] > means[b];
                     return req.eligible[a] < req.eligible[b];
                   });
  return rank_fill(req, order, "greedy");
}

RewardAllocation allocate_auction(const AllocationRequest& req) {
  req.validate();
  if (req.history.empty() || req.history[0].empty()) {
    return uniform_allocation(req, "auction", true);
  }
  Vector means = window_means(req.history);
  Vector ratio(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    ratio[i] = means[i] / req.unit_costs[i];
  }
  std::vector<std::size_t> order(req.eligible.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     if (ratio[a] != ratio[b]) return ratio[a] > ratio[b];
                     return req.eligible[a] < req.eligible[b];
                   });
  return rank_fill(req, order, "auction");
}

}  // namespace fedfolio
