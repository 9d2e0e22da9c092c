#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedfolio/portfolio.hpp"
#include "fedfolio/rng.hpp"

namespace fedfolio {

enum class Strategy { kPortfolio, kRandom, kGreedy, kAuction };

Strategy parse_strategy(const std::string& name);
std::string strategy_name(Strategy s);

// Which expected-return target the portfolio solve runs at. Gmv picks the
// frontier vertex; GmvOffset moves value * sqrt(theta4) / theta3 up the
// efficient arc; Absolute uses value directly.
struct TargetSpec {
  enum class Kind { kGmv, kAbsolute, kGmvOffset };
  Kind kind = Kind::kGmv;
  double value = 0.0;

  bool operator==(const TargetSpec&) const = default;
};

struct AllocationRequest {
  double budget = 0.0;
  std::vector<std::size_t> eligible;  // client ids, strictly ascending
  std::vector<Vector> history;        // return window per eligible client
  Vector unit_costs;                  // aligned with eligible
  double cap = 0.25;                  // per-client share of budget

  void validate() const;
};

struct RewardAllocation {
  std::map<std::size_t, double> rewards;  // positive rewards only
  std::string strategy;
  Vector weights;                 // portfolio diagnostic, eligible order
  bool fallback_uniform = false;  // estimation failed, uniform used
  double unspent = 0.0;
};

struct PortfolioOptions {
  double ridge = -1.0;  // negative selects the automatic default
  TargetSpec target;
  SolverOptions solver;

  bool operator==(const PortfolioOptions&) const = default;
};

// Rewards_i = weights_i * budget with the per-client cap enforced by
// redistributing each capped client's excess over the remaining clients in
// proportion to their weights, to a fixed point. Budget left over when all
// positive-weight clients are capped stays unspent.
Vector cap_redistribute(const Vector& weights, double budget, double cap);

RewardAllocation allocate_uniform(const AllocationRequest& req);
RewardAllocation allocate_portfolio(const AllocationRequest& req,
                                    const PortfolioOptions& options = {});
RewardAllocation allocate_random(const AllocationRequest& req, Rng& rng);
RewardAllocation allocate_greedy(const AllocationRequest& req);
RewardAllocation allocate_auction(const AllocationRequest& req);

// Rounds 1..warmup allocate uniformly to populate histories.
inline bool warmup_round(std::size_t round, std::size_t warmup) {
  return round <= warmup;
}

}  // namespace fedfolio
