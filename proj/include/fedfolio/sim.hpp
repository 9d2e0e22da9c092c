#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedfolio/linalg.hpp"
#include "fedfolio/rng.hpp"

namespace fedfolio {

// World generation and per-round dynamics parameters.
struct SimConfig {
  std::size_t groups = 15;
  std::size_t group_size_min = 10;
  std::size_t group_size_max = 15;
  double capacity_min = 3.0;
  double capacity_max = 7.0;
  double cost_min = 0.8;
  double cost_max = 1.2;

  // Per-round capacity drift: capacity *= 1 + shock_scale * mix, where mix
  // blends a per-group shock with a per-client shock by beta. Both shocks
  // are Uniform(-1, 1), so |change| <= shock_scale holds exactly.
  double shock_scale = 0.15;
  double beta = 0.5;

  // Capacity is clamped to [floor_frac, ceiling_frac] times its initial
  // value so multiplicative drift cannot run away over long horizons.
  double capacity_floor_frac = 0.2;
  double capacity_ceiling_frac = 5.0;

  // Learning curve: latent accuracy a = a_max * (1 - exp(-kappa * E)) where
  // E is cumulative effective resources. Per-round return noise shares the
  // beta group structure and has standard deviation noise_std exactly.
  double a_max = 1.0;
  double kappa = 0.02;
  double noise_std = 0.01;

  // Client lifecycle events, all disabled by default.
  double p_breakdown = 0.0;
  double p_leave = 0.0;
  double p_join = 0.0;

  void validate() const;

  bool operator==(const SimConfig&) const = default;
};

struct ClientState {
  std::size_t id = 0;
  std::size_t group = 0;
  double capacity = 0.0;
  double initial_capacity = 0.0;
  double unit_cost = 1.0;
  bool active = true;
  // Cumulative effective resources E feeding the learning curve.
  double effective_resources = 0.0;
};

struct GroupState {
  std::size_t id = 0;
  std::vector<std::size_t> members;
};

struct RoundReturns {
  std::size_t round = 0;
  Vector returns;           // dense, indexed by client id; inactive -> 0
  double portfolio_return = 0.0;
};

// The simulated federation. Mutation is single-threaded; replications run
// independent World instances. Every trajectory is a pure function of
// (config, seed): each round consumes a fixed number of draws regardless of
// the allocation, so runs with different strategies stay on paired
// trajectories.
class World {
 public:
  // Draw order: one size per group, then one capacity per client in id
  // order, then one unit cost per client in id order.
  static World init(const SimConfig& config, std::uint64_t seed);

  const SimConfig& config() const { return cfg_; }
  const std::vector<ClientState>& clients() const { return clients_; }
  const std::vector<GroupState>& groups() const { return groups_; }
  std::size_t round() const { return round_; }
  double global_accuracy() const { return global_acc_; }
  std::vector<std::size_t> active_clients() const;

  // Applies one multiplicative capacity shock per client (one shared draw
  // per group, then one draw per client) and clamps. Returns the largest
  // pre-clamp |relative change| seen this round.
  double step_capacities();

  // One draw per client: active clients break down or leave, inactive ones
  // rejoin. No-op in distribution when all event probabilities are zero,
  // but the draws are still consumed.
  void mark_events();

  // Converts rewards into resources (min(reward / cost, capacity)),
  // advances the learning curves, and realizes noisy returns. Consumes one
  // noise draw per group plus one per client. The portfolio return is the
  // sum of rewarded clients' returns over the active-client count.
  RoundReturns realize_round(const std::map<std::size_t, double>& rewards);

  // Debug snapshot as a JSON object string.
  std::string to_json() const;

 private:
  SimConfig cfg_;
  Rng rng_{0};
  std::size_t round_ = 0;
  double global_acc_ = 0.0;
  std::vector<ClientState> clients_;
  std::vector<GroupState> groups_;

  explicit World(const SimConfig& config, std::uint64_t seed)
      : cfg_(config), rng_(seed) {}
};

}  // namespace fedfolio
