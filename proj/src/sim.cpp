#include "fedfolio/sim.hpp"

#include <algorithm>
#include <cmath>

#include "fedfolio/error.hpp"
#include "json.hpp"

namespace fedfolio {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) {
    throw Error(ErrorCategory::kInvalidConfig, field + " " + what);
  }
}

}  // namespace

void SimConfig::validate() const {
  require(groups >= 1, "groups", "must be >= 1");
  require(group_size_min >= 1, "group_size_min", "must be >= 1");
  require(group_size_min <= group_size_max, "group_size_min",
          "must be <= group_size_max");
  require(capacity_min > 0.0, "capacity_min", "must be > 0");
  require(capacity_min <= capacity_max, "capacity_min",
          "must be <= capacity_max");
  require(cost_min > 0.0, "cost_min", "must be > 0");
  require(cost_min <= cost_max, "cost_min", "must be <= cost_max");
  require(shock_scale >= 0.0 && shock_scale < 1.0, "shock_scale",
          "must be in [0, 1)");
  require(beta >= 0.0 && beta <= 1.0, "beta", "must be in [0, 1]");
  require(capacity_floor_frac > 0.0 && capacity_floor_frac <= 1.0,
          "capacity_floor_frac", "must be in (0, 1]");
  require(capacity_ceiling_frac >= 1.0, "capacity_ceiling_frac",
          "must be >= 1");
  require(a_max > 0.0, "a_max", "must be > 0");
  require(kappa > 0.0, "kappa", "must be > 0");
  require(noise_std >= 0.0, "noise_std", "must be >= 0");
  require(p_breakdown >= 0.0 && p_breakdown <= 1.0, "p_breakdown",
          "must be in [0, 1]");
  require(p_leave >= 0.0 && p_leave <= 1.0, "p_leave", "must be in [0, 1]");
  require(p_join >= 0.0 && p_join <= 1.0, "p_join", "must be in [0, 1]");
}

World World::init(const SimConfig& config, std::uint64_t seed) {
  config.validate();
  World world(config, seed);

  std::vector<std::size_t> sizes(config.groups);
  for (std::size_t g = 0; g < config.groups; ++g) {
    sizes[g] = static_cast<std::size_t>(world.rng_.uniform_int(
        config.group_size_min, config.group_size_max));
  }

  std::size_t id = 0;
  world.groups_.resize(config.groups);
  for (std::size_t g = 0; g < config.groups; ++g) {
    world.groups_[g].id = g;
    for (std::size_t k = 0; k < sizes[g]; ++k) {
      ClientState c;
      c.id = id++;
      c.group = g;
      world.groups_[g].members.push_back(c.id);
      world.clients_.push_back(c);
    }
  }
  for (auto& c : world.clients_) {
    c.capacity = world.rng_.uniform(config.capacity_min, config.capacity_max);
    c.initial_capacity = c.capacity;
  }
  for (auto& c : world.clients_) {
    c.unit_cost = world.rng_.uniform(config.cost_min, config.cost_max);
  }
  return world;
}

std::vector<std::size_t> World::active_clients() const {
  std::vector<std::size_t> ids;
  ids.reserve(clients_.size());
  for (const auto& c : clients_) {
    if (c.active) ids.push_back(c.id);
  }
  return ids;
}

double World::step_capacities() {
  std::vector<double> group_shock(groups_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    group_shock[g] = rng_.uniform(-1.0, 1.0);
  }
  double max_change = 0.0;
  for (auto& c : clients_) {
    double eps = rng_.uniform(-1.0, 1.0);
    double mix = cfg_.beta * group_shock[c.group] + (1.0 - cfg_.beta) * eps;
    double delta = cfg_.shock_scale * mix;
    max_change = std::max(max_change, std::abs(delta));
    double lo = cfg_.capacity_floor_frac * c.initial_capacity;
    double hi = cfg_.capacity_ceiling_frac * c.initial_capacity;
    c.capacity = std::clamp(c.capacity * (1.0 + delta), lo, hi);
  }
  return max_change;
}

void World::mark_events() {
  const double p_off =
      1.0 - (1.0 - cfg_.p_breakdown) * (1.0 - cfg_.p_leave);
  for (auto& c : clients_) {
    double u = rng_.uniform01();
    if (c.active) {
      if (u < p_off) c.active = false;
    } else {
      if (u < cfg_.p_join) c.active = true;
    }
  }
}

RoundReturns World::realize_round(const std::map<std::size_t, double>& rewards) {
  for (const auto& [id, amount] : rewards) {
    if (id >= clients_.size()) {
      throw Error(ErrorCategory::kUnknownClient,
                  "reward for unknown client id " + std::to_string(id));
    }
    if (!(amount >= 0.0)) {
      throw Error(ErrorCategory::kInvalidAllocation,
                  "negative reward for client " + std::to_string(id));
    }
  }

  std::vector<double> group_noise(groups_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    group_noise[g] = rng_.uniform(-1.0, 1.0);
  }
  // Normalize the uniform mixture so the per-client noise std is exactly
  // noise_std for every beta.
  const double b = cfg_.beta;
  const double norm =
      cfg_.noise_std * std::sqrt(3.0 / (b * b + (1.0 - b) * (1.0 - b)));

  RoundReturns out;
  out.round = round_ + 1;
  out.returns.assign(clients_.size(), 0.0);

  double rewarded_sum = 0.0;
  std::size_t n_active = 0;
  for (auto& c : clients_) {
    double eta = rng_.uniform(-1.0, 1.0);
    if (!c.active) continue;
    ++n_active;

    double reward = 0.0;
    if (auto it = rewards.find(c.id); it != rewards.end()) {
      reward = it->second;
    }
    double resources = std::min(reward / c.unit_cost, c.capacity);
    double e0 = c.effective_resources;
    double e1 = e0 + resources;
    double gain =
        cfg_.a_max * (std::exp(-cfg_.kappa * e0) - std::exp(-cfg_.kappa * e1));
    c.effective_resources = e1;

    double noise = norm * (b * group_noise[c.group] + (1.0 - b) * eta);
    out.returns[c.id] = gain + noise;
    if (reward > 0.0) rewarded_sum += out.returns[c.id];
  }

  out.portfolio_return =
      n_active > 0 ? rewarded_sum / static_cast<double>(n_active) : 0.0;
  global_acc_ = std::clamp(global_acc_ + out.portfolio_return, 0.0, 1.0);
  ++round_;
  return out;
}

std::string World::to_json() const {
  nlohmann::json j;
  j["round"] = round_;
  j["global_accuracy"] = global_acc_;
  j["groups"] = nlohmann::json::array();
  for (const auto& g : groups_) {
    j["groups"].push_back({{"id", g.id}, {"members", g.members}});
  }
  j["clients"] = nlohmann::json::array();
  for (const auto& c : clients_) {
    j["clients"].push_back({{"id", c.id},
                            {"group", c.group},
                            {"capacity", c.capacity},
                            {"unit_cost", c.unit_cost},
                            {"active", c.active},
                            {"effective_resources", c.effective_resources}});
  }
  return j.dump(2);
}

}  // namespace fedfolio
