#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "fedfolio/error.hpp"
#include "fedfolio/sim.hpp"
#include "json.hpp"

using namespace fedfolio;

namespace {

SimConfig tiny_config(std::size_t groups, std::size_t size) {
  SimConfig cfg;
  cfg.groups = groups;
  cfg.group_size_min = size;
  cfg.group_size_max = size;
  return cfg;
}

// Pearson correlation of two equal-length series.
double corr(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Average pairwise correlation of per-client return noise in a one-group
// world driven with zero rewards.
double noise_group_corr(double beta, std::size_t clients, std::size_t rounds,
                        std::uint64_t seed) {
  SimConfig cfg = tiny_config(1, clients);
  cfg.beta = beta;
  World w = World::init(cfg, seed);
  std::vector<std::vector<double>> series(clients);
  for (std::size_t t = 0; t < rounds; ++t) {
    RoundReturns r = w.realize_round({});
    for (std::size_t i = 0; i < clients; ++i) series[i].push_back(r.returns[i]);
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < clients; ++i) {
    for (std::size_t j = i + 1; j < clients; ++j) {
      sum += corr(series[i], series[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

}  // namespace

TEST_CASE("config validation") {
  SimConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  auto rejects = [](auto&& mutate) {
    SimConfig c;
    mutate(c);
    try {
      c.validate();
      FAIL("expected invalid config");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::kInvalidConfig);
    }
  };
  rejects([](SimConfig& c) { c.groups = 0; });
  rejects([](SimConfig& c) { c.group_size_min = 0; });
  rejects([](SimConfig& c) { c.group_size_min = 9; c.group_size_max = 3; });
  rejects([](SimConfig& c) { c.capacity_min = 0.0; });
  rejects([](SimConfig& c) { c.capacity_min = 8.0; });
  rejects([](SimConfig& c) { c.cost_min = -0.1; });
  rejects([](SimConfig& c) { c.shock_scale = 1.0; });
  rejects([](SimConfig& c) { c.beta = 1.5; });
  rejects([](SimConfig& c) { c.capacity_floor_frac = 0.0; });
  rejects([](SimConfig& c) { c.capacity_ceiling_frac = 0.5; });
  rejects([](SimConfig& c) { c.a_max = 0.0; });
  rejects([](SimConfig& c) { c.kappa = 0.0; });
  rejects([](SimConfig& c) { c.noise_std = -1e-9; });
  rejects([](SimConfig& c) { c.p_breakdown = 1.1; });
  rejects([](SimConfig& c) { c.p_join = -0.2; });
}

TEST_CASE("world initialization") {
  SUBCASE("degenerate ranges pin every draw") {
    SimConfig cfg = tiny_config(1, 1);
    cfg.capacity_min = cfg.capacity_max = 5.0;
    cfg.cost_min = cfg.cost_max = 1.0;
    World w = World::init(cfg, 3);
    REQUIRE(w.clients().size() == 1);
    CHECK(w.clients()[0].capacity == 5.0);
    CHECK(w.clients()[0].unit_cost == 1.0);
    CHECK(w.clients()[0].group == 0);
    CHECK(w.clients()[0].active);
    CHECK(w.round() == 0);
    CHECK(w.global_accuracy() == 0.0);
  }
  SUBCASE("defaults produce the documented population") {
    World w = World::init(SimConfig{}, 42);
    CHECK(w.groups().size() == 15);
    CHECK(w.clients().size() >= 150);
    CHECK(w.clients().size() <= 225);
    std::size_t id = 0;
    for (const auto& g : w.groups()) {
      CHECK(g.members.size() >= 10);
      CHECK(g.members.size() <= 15);
      for (std::size_t m : g.members) {
        CHECK(m == id++);
        CHECK(w.clients()[m].group == g.id);
      }
    }
    CHECK(id == w.clients().size());
    for (const auto& c : w.clients()) {
      CHECK(c.capacity >= 3.0);
      CHECK(c.capacity <= 7.0);
      CHECK(c.unit_cost >= 0.8);
      CHECK(c.unit_cost <= 1.2);
      CHECK(c.initial_capacity == c.capacity);
    }
    CHECK(w.active_clients().size() == w.clients().size());
  }
  SUBCASE("same seed reproduces the world, different seed does not") {
    World a = World::init(SimConfig{}, 7);
    World b = World::init(SimConfig{}, 7);
    World c = World::init(SimConfig{}, 8);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_json() != c.to_json());

    a.step_capacities();
    b.step_capacities();
    RoundReturns ra = a.realize_round({{0, 3.0}});
    RoundReturns rb = b.realize_round({{0, 3.0}});
    CHECK(ra.returns == rb.returns);
    CHECK(ra.portfolio_return == rb.portfolio_return);
    CHECK(a.to_json() == b.to_json());
  }
  SUBCASE("world state serializes with per-client detail") {
    World w = World::init(tiny_config(2, 3), 1);
    auto j = nlohmann::json::parse(w.to_json());
    CHECK(j["clients"].size() == 6);
    CHECK(j["groups"].size() == 2);
    CHECK(j["round"] == 0);
    CHECK(j["clients"][0].contains("capacity"));
    CHECK(j["clients"][0].contains("effective_resources"));
  }
}

TEST_CASE("capacity shocks") {
  SUBCASE("relative change is bounded by the shock scale") {
    World w = World::init(SimConfig{}, 11);
    for (int t = 0; t < 200; ++t) {
      double m = w.step_capacities();
      CHECK(m <= 0.15);
      CHECK(m >= 0.0);
    }
    for (const auto& c : w.clients()) {
      CHECK(c.capacity >= 0.2 * c.initial_capacity);
      CHECK(c.capacity <= 5.0 * c.initial_capacity);
    }
  }
  SUBCASE("beta = 1 moves a group in lockstep") {
    SimConfig cfg = tiny_config(3, 6);
    cfg.beta = 1.0;
    World w = World::init(cfg, 13);
    std::vector<double> before(w.clients().size());
    for (int t = 0; t < 3; ++t) {
      for (const auto& c : w.clients()) before[c.id] = c.capacity;
      w.step_capacities();
      for (const auto& g : w.groups()) {
        double ref = w.clients()[g.members[0]].capacity / before[g.members[0]];
        for (std::size_t m : g.members) {
          CHECK(std::abs(w.clients()[m].capacity / before[m] - ref) < 1e-12);
        }
      }
    }
  }
  SUBCASE("beta = 0 leaves clients uncorrelated") {
    SimConfig cfg = tiny_config(1, 10);
    cfg.beta = 0.0;
    cfg.shock_scale = 0.01;
    cfg.capacity_floor_frac = 1e-6;
    cfg.capacity_ceiling_frac = 1e6;
    World w = World::init(cfg, 17);
    const std::size_t rounds = 10000;
    std::vector<std::vector<double>> rel(10);
    std::vector<double> before(10);
    for (std::size_t t = 0; t < rounds; ++t) {
      for (const auto& c : w.clients()) before[c.id] = c.capacity;
      w.step_capacities();
      for (const auto& c : w.clients()) {
        rel[c.id].push_back(c.capacity / before[c.id] - 1.0);
      }
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < 10; ++i) {
      for (std::size_t j = i + 1; j < 10; ++j) {
        double r = corr(rel[i], rel[j]);
        CHECK(std::abs(r) < 0.06);
        sum += r;
        ++pairs;
      }
    }
    CHECK(std::abs(sum / pairs) < 0.02);
  }
  SUBCASE("pinned clamp still reports the raw shock") {
    SimConfig cfg = tiny_config(1, 4);
    cfg.capacity_floor_frac = 1.0;
    cfg.capacity_ceiling_frac = 1.0;
    World w = World::init(cfg, 19);
    double moved = 0.0;
    for (int t = 0; t < 20; ++t) moved = std::max(moved, w.step_capacities());
    CHECK(moved > 0.0);
    for (const auto& c : w.clients()) {
      CHECK(c.capacity == c.initial_capacity);
    }
  }
}

TEST_CASE("learning returns") {
  SUBCASE("first reward follows the saturating curve exactly") {
    SimConfig cfg = tiny_config(1, 1);
    cfg.capacity_min = cfg.capacity_max = 5.0;
    cfg.cost_min = cfg.cost_max = 2.0;
    cfg.noise_std = 0.0;
    World w = World::init(cfg, 5);
    RoundReturns r = w.realize_round({{0, 4.0}});
    // resources = min(4/2, 5) = 2
    double expected = 1.0 * (1.0 - std::exp(-0.02 * 2.0));
    CHECK(r.returns[0] == doctest::Approx(expected).epsilon(1e-14));
    CHECK(r.portfolio_return == doctest::Approx(expected).epsilon(1e-14));
    CHECK(w.clients()[0].effective_resources == doctest::Approx(2.0));
  }
  SUBCASE("capacity caps the purchased resources") {
    SimConfig cfg = tiny_config(1, 1);
    cfg.capacity_min = cfg.capacity_max = 3.0;
    cfg.cost_min = cfg.cost_max = 1.0;
    cfg.noise_std = 0.0;
    World w = World::init(cfg, 5);
    w.realize_round({{0, 1000.0}});
    CHECK(w.clients()[0].effective_resources == doctest::Approx(3.0));
  }
  SUBCASE("returns shrink as investment accumulates") {
    SimConfig cfg = tiny_config(1, 1);
    cfg.capacity_min = cfg.capacity_max = 5.0;
    cfg.cost_min = cfg.cost_max = 1.0;
    cfg.noise_std = 0.0;
    World w = World::init(cfg, 5);
    double prev = 1e300;
    double total = 0.0;
    for (int t = 0; t < 1000; ++t) {
      RoundReturns r = w.realize_round({{0, 400.0}});
      CHECK(r.returns[0] < prev);
      CHECK(r.returns[0] > 0.0);
      prev = r.returns[0];
      total += r.returns[0];
    }
    CHECK(total <= 1.0);
    CHECK(total > 0.999);
    CHECK(w.global_accuracy() == doctest::Approx(std::min(total, 1.0)));
  }
  SUBCASE("steep curve saturates in one round") {
    SimConfig cfg = tiny_config(1, 1);
    cfg.capacity_min = cfg.capacity_max = 5.0;
    cfg.cost_min = cfg.cost_max = 1.0;
    cfg.kappa = 5.0;
    cfg.noise_std = 0.0;
    World w = World::init(cfg, 5);
    RoundReturns r = w.realize_round({{0, 10.0}});
    CHECK(r.returns[0] > 1.0 - 1e-5);
  }
  SUBCASE("zero rewards leave training untouched") {
    SimConfig cfg = tiny_config(2, 3);
    cfg.noise_std = 0.02;
    World w = World::init(cfg, 23);
    for (int t = 0; t < 50; ++t) {
      RoundReturns r = w.realize_round({});
      CHECK(r.portfolio_return == 0.0);
    }
    for (const auto& c : w.clients()) {
      CHECK(c.effective_resources == 0.0);
    }
    CHECK(w.global_accuracy() == 0.0);
    CHECK(w.round() == 50);
  }
  SUBCASE("portfolio return averages rewarded clients over all active") {
    SimConfig cfg = tiny_config(1, 3);
    World a = World::init(cfg, 29);
    RoundReturns ra = a.realize_round({{0, 10.0}, {2, 7.0}});
    CHECK(ra.portfolio_return ==
          doctest::Approx((ra.returns[0] + ra.returns[2]) / 3.0)
              .epsilon(1e-15));

    // A zero-amount entry changes nothing.
    World b = World::init(cfg, 29);
    RoundReturns rb = b.realize_round({{0, 10.0}, {1, 0.0}, {2, 7.0}});
    CHECK(rb.returns == ra.returns);
    CHECK(rb.portfolio_return == ra.portfolio_return);
  }
  SUBCASE("reward validation") {
    World w = World::init(tiny_config(1, 3), 31);
    try {
      w.realize_round({{99, 1.0}});
      FAIL("expected unknown client");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::kUnknownClient);
    }
    try {
      w.realize_round({{0, -1.0}});
      FAIL("expected invalid allocation");
    } catch (const Error& e) {
      CHECK(e.category() == ErrorCategory::kInvalidAllocation);
    }
  }
  SUBCASE("noise std matches the configured scale for any beta") {
    for (double beta : {0.0, 0.5, 0.9}) {
      SimConfig cfg = tiny_config(1, 4);
      cfg.beta = beta;
      cfg.noise_std = 0.02;
      World w = World::init(cfg, 37);
      std::vector<double> xs;
      for (int t = 0; t < 5000; ++t) {
        RoundReturns r = w.realize_round({});
        xs.push_back(r.returns[0]);
      }
      double m = 0.0;
      for (double x : xs) m += x;
      m /= xs.size();
      double v = 0.0;
      for (double x : xs) v += (x - m) * (x - m);
      v /= (xs.size() - 1);
      CHECK(std::sqrt(v) > 0.017);
      CHECK(std::sqrt(v) < 0.023);
    }
  }
}

TEST_CASE("group correlation grows with beta") {
  double c0 = noise_group_corr(0.0, 12, 2000, 41);
  double c6 = noise_group_corr(0.6, 12, 2000, 41);
  double c9 = noise_group_corr(0.9, 12, 2000, 41);
  CHECK(std::abs(c0) < 0.05);
  CHECK(c6 > 0.6);
  CHECK(c6 < 0.78);
  CHECK(c9 > 0.9);
  CHECK(c0 < c6);
  CHECK(c6 < c9);
}

TEST_CASE("client events") {
  SUBCASE("zero probabilities change nothing") {
    World w = World::init(tiny_config(3, 5), 43);
    for (int t = 0; t < 100; ++t) {
      w.mark_events();
      CHECK(w.active_clients().size() == 15);
    }
  }
  SUBCASE("certain breakdown and certain rejoin alternate") {
    SimConfig cfg = tiny_config(2, 4);
    cfg.p_breakdown = 1.0;
    cfg.p_join = 1.0;
    World w = World::init(cfg, 47);
    w.mark_events();
    CHECK(w.active_clients().empty());
    RoundReturns r = w.realize_round({});
    CHECK(r.portfolio_return == 0.0);
    for (double x : r.returns) CHECK(x == 0.0);
    w.mark_events();
    CHECK(w.active_clients().size() == 8);
  }
  SUBCASE("rewarding an inactive client is a no-op") {
    SimConfig cfg = tiny_config(1, 2);
    cfg.p_breakdown = 1.0;
    World w = World::init(cfg, 53);
    w.mark_events();
    RoundReturns r = w.realize_round({{0, 100.0}});
    CHECK(r.returns[0] == 0.0);
    CHECK(w.clients()[0].effective_resources == 0.0);
  }
  SUBCASE("breakdown rate matches the configured probability") {
    SimConfig cfg = tiny_config(10, 12);
    cfg.p_breakdown = 0.1;
    std::size_t off = 0, at_risk = 0;
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
      World w = World::init(cfg, seed);
      for (int t = 0; t < 10; ++t) {
        std::size_t before = w.active_clients().size();
        w.mark_events();
        std::size_t after = w.active_clients().size();
        at_risk += before;
        off += before - after;
      }
    }
    double rate = static_cast<double>(off) / static_cast<double>(at_risk);
    CHECK(std::abs(rate - 0.1) < 0.012);
  }
  SUBCASE("breakdown and leave probabilities compose") {
    SimConfig cfg = tiny_config(10, 12);
    cfg.p_breakdown = 0.5;
    cfg.p_leave = 0.5;
    std::size_t off = 0, at_risk = 0;
    for (std::uint64_t seed = 200; seed < 220; ++seed) {
      World w = World::init(cfg, seed);
      std::size_t before = w.active_clients().size();
      w.mark_events();
      at_risk += before;
      off += before - w.active_clients().size();
    }
    double rate = static_cast<double>(off) / static_cast<double>(at_risk);
    CHECK(std::abs(rate - 0.75) < 0.04);
  }
}
