#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedfolio/alloc.hpp"
#include "fedfolio/io.hpp"
#include "fedfolio/sim.hpp"
#include "fedfolio/stats.hpp"

namespace fedfolio {

struct ExperimentConfig {
  SimConfig sim;
  std::string strategy = "portfolio";
  // Strategy set used by sweeps and comparisons.
  std::vector<std::string> strategies = {"portfolio", "random", "greedy",
                                         "auction"};
  double budget = 400.0;
  std::size_t rounds = 50;   // T
  std::size_t warmup = 5;    // W, uniform rounds before the strategy runs
  std::size_t window = 20;   // H, sliding return-history length
  double cap = 0.25;         // per-client share of budget
  std::string mode = "adaptive";  // or "static": solve once after warmup
  std::vector<std::uint64_t> seeds = {1};
  PortfolioOptions portfolio;
  std::string out_dir = "out";

  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

struct RoundRecord {
  std::size_t round = 0;  // 1-based
  std::map<std::size_t, double> rewards;
  Vector returns;
  double portfolio_return = 0.0;
  double cum_utility = 0.0;
  double unspent = 0.0;
  bool fallback_uniform = false;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::string strategy;
  double budget = 0.0;
  std::vector<RoundRecord> rounds;
  double utility = 0.0;      // sum of per-round portfolio returns
  double first10_mean = 0.0; // mean portfolio return of the first 10 rounds
  double final_accuracy = 0.0;
  double wall_ms = 0.0;      // diagnostic only, never persisted
};

struct StrategySummary {
  std::string strategy;
  double budget = 0.0;
  std::vector<std::uint64_t> seeds;
  Vector utilities;
  Vector first10;
  double mean_utility = 0.0;
  double std_utility = 0.0;  // valid only when has_std
  double mean_first10 = 0.0;
  double std_first10 = 0.0;
  bool has_std = false;
};

struct ReplicatedResult {
  StrategySummary summary;
  std::vector<RunResult> runs;
};

struct Comparison {
  std::string reference;
  std::string baseline;
  stats::PairedTest utility_test;
};

struct SweepResult {
  std::vector<StrategySummary> cells;
  std::vector<Comparison> comparisons;
};

// One full round loop: init, then per round capacity step, events,
// allocation (uniform during warmup), and return realization.
RunResult run_single(const ExperimentConfig& config, std::uint64_t seed);

// run_single over every configured seed. If a seed fails, the completed
// runs are flushed to <out_dir>/partial_rounds.csv before rethrowing.
ReplicatedResult run_replicated(const ExperimentConfig& config);

// Full cross of budgets x configured strategies x seeds. Budgets must be
// strictly increasing.
SweepResult budget_sweep(const ExperimentConfig& config,
                         const std::vector<double>& budgets);

// Shared seeds across strategies (paired design) plus paired one-sided
// t-tests of the reference strategy extra utility over each baseline. The
// reference is "portfolio" when listed, else the first strategy.
SweepResult compare_strategies(const ExperimentConfig& config,
                               const std::vector<std::string>& strategies);

std::vector<io::RoundRow> to_rows(const RunResult& run);

// format is "csv" or "json-lines".
void persist_runs(const std::vector<RunResult>& runs, const std::string& path,
                  const std::string& format);

std::string sweep_to_csv(const SweepResult& sweep);
std::string summary_json(const SweepResult& sweep);

}  // namespace fedfolio
