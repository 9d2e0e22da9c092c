#include "fedfolio/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>

#include "fedfolio/error.hpp"
#include "json.hpp"

namespace fedfolio {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

AllocationRequest make_request(const ExperimentConfig& cfg, const World& world,
                               const std::vector<std::size_t>& eligible,
                               const std::vector<Vector>& history) {
  AllocationRequest req;
  req.budget = cfg.budget;
  req.eligible = eligible;
  req.cap = cfg.cap;
  req.history.reserve(eligible.size());
  req.unit_costs.reserve(eligible.size());
  for (std::size_t id : eligible) {
    req.history.push_back(history[id]);
    req.unit_costs.push_back(world.clients()[id].unit_cost);
  }
  return req;
}

StrategySummary summarize(const std::string& strategy, double budget,
                          const std::vector<RunResult>& runs) {
  StrategySummary s;
  s.strategy = strategy;
  s.budget = budget;
  for (const auto& r : runs) {
    s.seeds.push_back(r.seed);
    s.utilities.push_back(r.utility);
    s.first10.push_back(r.first10_mean);
  }
  s.mean_utility = stats::mean(s.utilities);
  s.mean_first10 = stats::mean(s.first10);
  if (runs.size() >= 2) {
    s.std_utility = stats::sample_std(s.utilities);
    s.std_first10 = stats::sample_std(s.first10);
    s.has_std = true;
  }
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  sim.validate();
  parse_strategy(strategy);
  for (const auto& s : strategies) parse_strategy(s);
  if (!(budget >= 0.0)) {
    throw Error(ErrorCategory::kInvalidConfig, "budget must be >= 0");
  }
  if (rounds < 1) {
    throw Error(ErrorCategory::kInvalidConfig, "rounds must be >= 1");
  }
  if (warmup < 2) {
    throw Error(ErrorCategory::kInvalidConfig, "warmup must be >= 2");
  }
  if (warmup > rounds) {
    throw Error(ErrorCategory::kWarmupTooLong,
                "warmup " + std::to_string(warmup) + " exceeds rounds " +
                    std::to_string(rounds));
  }
  if (window < 1) {
    throw Error(ErrorCategory::kInvalidConfig, "window must be >= 1");
  }
  if (!(cap > 0.0) || cap > 1.0) {
    throw Error(ErrorCategory::kInvalidConfig, "cap must be in (0, 1]");
  }
  if (mode != "static" && mode != "adaptive") {
    throw Error(ErrorCategory::kInvalidConfig,
                "mode must be static or adaptive");
  }
  if (seeds.empty()) {
    throw Error(ErrorCategory::kInvalidConfig, "seeds must be nonempty");
  }
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) {
    throw Error(ErrorCategory::kDuplicateSeed,
                "seed list contains duplicates");
  }
}

RunResult run_single(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  const Strategy strat = parse_strategy(config.strategy);
  const auto t_start = std::chrono::steady_clock::now();

  World world = World::init(config.sim, seed);
  Rng alloc_rng(seed ^ fnv1a(config.strategy));
  const std::size_t n = world.clients().size();
  std::vector<Vector> history(n);

  RunResult out;
  out.seed = seed;
  out.strategy = config.strategy;
  out.budget = config.budget;
  out.rounds.reserve(config.rounds);

  RewardAllocation frozen;
  bool have_frozen = false;
  Vector warm_start;
  double cum = 0.0;

  for (std::size_t t = 1; t <= config.rounds; ++t) {
    try {
      world.step_capacities();
      world.mark_events();

      RewardAllocation alloc;
      alloc.strategy = config.strategy;
      if (config.budget > 0.0) {
        std::vector<std::size_t> eligible = world.active_clients();
        if (!eligible.empty()) {
          if (warmup_round(t, config.warmup)) {
            alloc = allocate_uniform(
                make_request(config, world, eligible, history));
          } else if (config.mode == "static" && have_frozen) {
            alloc = frozen;
          } else {
            AllocationRequest req =
                make_request(config, world, eligible, history);
            switch (strat) {
              case Strategy::kPortfolio: {
                PortfolioOptions opt = config.portfolio;
                if (warm_start.size() == eligible.size()) {
                  opt.solver.initial = warm_start;
                }
                alloc = allocate_portfolio(req, opt);
                if (alloc.weights.size() == eligible.size()) {
                  warm_start = alloc.weights;
                }
                break;
              }
              case Strategy::kRandom:
                alloc = allocate_random(req, alloc_rng);
                break;
              case Strategy::kGreedy:
                alloc = allocate_greedy(req);
                break;
              case Strategy::kAuction:
                alloc = allocate_auction(req);
                break;
            }
            if (config.mode == "static") {
              frozen = alloc;
              have_frozen = true;
            }
          }
        }
      }

      RoundReturns rr = world.realize_round(alloc.rewards);
      for (std::size_t i = 0; i < n; ++i) {
        history[i].push_back(rr.returns[i]);
        if (history[i].size() > config.window) {
          history[i].erase(history[i].begin());
        }
      }
      cum += rr.portfolio_return;

      RoundRecord rec;
      rec.round = t;
      rec.rewards = std::move(alloc.rewards);
      rec.returns = std::move(rr.returns);
      rec.portfolio_return = rr.portfolio_return;
      rec.cum_utility = cum;
      rec.unspent = alloc.unspent;
      rec.fallback_uniform = alloc.fallback_uniform;
      out.rounds.push_back(std::move(rec));
    } catch (const Error& e) {
      throw Error(e.category(),
                  "round " + std::to_string(t) + ": " + e.message());
    }
  }

  out.utility = cum;
  const std::size_t k = std::min<std::size_t>(10, out.rounds.size());
  double first = 0.0;
  for (std::size_t i = 0; i < k; ++i) first += out.rounds[i].portfolio_return;
  out.first10_mean = k > 0 ? first / static_cast<double>(k) : 0.0;
  out.final_accuracy = world.global_accuracy();
  out.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t_start)
                    .count();
  return out;
}

ReplicatedResult run_replicated(const ExperimentConfig& config) {
  config.validate();
  ReplicatedResult out;
  for (std::uint64_t seed : config.seeds) {
    try {
      out.runs.push_back(run_single(config, seed));
    } catch (const Error& e) {
      if (!out.runs.empty() && !config.out_dir.empty()) {
        std::filesystem::create_directories(config.out_dir);
        persist_runs(out.runs, config.out_dir + "/partial_rounds.csv", "csv");
      }
      throw Error(e.category(),
                  "seed " + std::to_string(seed) + ": " + e.message());
    }
  }
  out.summary = summarize(config.strategy, config.budget, out.runs);
  return out;
}

SweepResult budget_sweep(const ExperimentConfig& config,
                         const std::vector<double>& budgets) {
  config.validate();
  if (budgets.empty()) {
    throw Error(ErrorCategory::kInvalidConfig, "budget list is empty");
  }
  for (std::size_t i = 1; i < budgets.size(); ++i) {
    if (!(budgets[i] > budgets[i - 1])) {
      throw Error(ErrorCategory::kInvalidConfig,
                  "budgets must be strictly increasing");
    }
  }
  SweepResult out;
  for (double b : budgets) {
    for (const auto& s : config.strategies) {
      ExperimentConfig cell = config;
      cell.budget = b;
      cell.strategy = s;
      out.cells.push_back(run_replicated(cell).summary);
    }
  }
  return out;
}

SweepResult compare_strategies(const ExperimentConfig& config,
                               const std::vector<std::string>& strategies) {
  config.validate();
  if (strategies.size() < 2) {
    throw Error(ErrorCategory::kUsage,
                "compare needs at least two strategies");
  }
  for (const auto& s : strategies) parse_strategy(s);

  SweepResult out;
  for (const auto& s : strategies) {
    ExperimentConfig cell = config;
    cell.strategy = s;
    out.cells.push_back(run_replicated(cell).summary);
  }

  std::string reference = strategies.front();
  if (std::find(strategies.begin(), strategies.end(), "portfolio") !=
      strategies.end()) {
    reference = "portfolio";
  }
  const StrategySummary* ref = nullptr;
  for (const auto& c : out.cells) {
    if (c.strategy == reference) {
      ref = &c;
      break;
    }
  }
  if (config.seeds.size() >= 2 && ref != nullptr) {
    for (const auto& c : out.cells) {
      if (c.strategy == reference) continue;
      Comparison cmp;
      cmp.reference = reference;
      cmp.baseline = c.strategy;
      cmp.utility_test = stats::paired_one_sided(ref->utilities, c.utilities);
      out.comparisons.push_back(std::move(cmp));
    }
  }
  return out;
}

std::vector<io::RoundRow> to_rows(const RunResult& run) {
  std::vector<io::RoundRow> rows;
  for (const auto& rec : run.rounds) {
    for (std::size_t id = 0; id < rec.returns.size(); ++id) {
      io::RoundRow row;
      row.seed = run.seed;
      row.round = rec.round;
      row.strategy = run.strategy;
      row.budget = run.budget;
      row.client_id = id;
      auto it = rec.rewards.find(id);
      row.reward = it != rec.rewards.end() ? it->second : 0.0;
      row.r_i = rec.returns[id];
      row.portfolio_return = rec.portfolio_return;
      row.cum_utility = rec.cum_utility;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void persist_runs(const std::vector<RunResult>& runs, const std::string& path,
                  const std::string& format) {
  if (format != "csv" && format != "json-lines") {
    throw Error(ErrorCategory::kInvalidConfig,
                "format must be csv or json-lines");
  }
  std::vector<io::RoundRow> rows;
  for (const auto& run : runs) {
    auto part = to_rows(run);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  io::write_text_file(path, format == "csv" ? io::rounds_to_csv(rows)
                                            : io::rounds_to_jsonl(rows));
}

std::string sweep_to_csv(const SweepResult& sweep) {
  std::string out =
      "budget,strategy,seeds,mean_U,std_U,mean_first10_Rt,std_first10_Rt";
  out += '\n';
  for (const auto& c : sweep.cells) {
    out += io::format_double(c.budget);
    out += ',';
    out += c.strategy;
    out += ',';
    out += std::to_string(c.seeds.size());
    out += ',';
    out += io::format_double(c.mean_utility);
    out += ',';
    out += c.has_std ? io::format_double(c.std_utility) : "";
    out += ',';
    out += io::format_double(c.mean_first10);
    out += ',';
    out += c.has_std ? io::format_double(c.std_first10) : "";
    out += '\n';
  }
  return out;
}

std::string summary_json(const SweepResult& sweep) {
  nlohmann::json j;
  j["cells"] = nlohmann::json::array();
  for (const auto& c : sweep.cells) {
    nlohmann::json cell;
    cell["budget"] = c.budget;
    cell["strategy"] = c.strategy;
    cell["seeds"] = c.seeds;
    cell["utilities"] = c.utilities;
    cell["mean_U"] = c.mean_utility;
    cell["mean_first10_Rt"] = c.mean_first10;
    if (c.has_std) {
      cell["std_U"] = c.std_utility;
      cell["std_first10_Rt"] = c.std_first10;
    }
    j["cells"].push_back(std::move(cell));
  }
  j["comparisons"] = nlohmann::json::array();
  for (const auto& cmp : sweep.comparisons) {
    j["comparisons"].push_back({{"reference", cmp.reference},
                                {"baseline", cmp.baseline},
                                {"mean_diff", cmp.utility_test.mean_diff},
                                {"t_stat", cmp.utility_test.t_stat},
                                {"p_value", cmp.utility_test.p_value},
                                {"pairs", cmp.utility_test.n}});
  }
  return j.dump(2);
}

}  // namespace fedfolio
