#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedfolio/config.hpp"
#include "fedfolio/error.hpp"
#include "fedfolio/harness.hpp"
#include "fedfolio/io.hpp"
#include "fedfolio/portfolio.hpp"
#include "json.hpp"

namespace {

using namespace fedfolio;

struct CommonFlags {
  std::string config_path;
  std::string seeds;
  std::string strategy;
  std::string mode;
  std::string out_dir;
  double budget = 0.0;
  std::int64_t rounds = -1;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--budget", f.budget, "Reward budget per round");
  cmd->add_option("--seeds", f.seeds, "Comma-separated seed list");
  cmd->add_option("--strategy", f.strategy,
                  "portfolio|random|greedy|auction");
  cmd->add_option("--rounds", f.rounds, "Rounds per run");
  cmd->add_option("--mode", f.mode, "static|adaptive");
  cmd->add_option("--out", f.out_dir, "Output directory");
  cmd->add_flag("--quiet", f.quiet, "Suppress progress output");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : split_list(s)) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(ErrorCategory::kUsage, "bad seed \"" + part + "\"");
    }
  }
  if (seeds.empty()) {
    throw Error(ErrorCategory::kUsage, "empty seed list");
  }
  return seeds;
}

std::vector<double> parse_number_list(const std::string& s,
                                      const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split_list(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(ErrorCategory::kUsage, "bad " + what + " \"" + part + "\"");
    }
  }
  if (out.empty()) {
    throw Error(ErrorCategory::kUsage, "empty " + what + " list");
  }
  return out;
}

ExperimentConfig load_config(const CommonFlags& f) {
  ExperimentConfig cfg = f.config_path.empty()
                             ? parse_config_text("{}")
                             : parse_config(f.config_path);
  if (f.budget > 0.0) cfg.budget = f.budget;
  if (!f.seeds.empty()) cfg.seeds = parse_seed_list(f.seeds);
  if (!f.strategy.empty()) cfg.strategy = f.strategy;
  if (f.rounds >= 0) cfg.rounds = static_cast<std::size_t>(f.rounds);
  if (!f.mode.empty()) cfg.mode = f.mode;
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  cfg.validate();
  return cfg;
}

void note(const CommonFlags& f, const std::string& line) {
  if (!f.quiet) std::cout << line << "\n";
}

std::string ensure_out_dir(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  return cfg.out_dir;
}

int cmd_run(const CommonFlags& flags, const std::string& format) {
  ExperimentConfig cfg = load_config(flags);
  const std::string dir = ensure_out_dir(cfg);

  ReplicatedResult rep = run_replicated(cfg);
  SweepResult slice;
  slice.cells.push_back(rep.summary);

  const std::string rounds_path =
      dir + (format == "csv" ? "/rounds.csv" : "/rounds.jsonl");
  const std::string summary_path = dir + "/summary.json";
  persist_runs(rep.runs, rounds_path, format);
  io::write_text_file(summary_path, summary_json(slice));

  note(flags, "strategy " + cfg.strategy + ", mean U " +
                  io::format_double(rep.summary.mean_utility));
  std::cout << rounds_path << "\n" << summary_path << "\n";
  return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& budgets_arg,
              const std::string& strategies_arg) {
  ExperimentConfig cfg = load_config(flags);
  if (!strategies_arg.empty()) cfg.strategies = split_list(strategies_arg);
  if (!flags.strategy.empty()) cfg.strategies = {flags.strategy};
  std::vector<double> budgets =
      budgets_arg.empty()
          ? std::vector<double>{400, 500, 600, 700, 800, 900}
          : parse_number_list(budgets_arg, "budget");

  const std::string dir = ensure_out_dir(cfg);
  SweepResult sweep = budget_sweep(cfg, budgets);

  const std::string csv_path = dir + "/sweep.csv";
  const std::string summary_path = dir + "/summary.json";
  io::write_text_file(csv_path, sweep_to_csv(sweep));
  io::write_text_file(summary_path, summary_json(sweep));
  std::cout << csv_path << "\n" << summary_path << "\n";
  return 0;
}

int cmd_compare(const CommonFlags& flags, const std::string& strategies_arg) {
  ExperimentConfig cfg = load_config(flags);
  std::vector<std::string> strategies =
      strategies_arg.empty() ? cfg.strategies : split_list(strategies_arg);
  if (strategies.size() < 2) {
    throw Error(ErrorCategory::kUsage,
                "compare needs at least two strategies");
  }

  const std::string dir = ensure_out_dir(cfg);
  SweepResult cmp = compare_strategies(cfg, strategies);

  const std::string csv_path = dir + "/compare.csv";
  const std::string summary_path = dir + "/summary.json";
  io::write_text_file(csv_path, sweep_to_csv(cmp));
  io::write_text_file(summary_path, summary_json(cmp));
  std::cout << csv_path << "\n" << summary_path << "\n";
  return 0;
}

// Rebuilds one client-major return matrix from persisted round records,
// using the first (seed, strategy) pair in the file.
std::vector<Vector> history_from_rows(const std::vector<io::RoundRow>& rows) {
  if (rows.empty()) {
    throw Error(ErrorCategory::kInsufficientHistory,
                "rounds file holds no records");
  }
  const std::uint64_t seed = rows.front().seed;
  const std::string& strategy = rows.front().strategy;
  std::map<std::size_t, std::map<std::size_t, double>> series;
  for (const auto& r : rows) {
    if (r.seed != seed || r.strategy != strategy) continue;
    series[r.client_id][r.round] = r.r_i;
  }
  std::vector<Vector> history;
  history.reserve(series.size());
  for (const auto& [id, by_round] : series) {
    Vector row;
    row.reserve(by_round.size());
    for (const auto& [round, value] : by_round) row.push_back(value);
    history.push_back(std::move(row));
  }
  return history;
}

// Synthetic source: uniform allocations over the configured horizon.
std::vector<Vector> history_from_world(const ExperimentConfig& cfg) {
  ExperimentConfig uni = cfg;
  uni.warmup = uni.rounds;  // keep every round uniform
  RunResult run = run_single(uni, cfg.seeds.front());
  const std::size_t n = run.rounds.empty() ? 0 : run.rounds[0].returns.size();
  std::vector<Vector> history(n);
  for (const auto& rec : run.rounds) {
    for (std::size_t i = 0; i < n; ++i) history[i].push_back(rec.returns[i]);
  }
  return history;
}

int cmd_frontier(const CommonFlags& flags, const std::string& history_path,
                 const std::string& targets_arg) {
  ExperimentConfig cfg = load_config(flags);
  const std::string dir = ensure_out_dir(cfg);

  std::vector<Vector> rows =
      history_path.empty()
          ? history_from_world(cfg)
          : history_from_rows(io::read_rounds_csv(history_path));
  ReturnHistory history = ReturnHistory::from_rows(rows);
  CovarianceModel model =
      cfg.portfolio.ridge < 0.0
          ? estimate_covariance_auto(history)
          : estimate_covariance(history, cfg.portfolio.ridge);

  FrontierPoint gmv = global_min_variance(model);
  FrontierAsymptotes asym = frontier_asymptotes(model);
  const bool degenerate = model.degenerate_means();

  std::vector<FrontierPoint> points;
  if (degenerate) {
    points = efficient_frontier(model, {});
  } else {
    std::vector<double> targets =
        targets_arg.empty() || targets_arg == "auto"
            ? auto_targets(model)
            : parse_number_list(targets_arg, "target");
    points = efficient_frontier(model, targets);
  }

  std::string csv = "target_return,std_dev";
  for (std::size_t i = 1; i <= model.clients(); ++i) {
    csv += ",w_" + std::to_string(i);
  }
  csv += '\n';
  for (const auto& p : points) {
    csv += io::format_double(p.expected_return);
    csv += ',';
    csv += io::format_double(p.std_dev);
    for (double w : p.weights.weights) {
      csv += ',';
      csv += io::format_double(w);
    }
    csv += '\n';
  }

  nlohmann::json j;
  j["clients"] = model.clients();
  j["ridge"] = model.ridge();
  j["degenerate_means"] = degenerate;
  j["gmv"] = {{"expected_return", gmv.expected_return},
              {"std_dev", gmv.std_dev}};
  j["asymptotes"] = {{"vertex_return", asym.vertex_return},
                     {"vertex_std", asym.vertex_std},
                     {"slope", asym.slope}};
  j["points"] = points.size();

  const std::string csv_path = dir + "/frontier.csv";
  const std::string summary_path = dir + "/frontier.json";
  io::write_text_file(csv_path, csv);
  io::write_text_file(summary_path, j.dump(2));
  note(flags, "frontier points: " + std::to_string(points.size()));
  std::cout << csv_path << "\n" << summary_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Portfolio-driven reward allocation simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, compare_flags, frontier_flags;
  std::string run_format = "csv";
  std::string sweep_budgets, sweep_strategies, compare_strategies_arg;
  std::string frontier_history, frontier_targets;

  CLI::App* run = app.add_subcommand("run", "Replicated single-cell runs");
  add_common(run, run_flags);
  run->add_option("--format", run_format, "csv|json-lines")
      ->check(CLI::IsMember({"csv", "json-lines"}));

  CLI::App* sweep = app.add_subcommand("sweep", "Budget sweep");
  add_common(sweep, sweep_flags);
  sweep->add_option("--budgets", sweep_budgets,
                    "Comma-separated increasing budgets");
  sweep->add_option("--strategies", sweep_strategies,
                    "Comma-separated strategy list");

  CLI::App* compare = app.add_subcommand("compare", "Paired strategy study");
  add_common(compare, compare_flags);
  compare->add_option("--strategies", compare_strategies_arg,
                      "Comma-separated strategy list");

  CLI::App* frontier =
      app.add_subcommand("frontier", "Efficient-frontier export");
  add_common(frontier, frontier_flags);
  frontier->add_option("--history", frontier_history,
                       "Rounds CSV to estimate from");
  frontier->add_option("--targets", frontier_targets,
                       "auto or comma-separated target returns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_flags, run_format);
    if (sweep->parsed()) {
      return cmd_sweep(sweep_flags, sweep_budgets, sweep_strategies);
    }
    if (compare->parsed()) {
      return cmd_compare(compare_flags, compare_strategies_arg);
    }
    if (frontier->parsed()) {
      return cmd_frontier(frontier_flags, frontier_history, frontier_targets);
    }
  } catch (const fedfolio::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fedfolio::is_usage_error(e.category()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
