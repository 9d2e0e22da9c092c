#include "fedfolio/config.hpp"

#include <functional>
#include <map>

#include "fedfolio/error.hpp"
#include "fedfolio/io.hpp"
#include "json.hpp"

namespace fedfolio {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCategory::kInvalidConfig, what);
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) bad(key + " must be a number");
  return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned()) bad(key + " must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) bad(key + " must be a string");
  return v.get<std::string>();
}

// Dispatches each present key to its handler; anything else is rejected.
void apply_object(
    const json& obj, const std::string& ctx,
    const std::map<std::string, std::function<void(const json&)>>& handlers) {
  if (!obj.is_object()) bad(ctx + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    auto it = handlers.find(key);
    if (it == handlers.end()) {
      bad("unknown key \"" + (ctx.empty() ? key : ctx + "." + key) + "\"");
    }
    it->second(value);
  }
}

void parse_sim(const json& obj, SimConfig& sim) {
  apply_object(
      obj, "sim",
      {
          {"groups", [&](const json& v) { sim.groups = as_count(v, "sim.groups"); }},
          {"group_size_min",
           [&](const json& v) { sim.group_size_min = as_count(v, "sim.group_size_min"); }},
          {"group_size_max",
           [&](const json& v) { sim.group_size_max = as_count(v, "sim.group_size_max"); }},
          {"capacity_min",
           [&](const json& v) { sim.capacity_min = as_number(v, "sim.capacity_min"); }},
          {"capacity_max",
           [&](const json& v) { sim.capacity_max = as_number(v, "sim.capacity_max"); }},
          {"cost_min",
           [&](const json& v) { sim.cost_min = as_number(v, "sim.cost_min"); }},
          {"cost_max",
           [&](const json& v) { sim.cost_max = as_number(v, "sim.cost_max"); }},
          {"shock_scale",
           [&](const json& v) { sim.shock_scale = as_number(v, "sim.shock_scale"); }},
          {"beta", [&](const json& v) { sim.beta = as_number(v, "sim.beta"); }},
          {"capacity_floor_frac",
           [&](const json& v) {
             sim.capacity_floor_frac = as_number(v, "sim.capacity_floor_frac");
           }},
          {"capacity_ceiling_frac",
           [&](const json& v) {
             sim.capacity_ceiling_frac =
                 as_number(v, "sim.capacity_ceiling_frac");
           }},
          {"a_max", [&](const json& v) { sim.a_max = as_number(v, "sim.a_max"); }},
          {"kappa", [&](const json& v) { sim.kappa = as_number(v, "sim.kappa"); }},
          {"noise_std",
           [&](const json& v) { sim.noise_std = as_number(v, "sim.noise_std"); }},
          {"p_breakdown",
           [&](const json& v) { sim.p_breakdown = as_number(v, "sim.p_breakdown"); }},
          {"p_leave",
           [&](const json& v) { sim.p_leave = as_number(v, "sim.p_leave"); }},
          {"p_join",
           [&](const json& v) { sim.p_join = as_number(v, "sim.p_join"); }},
      });
}

void parse_portfolio(const json& obj, PortfolioOptions& p) {
  apply_object(
      obj, "portfolio",
      {
          {"ridge",
           [&](const json& v) { p.ridge = as_number(v, "portfolio.ridge"); }},
          {"target_kind",
           [&](const json& v) {
             std::string kind = as_string(v, "portfolio.target_kind");
             if (kind == "gmv") {
               p.target.kind = TargetSpec::Kind::kGmv;
             } else if (kind == "absolute") {
               p.target.kind = TargetSpec::Kind::kAbsolute;
             } else if (kind == "gmv-offset") {
               p.target.kind = TargetSpec::Kind::kGmvOffset;
             } else {
               bad("portfolio.target_kind must be gmv, absolute or "
                   "gmv-offset");
             }
           }},
          {"target_value",
           [&](const json& v) {
             p.target.value = as_number(v, "portfolio.target_value");
           }},
          {"solver",
           [&](const json& v) {
             apply_object(
                 v, "portfolio.solver",
                 {
                     {"max_iters",
                      [&](const json& w) {
                        p.solver.max_iters =
                            as_count(w, "portfolio.solver.max_iters");
                      }},
                     {"step",
                      [&](const json& w) {
                        p.solver.step = as_number(w, "portfolio.solver.step");
                      }},
                     {"tol",
                      [&](const json& w) {
                        p.solver.tol = as_number(w, "portfolio.solver.tol");
                      }},
                     {"penalty_scale",
                      [&](const json& w) {
                        p.solver.penalty_scale =
                            as_number(w, "portfolio.solver.penalty_scale");
                      }},
                 });
           }},
      });
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  apply_object(
      root, "",
      {
          {"sim", [&](const json& v) { parse_sim(v, cfg.sim); }},
          {"strategy",
           [&](const json& v) { cfg.strategy = as_string(v, "strategy"); }},
          {"strategies",
           [&](const json& v) {
             if (!v.is_array()) bad("strategies must be an array of strings");
             cfg.strategies.clear();
             for (const auto& s : v) {
               cfg.strategies.push_back(as_string(s, "strategies entry"));
             }
           }},
          {"budget",
           [&](const json& v) { cfg.budget = as_number(v, "budget"); }},
          {"rounds",
           [&](const json& v) { cfg.rounds = as_count(v, "rounds"); }},
          {"warmup",
           [&](const json& v) { cfg.warmup = as_count(v, "warmup"); }},
          {"window",
           [&](const json& v) { cfg.window = as_count(v, "window"); }},
          {"cap", [&](const json& v) { cfg.cap = as_number(v, "cap"); }},
          {"mode", [&](const json& v) { cfg.mode = as_string(v, "mode"); }},
          {"seeds",
           [&](const json& v) {
             if (!v.is_array() || v.empty()) {
               bad("seeds must be a nonempty array of nonnegative integers");
             }
             cfg.seeds.clear();
             for (const auto& s : v) {
               if (!s.is_number_unsigned()) {
                 bad("seeds entries must be nonnegative integers");
               }
               cfg.seeds.push_back(s.get<std::uint64_t>());
             }
           }},
          {"portfolio",
           [&](const json& v) { parse_portfolio(v, cfg.portfolio); }},
          {"out_dir",
           [&](const json& v) { cfg.out_dir = as_string(v, "out_dir"); }},
      });

  if (!(cfg.budget > 0.0)) bad("budget must be > 0");
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  return parse_config_text(io::read_text_file(path));
}

std::string write_config(const ExperimentConfig& config) {
  json j;
  j["sim"] = {
      {"groups", config.sim.groups},
      {"group_size_min", config.sim.group_size_min},
      {"group_size_max", config.sim.group_size_max},
      {"capacity_min", config.sim.capacity_min},
      {"capacity_max", config.sim.capacity_max},
      {"cost_min", config.sim.cost_min},
      {"cost_max", config.sim.cost_max},
      {"shock_scale", config.sim.shock_scale},
      {"beta", config.sim.beta},
      {"capacity_floor_frac", config.sim.capacity_floor_frac},
      {"capacity_ceiling_frac", config.sim.capacity_ceiling_frac},
      {"a_max", config.sim.a_max},
      {"kappa", config.sim.kappa},
      {"noise_std", config.sim.noise_std},
      {"p_breakdown", config.sim.p_breakdown},
      {"p_leave", config.sim.p_leave},
      {"p_join", config.sim.p_join},
  };
  j["strategy"] = config.strategy;
  j["strategies"] = config.strategies;
  j["budget"] = config.budget;
  j["rounds"] = config.rounds;
  j["warmup"] = config.warmup;
  j["window"] = config.window;
  j["cap"] = config.cap;
  j["mode"] = config.mode;
  j["seeds"] = config.seeds;
  std::string kind = "gmv";
  if (config.portfolio.target.kind == TargetSpec::Kind::kAbsolute) {
    kind = "absolute";
  } else if (config.portfolio.target.kind == TargetSpec::Kind::kGmvOffset) {
    kind = "gmv-offset";
  }
  j["portfolio"] = {
      {"ridge", config.portfolio.ridge},
      {"target_kind", kind},
      {"target_value", config.portfolio.target.value},
      {"solver",
       {{"max_iters", config.portfolio.solver.max_iters},
        {"step", config.portfolio.solver.step},
        {"tol", config.portfolio.solver.tol},
        {"penalty_scale", config.portfolio.solver.penalty_scale}}},
  };
  j["out_dir"] = config.out_dir;
  return j.dump(2);
}

}  // namespace fedfolio
