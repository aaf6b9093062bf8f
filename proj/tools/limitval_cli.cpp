// limitval: discounted zero-sum stochastic games, vanishing-discount limits,
// canonical strategy fitting and asymptotic optimality certificates.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "limitval/canonical.hpp"
#include "limitval/game.hpp"
#include "limitval/limit_value.hpp"
#include "limitval/shapley.hpp"
#include "limitval/stationary.hpp"

using namespace limitval;
using nlohmann::json;

namespace {

int log_level() {
  const char* env = std::getenv("LIMITVAL_LOG");
  if (!env) return 1;  // warn
  std::string v = env;
  if (v == "debug") return 3;
  if (v == "info") return 2;
  if (v == "warn") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[info] " << msg << "\n";
}

struct RunConfig {
  double tolerance = 1e-9;
  double grid_start = 0.5;
  double grid_ratio = 0.5;
  int grid_count = 24;
  double slope_tol = 0.15;
  double r2_min = 0.8;
  int min_points = 12;
  double log_residual_tol = 1e-4;
  double epsilon = 0.05;
  double osc_threshold = 1e-4;
  int jobs = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be > 0");
    if (!(grid_start > 0) || grid_start > 1)
      throw std::invalid_argument("grid start must be in (0,1]");
    if (!(grid_ratio > 0) || grid_ratio >= 1)
      throw std::invalid_argument("grid ratio must be in (0,1)");
    if (grid_count < 1) throw std::invalid_argument("grid count must be >= 1");
    if (!(slope_tol > 0)) throw std::invalid_argument("slope tolerance must be > 0");
    if (!(r2_min > 0) || r2_min > 1) throw std::invalid_argument("r2 threshold in (0,1]");
    if (min_points < 3) throw std::invalid_argument("min points must be >= 3");
    if (!(log_residual_tol > 0))
      throw std::invalid_argument("residual cap must be > 0");
    if (!(osc_threshold > 0))
      throw std::invalid_argument("oscillation threshold must be > 0");
    if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  }

  std::vector<double> grid() const {
    std::vector<double> g(grid_count);
    double v = grid_start;
    for (int k = 0; k < grid_count; ++k, v *= grid_ratio) g[k] = v;
    return g;
  }

  EstimateConfig estimate_config() const {
    EstimateConfig e;
    e.slope_tol = slope_tol;
    e.r2_min = r2_min;
    e.min_points = min_points;
    return e;
  }

  FitOptions fit_options() const {
    FitOptions f;
    f.log_residual_tol = log_residual_tol;
    return f;
  }

  static RunConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw std::invalid_argument("config parse error: " + std::string(e.what()));
    }
    RunConfig c;
    c.tolerance = j.value("tolerance", c.tolerance);
    c.grid_start = j.value("grid_start", c.grid_start);
    c.grid_ratio = j.value("grid_ratio", c.grid_ratio);
    c.grid_count = j.value("grid_count", c.grid_count);
    c.slope_tol = j.value("slope_tol", c.slope_tol);
    c.r2_min = j.value("r2_min", c.r2_min);
    c.min_points = j.value("min_points", c.min_points);
    c.log_residual_tol = j.value("log_residual_tol", c.log_residual_tol);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.osc_threshold = j.value("osc_threshold", c.osc_threshold);
    c.jobs = j.value("jobs", c.jobs);
    c.seed = j.value("seed", c.seed);
    return c;
  }
};

// All writes go through a temp file and a rename: failures never leave a
// partial output behind.
void write_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

void emit(const json& j, const std::string& out_path) {
  std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_atomic(out_path, text);
}

json solution_to_json(const DiscountedSolution& s) {
  return json{{"lambda", s.lambda},
              {"values", s.values},
              {"x_opt", s.x_opt.rows},
              {"y_opt", s.y_opt.rows},
              {"residual", s.residual},
              {"iterations", s.iterations}};
}

StationaryStrategy load_strategy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open strategy file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("strategy parse error in " + path + ": " + e.what());
  }
  return StationaryStrategy::from_json(j);
}

CanonicalStrategy load_canonical(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open canonical file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("canonical parse error in " + path + ": " + e.what());
  }
  return CanonicalStrategy::from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"solver for discounted zero-sum stochastic games and their vanishing-discount limits"};
  app.require_subcommand(1);

  std::string config_path, game_path, out_path;
  RunConfig cfg;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file (flags override it)");
    cmd->add_option("--game", game_path, "game JSON file")->required();
    cmd->add_option("--out", out_path, "output path (default: stdout)");
  };
  bool warm_start = false;
  auto add_grid = [&](CLI::App* cmd) {
    cmd->add_option("--grid-start", cfg.grid_start, "largest lambda of the grid");
    cmd->add_option("--grid-ratio", cfg.grid_ratio, "geometric ratio of the grid");
    cmd->add_option("--grid-count", cfg.grid_count, "number of grid points");
    cmd->add_option("--tol", cfg.tolerance, "fixed-point residual tolerance");
    cmd->add_option("--jobs", cfg.jobs, "concurrent solves");
    cmd->add_flag("--warm-start", warm_start,
                  "seed each solve from the previous grid point (sequential)");
  };

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "discounted value at one lambda");
  double lambda = 0.5;
  add_common(solve_cmd);
  solve_cmd->add_option("--lambda", lambda, "discount factor in (0,1]")->required();
  solve_cmd->add_option("--tol", cfg.tolerance, "fixed-point residual tolerance");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "lambda sweep: CSV table plus limit report");
  std::string out_csv, out_json;
  add_common(sweep_cmd);
  add_grid(sweep_cmd);
  sweep_cmd->add_option("--out-csv", out_csv, "CSV output path")->required();
  sweep_cmd->add_option("--out-json", out_json, "sweep table JSON output path");
  sweep_cmd->add_option("--osc-threshold", cfg.osc_threshold, "convergence threshold");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "discounted payoff of a fixed stationary pair");
  std::string x_path, y_path;
  add_common(eval_cmd);
  eval_cmd->add_option("--lambda", lambda, "discount factor")->required();
  eval_cmd->add_option("--x", x_path, "player 1 strategy JSON")->required();
  eval_cmd->add_option("--y", y_path, "player 2 strategy JSON")->required();

  // best-reply
  auto* reply_cmd = app.add_subcommand("best-reply", "player 2's exact best reply to x");
  add_common(reply_cmd);
  reply_cmd->add_option("--lambda", lambda, "discount factor")->required();
  reply_cmd->add_option("--x", x_path, "player 1 strategy JSON")->required();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit a canonical strategy to the optimal family");
  add_common(fit_cmd);
  add_grid(fit_cmd);
  fit_cmd->add_option("--slope-tol", cfg.slope_tol, "limit classification slope tolerance");
  fit_cmd->add_option("--r2-min", cfg.r2_min, "regression quality threshold");
  fit_cmd->add_option("--min-points", cfg.min_points, "minimum sample count");

  // check
  auto* check_cmd = app.add_subcommand("check", "asymptotic optimality certificate");
  std::string canonical_path;
  add_common(check_cmd);
  add_grid(check_cmd);
  check_cmd->add_option("--canonical", canonical_path, "canonical strategy JSON")->required();
  check_cmd->add_option("--epsilon", cfg.epsilon, "optimality slack (must be > 0)");
  std::string check_csv;
  check_cmd->add_option("--out-csv", check_csv, "per-lambda margin CSV output path");

  // random
  auto* random_cmd = app.add_subcommand("random", "emit a seeded random game");
  int states = 2, actions1 = 2, actions2 = 2;
  random_cmd->add_option("--states", states, "number of states")->required();
  random_cmd->add_option("--actions1", actions1, "player 1 actions per state")->required();
  random_cmd->add_option("--actions2", actions2, "player 2 actions per state")->required();
  random_cmd->add_option("--seed", cfg.seed, "generator seed");
  random_cmd->add_option("--out", out_path, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    // flags were bound directly into cfg; a config file fills the rest
    if (!config_path.empty()) {
      RunConfig file_cfg = RunConfig::from_file(config_path);
      CLI::App* active = app.get_subcommands().front();
      auto keep = [&](const char* flag) {
        const CLI::Option* opt = active->get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
      };
      if (!keep("--tol")) cfg.tolerance = file_cfg.tolerance;
      if (!keep("--grid-start")) cfg.grid_start = file_cfg.grid_start;
      if (!keep("--grid-ratio")) cfg.grid_ratio = file_cfg.grid_ratio;
      if (!keep("--grid-count")) cfg.grid_count = file_cfg.grid_count;
      if (!keep("--slope-tol")) cfg.slope_tol = file_cfg.slope_tol;
      if (!keep("--r2-min")) cfg.r2_min = file_cfg.r2_min;
      if (!keep("--min-points")) cfg.min_points = file_cfg.min_points;
      if (!keep("--epsilon")) cfg.epsilon = file_cfg.epsilon;
      if (!keep("--osc-threshold")) cfg.osc_threshold = file_cfg.osc_threshold;
      if (!keep("--jobs")) cfg.jobs = file_cfg.jobs;
      if (!keep("--seed")) cfg.seed = file_cfg.seed;
      cfg.log_residual_tol = file_cfg.log_residual_tol;
    }
    cfg.validate();

    if (random_cmd->parsed()) {
      Game g = Game::random(states, actions1, actions2, cfg.seed);
      emit(g.to_json(), out_path);
      return 0;
    }

    Game game = Game::load(game_path);

    if (solve_cmd->parsed()) {
      log_info("solving at lambda=" + std::to_string(lambda));
      emit(solution_to_json(discounted_value(game, lambda, cfg.tolerance)), out_path);
    } else if (sweep_cmd->parsed()) {
      log_info("sweeping " + std::to_string(cfg.grid_count) + " grid points");
      SweepTable table = sweep(game, cfg.grid(), cfg.tolerance, cfg.jobs, warm_start);
      LimitReport report = estimate_limit(table, cfg.osc_threshold);
      std::ostringstream csv;
      table.write_csv(csv, game);
      write_atomic(out_csv, csv.str());
      if (!out_json.empty()) write_atomic(out_json, table.to_json().dump(2) + "\n");
      emit(report.to_json(), out_path);
    } else if (eval_cmd->parsed()) {
      auto gamma = discounted_payoff(game, load_strategy(x_path), load_strategy(y_path),
                                     lambda);
      emit(json{{"lambda", lambda}, {"gamma", gamma}}, out_path);
    } else if (reply_cmd->parsed()) {
      auto [policy, w] = best_reply_p2(game, load_strategy(x_path), lambda);
      emit(json{{"lambda", lambda}, {"policy", policy.action}, {"w", w}}, out_path);
    } else if (fit_cmd->parsed()) {
      log_info("sweeping before the fit");
      SweepTable table = sweep(game, cfg.grid(), cfg.tolerance, cfg.jobs, warm_start);
      auto fitted =
          fit_asymptotic_strategy(game, table, cfg.estimate_config(), cfg.fit_options());
      json diag{{"exponent_slack", fitted.fit.exponents.slack},
                {"coefficient_log_residual", fitted.fit.coefficients.max_log_residual},
                {"unpinned_pairs", fitted.fit.coefficients.unpinned},
                {"state_normalization_residuals",
                 fitted.fit.coefficients.state_normalization},
                {"subsample_rounds", fitted.subsample_rounds},
                {"monomials", fitted.estimated.size()}};
      emit(json{{"canonical", fitted.fit.strategy.to_json()}, {"diagnostics", diag}},
           out_path);
    } else if (check_cmd->parsed()) {
      CanonicalStrategy xc = load_canonical(canonical_path);
      SweepTable table = sweep(game, cfg.grid(), cfg.tolerance, cfg.jobs);
      LimitReport report = estimate_limit(table, cfg.osc_threshold);
      auto cert = check_asymptotic_optimality(game, xc, report.v_star, cfg.epsilon,
                                              cfg.grid());
      json out = cert.to_json();
      out["v_star"] = report.v_star;
      out["converged"] = report.converged;
      if (!check_csv.empty()) {
        std::ostringstream csv;
        cert.write_csv(csv, game);
        write_atomic(check_csv, csv.str());
      }
      emit(out, out_path);
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  }
}
