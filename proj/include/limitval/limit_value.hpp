#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "limitval/canonical.hpp"
#include "limitval/game.hpp"
#include "limitval/monomials.hpp"
#include "limitval/shapley.hpp"

namespace limitval {

struct SweepRow {
  double lambda = 0.0;
  std::vector<double> values;
  StationaryStrategy x_opt, y_opt;
  double residual = 0.0;
  long iterations = 0;
};

struct SweepTable {
  std::vector<SweepRow> rows;  // lambda strictly decreasing

  nlohmann::json to_json() const;
  /// Schema: header "lambda,residual,v_<state>..." then one row per grid
  /// point, lambda descending, 17 significant digits, '.' decimal.
  void write_csv(std::ostream& os, const Game& game) const;
};

/// lambda_k = 2^-k for k = 1..count.
std::vector<double> dyadic_grid(int count = 24);

/// One discounted solution per grid point (grid strictly decreasing in
/// (0,1]). Rows are independent; jobs > 1 computes them concurrently with
/// results merged in grid order, so output is identical for any job count.
/// warm_start seeds each row's iteration with the previous row's values
/// (sequential; an optimization, off by default for reproducibility).
SweepTable sweep(const Game& game, const std::vector<double>& grid, double tol,
                 int jobs = 1, bool warm_start = false);

struct LimitReport {
  std::vector<double> v_star;      // value at the smallest lambda
  double tail_oscillation = 0.0;   // max per-state spread over the trailing third
  bool converged = false;

  nlohmann::json to_json() const;
};

/// Requires >= 6 rows. Non-convergence at this resolution means the grid
/// must deepen; the report says so rather than extrapolating.
LimitReport estimate_limit(const SweepTable& table, double osc_threshold = 1e-4);

struct AsymptoticFitResult {
  CanonicalFit fit;
  LimitVector estimated;
  int subsample_rounds = 0;  // every-2nd-row retries used to clear Undetermined
};

/// Estimates the limit vector of the optimal-strategy family carried by the
/// sweep and runs the constructive canonical fit on it. Undetermined indices
/// trigger up to two subsequence retries (every second row); persistent ones
/// throw. Exponent infeasibility throws FitInfeasible (estimation noise: true
/// limit vectors are always representable).
AsymptoticFitResult fit_asymptotic_strategy(const Game& game, const SweepTable& table,
                                            const EstimateConfig& est = {},
                                            const FitOptions& fit = {});

struct OptimalityRow {
  double lambda = 0.0;
  double worst_margin = 0.0;  // min over states of w - (v_star - eps)
  int worst_state = 0;
  bool pass = false;
  std::vector<double> guarantee;  // w(s) = best-reply value against x_lambda
  std::vector<double> margin;     // per state, w - (v_star - eps)
};

struct OptimalityCertificate {
  double epsilon = 0.0;
  std::optional<double> lambda0;  // largest grid point below which all rows pass
  std::vector<OptimalityRow> rows;

  nlohmann::json to_json() const;
  /// Schema: "lambda,worst_margin,margin_<state>..." one row per grid point.
  void write_csv(std::ostream& os, const Game& game) const;
};

/// For each grid lambda, instantiates xc and evaluates player 2's exact best
/// reply; a row passes when the guaranteed level is within eps of v_star in
/// every state.
OptimalityCertificate check_asymptotic_optimality(const Game& game,
                                                  const CanonicalStrategy& xc,
                                                  const std::vector<double>& v_star,
                                                  double epsilon,
                                                  const std::vector<double>& grid);

}  // namespace limitval
