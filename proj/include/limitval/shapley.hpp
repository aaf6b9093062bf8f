#pragma once

#include <vector>

#include "limitval/game.hpp"

namespace limitval {

struct DiscountedSolution {
  double lambda = 0.0;
  std::vector<double> values;    // v_lambda, one entry per state
  StationaryStrategy x_opt;      // player 1, optimal at the final iterate
  StationaryStrategy y_opt;      // player 2
  double residual = 0.0;         // measured |Phi(lambda,v) - v|_inf
  long iterations = 0;
};

/// One application of the Shapley operator: per state, the value of the
/// auxiliary matrix game lambda*g + (1-lambda)*q.f.
std::vector<double> apply_shapley(const Game& game, double lambda,
                                  const std::vector<double>& f);

/// Fixed point of the Shapley operator by value iteration from v0 = 0.
/// Stops when the iterate gap is below tol*lambda/(1-lambda) (so the true
/// fixed-point residual is below tol), with a floating-point floor of a few
/// ulps so iteration cannot stall below double resolution. Optimal
/// strategies are read from the final iterate's matrix games. A nonempty
/// start vector replaces v0 = 0 (used by warm-started sweeps).
DiscountedSolution discounted_value(const Game& game, double lambda, double tol,
                                    const std::vector<double>& start = {});

}  // namespace limitval
