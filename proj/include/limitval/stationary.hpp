#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "limitval/game.hpp"

namespace limitval {

/// Markov chain induced by a fixed stationary pair: transition matrix Q
/// (row-major, rows sum to 1) and per-state stage payoff.
struct InducedChain {
  int n = 0;
  std::vector<double> q;      // n*n, q[s*n + t] = Q(s,t)
  std::vector<double> g_vec;  // n

  double at(int s, int t) const { return q[s * n + t]; }
};

/// t_lambda(s,t): mean lambda-discounted time spent in t starting from s.
/// Rows are probability vectors (the discount weights sum to 1).
struct OccupationMatrix {
  int n = 0;
  std::vector<double> t;  // n*n row-major

  double at(int s, int u) const { return t[s * n + u]; }
};

InducedChain induce_chain(const Game& game, const StationaryStrategy& x,
                          const StationaryStrategy& y);

/// lambda * (I - (1-lambda) Q)^{-1}, computed with one factorization of the
/// transposed system and |states| solves.
OccupationMatrix occupation(const InducedChain& chain, double lambda);

/// gamma_lambda(., x, y) = t_lambda . g_vec.
std::vector<double> discounted_payoff(const Game& game, const StationaryStrategy& x,
                                      const StationaryStrategy& y, double lambda);

/// Player 2's exact best reply to a fixed x: policy iteration on the induced
/// MDP, lowest-index tie-breaking. Returns the minimizing pure policy and
/// w^x_lambda = min_j gamma_lambda(., x, j).
std::pair<PurePolicy, std::vector<double>> best_reply_p2(const Game& game,
                                                         const StationaryStrategy& x,
                                                         double lambda);

struct GuaranteeCheck {
  bool holds = false;
  double worst_margin = 0.0;  // min over states of Phi(lambda,w) - w
};

/// Checks w^x_lambda <= Phi(lambda, w^x_lambda) + 1e-8 componentwise.
GuaranteeCheck guarantee_inequality_check(const Game& game, const StationaryStrategy& x,
                                          double lambda);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long episodes = 0;
  long horizon = 0;
};

/// Monte Carlo estimate of gamma_lambda(start, x, y). horizon == 0 picks the
/// smallest horizon with truncation bias (1-lambda)^horizon <= 1e-9; an
/// explicit horizon violating that bound is an error. Deterministic in seed.
McEstimate simulate_discounted(const Game& game, const StationaryStrategy& x,
                               const StationaryStrategy& y, double lambda,
                               int start_state, long horizon, long episodes,
                               std::uint64_t seed);

/// Lifts a pure policy to the degenerate mixed strategy (player 1 or 2).
StationaryStrategy pure_to_mixed(const Game& game, const PurePolicy& p, int player);

}  // namespace limitval
