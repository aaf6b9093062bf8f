#include "limitval/stationary.hpp"

#include <cmath>
#include <stdexcept>

#include "limitval/numerics.hpp"
#include "limitval/shapley.hpp"

namespace limitval {

namespace {

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0)
    throw std::invalid_argument("discount factor must be in (0,1], got " +
                                std::to_string(lambda));
}

// Columns of (I - (1-lambda) Q)^T as a dense matrix.
std::vector<std::vector<double>> resolvent_transpose(const InducedChain& c, double lambda) {
  const int n = c.n;
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t)
      a[t][s] = (s == t ? 1.0 : 0.0) - (1.0 - lambda) * c.at(s, t);
  return a;
}

int sample_categorical(const double* p, int n, double u) {
  double acc = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  return n - 1;
}

}  // namespace

InducedChain induce_chain(const Game& game, const StationaryStrategy& x,
                          const StationaryStrategy& y) {
  game.check_strategy(x, 1);
  game.check_strategy(y, 2);
  const int n = game.num_states();
  InducedChain c;
  c.n = n;
  c.q.assign(static_cast<std::size_t>(n) * n, 0.0);
  c.g_vec.assign(n, 0.0);
  for (int s = 0; s < n; ++s) {
    for (int i = 0; i < game.num_actions_p1(s); ++i) {
      double xi = x.rows[s][i];
      if (xi == 0.0) continue;
      for (int j = 0; j < game.num_actions_p2(s); ++j) {
        double w = xi * y.rows[s][j];
        if (w == 0.0) continue;
        c.g_vec[s] += w * game.payoff(s, i, j);
        const double* q = game.transition_row(s, i, j);
        for (int t = 0; t < n; ++t) c.q[s * n + t] += w * q[t];
      }
    }
  }
  return c;
}

OccupationMatrix occupation(const InducedChain& chain, double lambda) {
  check_lambda(lambda);
  const int n = chain.n;
  std::vector<std::vector<double>> rhs(n, std::vector<double>(n, 0.0));
  for (int s = 0; s < n; ++s) rhs[s][s] = lambda;
  auto cols = solve_linear_multi(resolvent_transpose(chain, lambda), rhs);

  OccupationMatrix om;
  om.n = n;
  om.t.resize(static_cast<std::size_t>(n) * n);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) om.t[s * n + t] = cols[s][t];
  return om;
}

std::vector<double> discounted_payoff(const Game& game, const StationaryStrategy& x,
                                      const StationaryStrategy& y, double lambda) {
  InducedChain c = induce_chain(game, x, y);
  OccupationMatrix t = occupation(c, lambda);
  std::vector<double> out(c.n, 0.0);
  for (int s = 0; s < c.n; ++s)
    for (int u = 0; u < c.n; ++u) out[s] += t.at(s, u) * c.g_vec[u];
  return out;
}

std::pair<PurePolicy, std::vector<double>> best_reply_p2(const Game& game,
                                                         const StationaryStrategy& x,
                                                         double lambda) {
  check_lambda(lambda);
  game.check_strategy(x, 1);
  const int n = game.num_states();

  // MDP for player 2 given x: reward r(s,j), transition p(s,j,.)
  std::vector<std::vector<double>> r(n);
  std::vector<std::vector<std::vector<double>>> p(n);
  for (int s = 0; s < n; ++s) {
    const int nj = game.num_actions_p2(s);
    r[s].assign(nj, 0.0);
    p[s].assign(nj, std::vector<double>(n, 0.0));
    for (int j = 0; j < nj; ++j) {
      for (int i = 0; i < game.num_actions_p1(s); ++i) {
        double xi = x.rows[s][i];
        if (xi == 0.0) continue;
        r[s][j] += xi * game.payoff(s, i, j);
        const double* q = game.transition_row(s, i, j);
        for (int t = 0; t < n; ++t) p[s][j][t] += xi * q[t];
      }
    }
  }

  PurePolicy pi;
  pi.action.assign(n, 0);
  std::vector<double> gamma(n, 0.0);
  const double tie = 1e-12;

  for (int iter = 0; iter < 10000; ++iter) {
    // evaluate: (I - (1-lambda) P_pi) gamma = lambda r_pi
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    std::vector<double> b(n);
    for (int s = 0; s < n; ++s) {
      int j = pi.action[s];
      for (int t = 0; t < n; ++t)
        a[s][t] = (s == t ? 1.0 : 0.0) - (1.0 - lambda) * p[s][j][t];
      b[s] = lambda * r[s][j];
    }
    gamma = solve_linear(a, b);

    bool changed = false;
    for (int s = 0; s < n; ++s) {
      const int nj = game.num_actions_p2(s);
      double qcur = 0.0, qmin = 0.0;
      int jbest = -1;
      for (int j = 0; j < nj; ++j) {
        double q = lambda * r[s][j];
        for (int t = 0; t < n; ++t) q += (1.0 - lambda) * p[s][j][t] * gamma[t];
        if (j == pi.action[s]) qcur = q;
        if (jbest < 0 || q < qmin - tie) {
          qmin = q;
          jbest = j;
        }
      }
      // switch only on a strict improvement (monotone, hence terminating);
      // jbest is already the lowest index within the tie band
      if (jbest != pi.action[s] && qcur > qmin + tie) {
        pi.action[s] = jbest;
        changed = true;
      }
    }
    if (!changed) return {pi, gamma};
  }
  throw std::runtime_error("policy iteration failed to settle (internal error)");
}

GuaranteeCheck guarantee_inequality_check(const Game& game, const StationaryStrategy& x,
                                          double lambda) {
  auto [pi, w] = best_reply_p2(game, x, lambda);
  std::vector<double> pw = apply_shapley(game, lambda, w);
  GuaranteeCheck out;
  out.worst_margin = pw[0] - w[0];
  for (int s = 1; s < game.num_states(); ++s)
    out.worst_margin = std::min(out.worst_margin, pw[s] - w[s]);
  out.holds = out.worst_margin >= -1e-8;
  return out;
}

McEstimate simulate_discounted(const Game& game, const StationaryStrategy& x,
                               const StationaryStrategy& y, double lambda,
                               int start_state, long horizon, long episodes,
                               std::uint64_t seed) {
  check_lambda(lambda);
  game.check_strategy(x, 1);
  game.check_strategy(y, 2);
  if (start_state < 0 || start_state >= game.num_states())
    throw std::invalid_argument("start state out of range");
  if (episodes < 1) throw std::invalid_argument("need at least one episode");

  const double keep = 1.0 - lambda;
  if (horizon == 0) {
    horizon = keep == 0.0
                  ? 1
                  : static_cast<long>(std::ceil(std::log(1e-9) / std::log(keep)));
    horizon = std::max<long>(horizon, 1);
  } else if (keep > 0.0 && std::pow(keep, static_cast<double>(horizon)) > 1e-9) {
    throw std::invalid_argument("horizon too small: truncation bias exceeds 1e-9");
  }

  double sum = 0.0, sumsq = 0.0;
  for (long ep = 0; ep < episodes; ++ep) {
    // independent per-episode stream, deterministic in (seed, episode)
    std::uint64_t rng = (seed + 0x632BE59BD9B4E019ULL) ^
                        (static_cast<std::uint64_t>(ep) * 0xD1342543DE82EF95ULL);
    int s = start_state;
    double weight = lambda;
    double total = 0.0;
    for (long step = 0; step < horizon; ++step) {
      int i = sample_categorical(x.rows[s].data(), static_cast<int>(x.rows[s].size()),
                                 uniform01(rng));
      int j = sample_categorical(y.rows[s].data(), static_cast<int>(y.rows[s].size()),
                                 uniform01(rng));
      total += weight * game.payoff(s, i, j);
      weight *= keep;
      if (weight == 0.0) break;
      s = sample_categorical(game.transition_row(s, i, j), game.num_states(),
                             uniform01(rng));
    }
    sum += total;
    sumsq += total * total;
  }

  McEstimate est;
  est.episodes = episodes;
  est.horizon = horizon;
  est.mean = sum / static_cast<double>(episodes);
  if (episodes > 1) {
    double var = (sumsq - sum * est.mean) / static_cast<double>(episodes - 1);
    est.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(episodes));
  }
  return est;
}

StationaryStrategy pure_to_mixed(const Game& game, const PurePolicy& p, int player) {
  if (static_cast<int>(p.action.size()) != game.num_states())
    throw std::invalid_argument("policy length does not match the game");
  StationaryStrategy x;
  x.rows.resize(game.num_states());
  for (int s = 0; s < game.num_states(); ++s) {
    int n = player == 1 ? game.num_actions_p1(s) : game.num_actions_p2(s);
    if (p.action[s] < 0 || p.action[s] >= n)
      throw std::invalid_argument("policy action out of range at state " + std::to_string(s));
    x.rows[s].assign(n, 0.0);
    x.rows[s][p.action[s]] = 1.0;
  }
  return x;
}

}  // namespace limitval
