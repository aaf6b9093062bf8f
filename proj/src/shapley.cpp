#include "limitval/shapley.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "limitval/matrix_game.hpp"

namespace limitval {

namespace {

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0)
    throw std::invalid_argument("discount factor must be in (0,1], got " +
                                std::to_string(lambda));
}

inline double dot_small(const double* q, const double* v, int n) {
  switch (n) {
    case 1: return q[0] * v[0];
    case 2: return q[0] * v[0] + q[1] * v[1];
    case 3: return q[0] * v[0] + q[1] * v[1] + q[2] * v[2];
    case 4: return q[0] * v[0] + q[1] * v[1] + q[2] * v[2] + q[3] * v[3];
    default: {
      double acc = 0.0;
      for (int t = 0; t < n; ++t) acc += q[t] * v[t];
      return acc;
    }
  }
}

// val of a 2x2: pure saddle if one exists, else the mixed closed form.
// Written in difference form c + (a-c)(d-c)/den, not (ad-bc)/den: when all
// entries nearly coincide the textbook form cancels two O(1) products and
// the quotient amplifies rounding noise by 1/den, which stalls deep-discount
// value iteration above its stopping threshold. The difference form only
// multiplies small terms, keeping the error at a few ulps. The no-saddle
// sign pattern bounds |den| >= |d-c|, so the quotient cannot blow up.
inline double val_2x2(double a, double b, double c, double d) {
  double maximin = std::max(std::min(a, b), std::min(c, d));
  double minimax = std::min(std::max(a, c), std::max(b, d));
  if (maximin == minimax) return maximin;
  if ((a - b) * (c - d) < 0.0 && (a - c) * (b - d) < 0.0)
    return c + (a - c) * (d - c) / ((a - b) + (d - c));
  return maximin;  // degenerate ties: maximin == minimax up to rounding
}

// Precomputed per-cell lambda*g and (1-lambda)*q for games small enough to
// keep the whole value vector in registers. Deep discounts need ~1e8
// iterations, so the generic sweep below is too slow for them.
struct SmallPlan {
  int n = 0;
  int ni[4] = {0}, nj[4] = {0};
  double lg[4][4];        // lambda * g per cell (i*nj+j)
  double wq[4][4][4];     // (1-lambda) * q per cell per destination

  static bool fits(const Game& g) {
    if (g.num_states() > 4) return false;
    for (int s = 0; s < g.num_states(); ++s)
      if (g.num_actions_p1(s) > 2 || g.num_actions_p2(s) > 2) return false;
    return true;
  }

  SmallPlan(const Game& g, double lambda) {
    n = g.num_states();
    const double keep = 1.0 - lambda;
    for (int s = 0; s < n; ++s) {
      ni[s] = g.num_actions_p1(s);
      nj[s] = g.num_actions_p2(s);
      const double* gp = g.payoff_cells(s);
      const double* qp = g.transition_cells(s);
      for (int c = 0; c < ni[s] * nj[s]; ++c) {
        lg[s][c] = lambda * gp[c];
        for (int t = 0; t < n; ++t) wq[s][c][t] = keep * qp[c * n + t];
      }
    }
  }
};

template <int N>
long run_small(const SmallPlan& p, double threshold, long cap, double* v_out,
               bool& capped) {
  double v[N];
  for (int s = 0; s < N; ++s) v[s] = s < p.n ? v_out[s] : 0.0;
  long k = 0;
  capped = false;
  for (;;) {
    double w[N];
    double gap = 0.0;
    for (int s = 0; s < p.n; ++s) {
      auto entry = [&](int c) {
        double acc = p.lg[s][c];
        for (int t = 0; t < N; ++t) acc += p.wq[s][c][t] * v[t];
        return acc;
      };
      double val;
      if (p.ni[s] == 1 && p.nj[s] == 1) {
        val = entry(0);
      } else if (p.ni[s] == 1) {
        val = std::min(entry(0), entry(1));
      } else if (p.nj[s] == 1) {
        val = std::max(entry(0), entry(1));
      } else {
        val = val_2x2(entry(0), entry(1), entry(2), entry(3));
      }
      gap = std::max(gap, std::abs(val - v[s]));
      w[s] = val;
    }
    for (int s = 0; s < N; ++s) v[s] = w[s];
    ++k;
    if (gap <= threshold) break;
    if (k >= cap) {
      capped = true;
      break;
    }
  }
  for (int s = 0; s < p.n; ++s) v_out[s] = v[s];
  return k;
}

// One sweep v_out = Phi(lambda, v_in); aux is scratch for states beyond 2x2.
// Returns the iterate gap |v_out - v_in|_inf.
double shapley_sweep(const Game& g, double lambda, const double* v_in, double* v_out,
                     double* aux) {
  const int n = g.num_states();
  const double keep = 1.0 - lambda;
  double gap = 0.0;
  for (int s = 0; s < n; ++s) {
    const int ni = g.num_actions_p1(s);
    const int nj = g.num_actions_p2(s);
    const double* gp = g.payoff_cells(s);
    const double* qp = g.transition_cells(s);
    double w;
    if (ni == 1 && nj == 1) {
      w = lambda * gp[0] + keep * dot_small(qp, v_in, n);
    } else if (ni <= 2 && nj <= 2) {
      double e00 = lambda * gp[0] + keep * dot_small(qp, v_in, n);
      double e01 = lambda * gp[1] + keep * dot_small(qp + n, v_in, n);
      if (ni == 1) {
        w = std::min(e00, e01);
      } else if (nj == 1) {
        w = std::max(e00, e01);
      } else {
        double e10 = lambda * gp[2] + keep * dot_small(qp + 2 * n, v_in, n);
        double e11 = lambda * gp[3] + keep * dot_small(qp + 3 * n, v_in, n);
        w = val_2x2(e00, e01, e10, e11);
      }
    } else {
      for (int c = 0; c < ni * nj; ++c)
        aux[c] = lambda * gp[c] + keep * dot_small(qp + c * n, v_in, n);
      w = matrix_game_value(aux, ni, nj);
    }
    double diff = w - v_in[s];
    gap = std::max(gap, std::abs(diff));
    v_out[s] = w;
  }
  return gap;
}

}  // namespace

std::vector<double> apply_shapley(const Game& game, double lambda,
                                  const std::vector<double>& f) {
  check_lambda(lambda);
  if (static_cast<int>(f.size()) != game.num_states())
    throw std::invalid_argument("value vector length does not match the game");
  for (double v : f)
    if (!std::isfinite(v)) throw std::invalid_argument("value vector has non-finite entry");

  std::vector<double> out(f.size());
  std::vector<double> aux(static_cast<std::size_t>(game.max_actions_p1()) *
                          game.max_actions_p2());
  shapley_sweep(game, lambda, f.data(), out.data(), aux.data());
  return out;
}

DiscountedSolution discounted_value(const Game& game, double lambda, double tol,
                                    const std::vector<double>& start) {
  check_lambda(lambda);
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!start.empty() && static_cast<int>(start.size()) != game.num_states())
    throw std::invalid_argument("start vector length does not match the game");

  const int n = game.num_states();
  std::vector<double> v(n, 0.0), w(n, 0.0);
  if (!start.empty()) v = start;
  std::vector<double> aux(static_cast<std::size_t>(game.max_actions_p1()) *
                          game.max_actions_p2());

  const double keep = 1.0 - lambda;
  // Half the spec bound so the value itself lands comfortably inside tol.
  const double thr_spec =
      keep > 0.0 ? 0.5 * tol * lambda / keep : std::numeric_limits<double>::infinity();
  // Values live in [0,1]: iterate gaps below a few dozen ulps are unreachable
  // or pure rounding noise, and the residual stays orders of magnitude under
  // any tolerance used anywhere.
  const double thr_fp = 64.0 * std::numeric_limits<double>::epsilon();
  const double threshold = std::max(thr_spec, thr_fp);

  long cap;
  if (keep <= 0.0 || tol * lambda >= 1.0) {
    cap = 4;
  } else {
    cap = static_cast<long>(std::ceil(std::log(tol * lambda) / std::log(keep))) + 1000;
  }

  long k = 0;
  bool capped = false;
  if (SmallPlan::fits(game)) {
    SmallPlan plan(game, lambda);
    switch (n) {
      case 1: k = run_small<1>(plan, threshold, cap, v.data(), capped); break;
      case 2: k = run_small<2>(plan, threshold, cap, v.data(), capped); break;
      case 3: k = run_small<3>(plan, threshold, cap, v.data(), capped); break;
      default: k = run_small<4>(plan, threshold, cap, v.data(), capped); break;
    }
  } else {
    double* cur = v.data();
    double* nxt = w.data();
    for (;;) {
      double gap = shapley_sweep(game, lambda, cur, nxt, aux.data());
      std::swap(cur, nxt);
      ++k;
      if (gap <= threshold) break;
      if (k >= cap) {
        capped = true;
        break;
      }
    }
    if (cur != v.data()) v.assign(cur, cur + n);
  }
  if (capped) {
    std::ostringstream os;
    os << "value iteration hit the cap of " << cap << " iterations at lambda=" << lambda
       << " (requested tol " << tol << ")";
    throw std::runtime_error(os.str());
  }

  DiscountedSolution sol;
  sol.lambda = lambda;
  sol.iterations = k;
  sol.values = v;
  sol.x_opt.rows.resize(n);
  sol.y_opt.rows.resize(n);
  sol.residual = 0.0;
  for (int s = 0; s < n; ++s) {
    const int ni = game.num_actions_p1(s);
    const int nj = game.num_actions_p2(s);
    Matrix m(ni, std::vector<double>(nj));
    for (int i = 0; i < ni; ++i) {
      for (int j = 0; j < nj; ++j) {
        const double* q = game.transition_row(s, i, j);
        double cont = 0.0;
        for (int t = 0; t < n; ++t) cont += q[t] * v[t];
        m[i][j] = lambda * game.payoff(s, i, j) + keep * cont;
      }
    }
    MatrixGameSolution gs = solve_matrix_game(m);
    sol.residual = std::max(sol.residual, std::abs(gs.value - v[s]));
    sol.x_opt.rows[s] = std::move(gs.row_strategy);
    sol.y_opt.rows[s] = std::move(gs.col_strategy);
  }
  return sol;
}

}  // namespace limitval
