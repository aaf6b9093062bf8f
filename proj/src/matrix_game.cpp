#include "limitval/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "limitval/numerics.hpp"

namespace limitval {

namespace {

void check_matrix(const Matrix& m) {
  if (m.empty() || m[0].empty()) throw std::invalid_argument("matrix game is empty");
  for (const auto& row : m) {
    if (row.size() != m[0].size()) throw std::invalid_argument("matrix game is ragged");
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument("matrix game has non-finite entry");
  }
}

// Pure saddle point: maximin == minimax. Lowest-index argmax/argmin so the
// returned strategies are deterministic.
bool find_saddle(const double* m, int ni, int nj, double& value, int& si, int& sj) {
  double maximin = -std::numeric_limits<double>::infinity();
  si = -1;
  for (int i = 0; i < ni; ++i) {
    double rowmin = m[i * nj];
    for (int j = 1; j < nj; ++j) rowmin = std::min(rowmin, m[i * nj + j]);
    if (rowmin > maximin) {
      maximin = rowmin;
      si = i;
    }
  }
  double minimax = std::numeric_limits<double>::infinity();
  sj = -1;
  for (int j = 0; j < nj; ++j) {
    double colmax = m[j];
    for (int i = 1; i < ni; ++i) colmax = std::max(colmax, m[i * nj + j]);
    if (colmax < minimax) {
      minimax = colmax;
      sj = j;
    }
  }
  value = maximin;
  return maximin == minimax;
}

// Completely mixed 2x2 solution; caller guarantees no pure saddle, which
// forces a nonzero denominator. The value uses the difference form (see
// val_2x2 in shapley.cpp) so near-tied entries do not amplify rounding.
void solve_2x2_mixed(const double* m, MatrixGameSolution& out) {
  double a = m[0], b = m[1], c = m[2], d = m[3];
  double den = (a - b) + (d - c);
  out.value = c + (a - c) * (d - c) / den;
  out.row_strategy = {(d - c) / den, (a - b) / den};
  out.col_strategy = {(d - b) / den, (a - c) / den};
}

bool mixed_2x2_applies(const double* m) {
  double a = m[0], b = m[1], c = m[2], d = m[3];
  return (a - b) * (c - d) < 0.0 && (a - c) * (b - d) < 0.0;
}

}  // namespace

MatrixGameSolution solve_matrix_game_lp(const Matrix& m) {
  check_matrix(m);
  const int ni = static_cast<int>(m.size());
  const int nj = static_cast<int>(m[0].size());

  double lo = m[0][0];
  for (const auto& row : m)
    for (double v : row) lo = std::min(lo, v);
  const double shift = 1.0 - lo;  // entries >= 1, so both LPs are bounded feasible

  // Row player: minimize sum(u), M'^T u >= 1, u >= 0; x = u / sum(u).
  LinearProgram row_lp;
  row_lp.num_vars = ni;
  row_lp.objective.assign(ni, -1.0);
  row_lp.lower.assign(ni, 0.0);
  for (int j = 0; j < nj; ++j) {
    LpRow r;
    r.coeff.resize(ni);
    for (int i = 0; i < ni; ++i) r.coeff[i] = m[i][j] + shift;
    r.rel = Rel::Ge;
    r.rhs = 1.0;
    row_lp.rows.push_back(std::move(r));
  }
  LpSolution rs = lp_solve(row_lp);
  if (rs.status != LpStatus::Optimal)
    throw std::runtime_error("matrix game row LP did not reach an optimum");

  // Column player: maximize sum(w), M' w <= 1, w >= 0; y = w / sum(w).
  LinearProgram col_lp;
  col_lp.num_vars = nj;
  col_lp.objective.assign(nj, 1.0);
  col_lp.lower.assign(nj, 0.0);
  for (int i = 0; i < ni; ++i) {
    LpRow r;
    r.coeff.resize(nj);
    for (int j = 0; j < nj; ++j) r.coeff[j] = m[i][j] + shift;
    r.rel = Rel::Le;
    r.rhs = 1.0;
    col_lp.rows.push_back(std::move(r));
  }
  LpSolution cs = lp_solve(col_lp);
  if (cs.status != LpStatus::Optimal)
    throw std::runtime_error("matrix game column LP did not reach an optimum");

  double su = -rs.objective;  // sum(u)
  double sw = cs.objective;   // sum(w)
  if (su <= 0.0 || sw <= 0.0)
    throw std::runtime_error("matrix game LP produced a non-positive normalizer");

  MatrixGameSolution out;
  out.value = 1.0 / su - shift;
  out.row_strategy.resize(ni);
  for (int i = 0; i < ni; ++i) out.row_strategy[i] = std::max(0.0, rs.x[i]) / su;
  out.col_strategy.resize(nj);
  for (int j = 0; j < nj; ++j) out.col_strategy[j] = std::max(0.0, cs.x[j]) / sw;
  return out;
}

MatrixGameSolution solve_matrix_game(const Matrix& m) {
  check_matrix(m);
  const int ni = static_cast<int>(m.size());
  const int nj = static_cast<int>(m[0].size());

  std::vector<double> flat(static_cast<std::size_t>(ni) * nj);
  for (int i = 0; i < ni; ++i)
    for (int j = 0; j < nj; ++j) flat[i * nj + j] = m[i][j];

  MatrixGameSolution out;
  double value;
  int si, sj;
  if (find_saddle(flat.data(), ni, nj, value, si, sj)) {
    out.value = value;
    out.row_strategy.assign(ni, 0.0);
    out.row_strategy[si] = 1.0;
    out.col_strategy.assign(nj, 0.0);
    out.col_strategy[sj] = 1.0;
    return out;
  }
  if (ni == 2 && nj == 2 && mixed_2x2_applies(flat.data())) {
    solve_2x2_mixed(flat.data(), out);
    return out;
  }
  return solve_matrix_game_lp(m);
}

double matrix_game_value(const double* m, int ni, int nj) {
  if (ni == 1 && nj == 1) return m[0];
  if (ni == 1) {
    double v = m[0];
    for (int j = 1; j < nj; ++j) v = std::min(v, m[j]);
    return v;
  }
  if (nj == 1) {
    double v = m[0];
    for (int i = 1; i < ni; ++i) v = std::max(v, m[i]);
    return v;
  }
  if (ni == 2 && nj == 2) {
    double a = m[0], b = m[1], c = m[2], d = m[3];
    double r0 = std::min(a, b), r1 = std::min(c, d);
    double maximin = std::max(r0, r1);
    double c0 = std::max(a, c), c1 = std::max(b, d);
    double minimax = std::min(c0, c1);
    if (maximin == minimax) return maximin;
    if (mixed_2x2_applies(m)) {
      double den = (a + d) - (b + c);
      return (a * d - b * c) / den;
    }
    // fall through for degenerate ties
  } else {
    double value;
    int si, sj;
    if (find_saddle(m, ni, nj, value, si, sj)) return value;
  }
  Matrix full(ni, std::vector<double>(nj));
  for (int i = 0; i < ni; ++i)
    for (int j = 0; j < nj; ++j) full[i][j] = m[i * nj + j];
  return solve_matrix_game_lp(full).value;
}

}  // namespace limitval
