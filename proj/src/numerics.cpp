#include "limitval/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace limitval {

namespace {

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& a) {
  if (a.empty()) throw std::invalid_argument("matrix has no rows");
  Eigen::MatrixXd m(a.size(), a[0].size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != a[0].size()) throw std::invalid_argument("ragged matrix");
    for (std::size_t j = 0; j < a[i].size(); ++j) m(i, j) = a[i][j];
  }
  return m;
}

constexpr double kPivotEps = 1e-11;
constexpr double kRcTol = 1e-10;

// Dense tableau with explicit cost row; Bland's rule for both phases.
struct Tableau {
  int m = 0, ncols = 0;  // rows, columns excluding rhs
  std::vector<std::vector<double>> t;  // m x (ncols+1)
  std::vector<double> rc;              // reduced costs, ncols+1 (last = -objective)
  std::vector<int> basis;
  int pivots = 0;
  int pivot_cap = 0;

  void pivot(int row, int col) {
    if (++pivots > pivot_cap) {
      std::ostringstream os;
      os << "simplex pivot guard tripped after " << pivots << " pivots";
      throw std::runtime_error(os.str());
    }
    double inv = 1.0 / t[row][col];
    for (int j = 0; j <= ncols; ++j) t[row][j] *= inv;
    t[row][col] = 1.0;  // cut rounding drift on the pivot column
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      double f = t[i][col];
      if (f == 0.0) continue;
      for (int j = 0; j <= ncols; ++j) t[i][j] -= f * t[row][j];
      t[i][col] = 0.0;
    }
    double f = rc[col];
    if (f != 0.0) {
      for (int j = 0; j <= ncols; ++j) rc[j] -= f * t[row][j];
      rc[col] = 0.0;
    }
    basis[row] = col;
  }

  // Minimize with Bland's rule over columns [0, col_limit).
  // Returns false when unbounded.
  bool run(int col_limit) {
    for (;;) {
      int enter = -1;
      for (int j = 0; j < col_limit; ++j) {
        if (rc[j] < -kRcTol) { enter = j; break; }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (t[i][enter] <= kPivotEps) continue;
        double ratio = t[i][ncols] / t[i][enter];
        if (ratio < best - 1e-12 ||
            (ratio < best + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

void LinearProgram::check_shape() const {
  if (num_vars <= 0) throw std::invalid_argument("LP has no variables");
  if (static_cast<int>(objective.size()) != num_vars)
    throw std::invalid_argument("LP objective length mismatch");
  if (static_cast<int>(lower.size()) != num_vars)
    throw std::invalid_argument("LP bound list length mismatch");
  for (double c : objective)
    if (!std::isfinite(c)) throw std::invalid_argument("LP objective has non-finite entry");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<int>(rows[i].coeff.size()) != num_vars)
      throw std::invalid_argument("LP row " + std::to_string(i) + " length mismatch");
    if (!std::isfinite(rows[i].rhs))
      throw std::invalid_argument("LP row " + std::to_string(i) + " has non-finite rhs");
    for (double c : rows[i].coeff)
      if (!std::isfinite(c))
        throw std::invalid_argument("LP row " + std::to_string(i) + " has non-finite entry");
  }
}

FarkasCertificate::Verification FarkasCertificate::verify(const LinearProgram& lp,
                                                          double tol) const {
  Verification v;
  if (row_mult.size() != lp.rows.size()) return v;
  if (bound_mult.size() != static_cast<std::size_t>(lp.num_vars)) return v;

  for (std::size_t i = 0; i < lp.rows.size(); ++i)
    if (lp.rows[i].rel != Rel::Eq && row_mult[i] < -tol) return v;
  for (int j = 0; j < lp.num_vars; ++j) {
    if (bound_mult[j] < -tol) return v;
    if (!lp.lower[j] && std::abs(bound_mult[j]) > tol) return v;
  }

  std::vector<double> combo(lp.num_vars, 0.0);
  double beta = 0.0;
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    double sign = lp.rows[i].rel == Rel::Ge ? -1.0 : 1.0;
    double w = row_mult[i] * sign;
    if (w == 0.0) continue;
    for (int j = 0; j < lp.num_vars; ++j) combo[j] += w * lp.rows[i].coeff[j];
    beta += w * lp.rows[i].rhs;
  }
  for (int j = 0; j < lp.num_vars; ++j) {
    if (bound_mult[j] == 0.0) continue;
    combo[j] -= bound_mult[j];
    beta -= bound_mult[j] * *lp.lower[j];
  }
  for (double c : combo) v.combo_inf_norm = std::max(v.combo_inf_norm, std::abs(c));
  v.contradiction = -beta;
  v.ok = v.combo_inf_norm <= tol && v.contradiction > tol;
  return v;
}

LpSolution lp_solve(const LinearProgram& lp) {
  lp.check_shape();
  const int nv = lp.num_vars;
  const int m = static_cast<int>(lp.rows.size());

  // Column layout: structural (bounded vars one column, free vars split into
  // +/- pair), then slacks, then one artificial per row.
  std::vector<int> col_of(nv);
  int n_struct = 0;
  for (int j = 0; j < nv; ++j) {
    col_of[j] = n_struct;
    n_struct += lp.lower[j] ? 1 : 2;
  }
  int n_slack = 0;
  for (const auto& r : lp.rows)
    if (r.rel != Rel::Eq) ++n_slack;
  const int art0 = n_struct + n_slack;
  const int ncols = art0 + m;

  Tableau tb;
  tb.m = m;
  tb.ncols = ncols;
  tb.t.assign(m, std::vector<double>(ncols + 1, 0.0));
  tb.basis.assign(m, -1);
  tb.pivot_cap = 2000 + 200 * (m + ncols);

  std::vector<double> row_sign(m, 1.0);
  int slack = n_struct;
  for (int i = 0; i < m; ++i) {
    const auto& r = lp.rows[i];
    auto& row = tb.t[i];
    double rhs = r.rhs;
    for (int j = 0; j < nv; ++j) {
      double a = r.coeff[j];
      if (lp.lower[j]) {
        row[col_of[j]] = a;
        rhs -= a * *lp.lower[j];
      } else {
        row[col_of[j]] = a;
        row[col_of[j] + 1] = -a;
      }
    }
    if (r.rel == Rel::Le) row[slack++] = 1.0;
    else if (r.rel == Rel::Ge) row[slack++] = -1.0;
    if (rhs < 0.0) {
      row_sign[i] = -1.0;
      for (int j = 0; j < ncols; ++j) row[j] = -row[j];
      rhs = -rhs;
    }
    row[ncols] = rhs;
    row[art0 + i] = 1.0;
    tb.basis[i] = art0 + i;
  }

  // Phase I: minimize the sum of artificials.
  double rhs_scale = 0.0;
  tb.rc.assign(ncols + 1, 0.0);
  for (int j = art0; j < ncols; ++j) tb.rc[j] = 1.0;
  for (int i = 0; i < m; ++i) {
    rhs_scale = std::max(rhs_scale, std::abs(lp.rows[i].rhs));
    for (int j = 0; j <= ncols; ++j) tb.rc[j] -= tb.t[i][j];
  }
  tb.run(ncols);

  double phase1 = 0.0;
  for (int i = 0; i < m; ++i)
    if (tb.basis[i] >= art0) phase1 += tb.t[i][ncols];

  LpSolution sol;
  sol.pivots = tb.pivots;
  if (phase1 > 1e-8 * (1.0 + rhs_scale)) {
    // Infeasible: simplex multipliers y_i = 1 - rc(artificial_i) combine the
    // working equations into 0 = positive; map them back to the original rows.
    sol.status = LpStatus::Infeasible;
    auto& cert = sol.certificate;
    cert.row_mult.assign(m, 0.0);
    cert.bound_mult.assign(nv, 0.0);
    for (int i = 0; i < m; ++i) {
      double y = 1.0 - tb.rc[art0 + i];
      double mu_eq = y * row_sign[i];
      cert.row_mult[i] = lp.rows[i].rel == Rel::Ge ? mu_eq : -mu_eq;
    }
    for (int j = 0; j < nv; ++j) {
      if (!lp.lower[j]) continue;
      double c = 0.0;
      for (int i = 0; i < m; ++i) {
        double sign = lp.rows[i].rel == Rel::Ge ? -1.0 : 1.0;
        c += cert.row_mult[i] * sign * lp.rows[i].coeff[j];
      }
      cert.bound_mult[j] = std::max(c, 0.0);
    }
    double scale = 0.0;
    for (double v : cert.row_mult) scale = std::max(scale, std::abs(v));
    for (double v : cert.bound_mult) scale = std::max(scale, std::abs(v));
    if (scale > 0.0) {
      for (double& v : cert.row_mult) v /= scale;
      for (double& v : cert.bound_mult) v /= scale;
    }
    return sol;
  }

  // Drive leftover artificials out of the basis (degenerate pivots); rows
  // with no eligible column are redundant and stay inert.
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] < art0) continue;
    for (int j = 0; j < art0; ++j) {
      if (std::abs(tb.t[i][j]) > 1e-9) {
        tb.pivot(i, j);
        break;
      }
    }
  }

  // Phase II: minimize -objective over structural columns.
  std::vector<double> cost(ncols, 0.0);
  for (int j = 0; j < nv; ++j) {
    if (lp.lower[j]) {
      cost[col_of[j]] = -lp.objective[j];
    } else {
      cost[col_of[j]] = -lp.objective[j];
      cost[col_of[j] + 1] = lp.objective[j];
    }
  }
  tb.rc.assign(ncols + 1, 0.0);
  for (int j = 0; j < ncols; ++j) tb.rc[j] = cost[j];
  for (int i = 0; i < m; ++i) {
    double cb = cost[tb.basis[i]];
    if (cb == 0.0) continue;
    for (int j = 0; j <= ncols; ++j) tb.rc[j] -= cb * tb.t[i][j];
  }
  if (!tb.run(art0)) {
    sol.status = LpStatus::Unbounded;
    sol.pivots = tb.pivots;
    return sol;
  }
  sol.pivots = tb.pivots;

  std::vector<double> u(ncols, 0.0);
  for (int i = 0; i < m; ++i)
    if (tb.basis[i] < ncols) u[tb.basis[i]] = tb.t[i][ncols];
  sol.x.assign(nv, 0.0);
  for (int j = 0; j < nv; ++j) {
    if (lp.lower[j])
      sol.x[j] = *lp.lower[j] + u[col_of[j]];
    else
      sol.x[j] = u[col_of[j]] - u[col_of[j] + 1];
  }
  sol.objective = 0.0;
  for (int j = 0; j < nv; ++j) sol.objective += lp.objective[j] * sol.x[j];
  sol.status = LpStatus::Optimal;
  return sol;
}

std::vector<double> solve_linear(const std::vector<std::vector<double>>& a,
                                 const std::vector<double>& b) {
  auto cols = solve_linear_multi(a, {b});
  return cols[0];
}

std::vector<std::vector<double>> solve_linear_multi(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b_cols) {
  Eigen::MatrixXd m = to_eigen(a);
  if (m.rows() != m.cols()) throw std::invalid_argument("solve_linear: matrix not square");
  Eigen::MatrixXd b(m.rows(), b_cols.size());
  for (std::size_t k = 0; k < b_cols.size(); ++k) {
    if (static_cast<Eigen::Index>(b_cols[k].size()) != m.rows())
      throw std::invalid_argument("solve_linear: rhs length mismatch");
    for (Eigen::Index i = 0; i < m.rows(); ++i) b(i, k) = b_cols[k][i];
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  double rcond = lu.isInvertible() ? lu.rcond() : 0.0;
  if (!(rcond > 1e-12)) {
    std::ostringstream os;
    os << "matrix is singular or ill-conditioned (condition estimate "
       << (rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity()) << ")";
    throw std::runtime_error(os.str());
  }
  Eigen::MatrixXd x = lu.solve(b);

  double bnorm = b.cwiseAbs().maxCoeff();
  double resid = (m * x - b).cwiseAbs().maxCoeff();
  if (resid > 1e-9 * (1.0 + bnorm)) {
    std::ostringstream os;
    os << "linear solve residual " << resid << " exceeds contract (rcond " << rcond << ")";
    throw std::runtime_error(os.str());
  }

  std::vector<std::vector<double>> out(b_cols.size(), std::vector<double>(m.rows()));
  for (std::size_t k = 0; k < b_cols.size(); ++k)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out[k][i] = x(i, k);
  return out;
}

std::vector<double> least_squares(const std::vector<std::vector<double>>& a,
                                  const std::vector<double>& b) {
  Eigen::MatrixXd m = to_eigen(a);
  if (static_cast<Eigen::Index>(b.size()) != m.rows())
    throw std::invalid_argument("least_squares: rhs length mismatch");
  Eigen::VectorXd rhs(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) rhs(i) = b[i];
  // Complete orthogonal decomposition returns the minimum-norm solution on
  // rank-deficient systems.
  Eigen::VectorXd x = m.completeOrthogonalDecomposition().solve(rhs);
  return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<std::vector<double>> null_space(const std::vector<std::vector<double>>& a) {
  Eigen::MatrixXd m = to_eigen(a);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-10);
  Eigen::MatrixXd k = lu.kernel();
  std::vector<std::vector<double>> out;
  if (lu.dimensionOfKernel() == 0) return out;
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    Eigen::VectorXd col = k.col(c);
    double norm = col.norm();
    if (norm > 0) col /= norm;
    out.emplace_back(col.data(), col.data() + col.size());
  }
  return out;
}

}  // namespace limitval
