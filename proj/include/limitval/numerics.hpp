#pragma once

#include <optional>
#include <string>
#include <vector>

namespace limitval {

/// Constraint direction of one linear row.
enum class Rel { Le, Eq, Ge };

struct LpRow {
  std::vector<double> coeff;
  Rel rel = Rel::Le;
  double rhs = 0.0;
};

/// maximize objective . x  subject to rows and optional per-variable lower
/// bounds (nullopt = free variable). Dense, desk-scale.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;                 // length num_vars
  std::vector<LpRow> rows;
  std::vector<std::optional<double>> lower;      // length num_vars

  void check_shape() const;  // throws on inconsistent dimensions / non-finite
};

/// Infeasibility witness: multipliers that combine the constraints into the
/// contradictory row 0 . x <= beta with beta < 0.
///
/// Convention: Le rows enter as written, Ge rows negated to Le form, Eq rows
/// have free sign; row_mult must be >= 0 on inequality rows. bound_mult[k]
/// >= 0 multiplies the bound row -x_k <= -lower_k (zero where no bound).
struct FarkasCertificate {
  std::vector<double> row_mult;
  std::vector<double> bound_mult;

  struct Verification {
    bool ok = false;
    double combo_inf_norm = 0.0;  // |combined coefficient row|_inf, want ~0
    double contradiction = 0.0;   // -beta, want > tol
  };
  Verification verify(const LinearProgram& lp, double tol = 1e-8) const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  std::vector<double> x;         // only for Optimal
  double objective = 0.0;        // only for Optimal
  FarkasCertificate certificate; // only for Infeasible
  int pivots = 0;
};

/// Two-phase dense simplex with Bland's rule (deterministic, cycle-free).
/// Infeasible results carry a numerically verified FarkasCertificate;
/// throws std::runtime_error if the pivot guard trips.
LpSolution lp_solve(const LinearProgram& lp);

/// Square solve with condition guard: throws std::runtime_error carrying the
/// condition estimate when rcond < 1e-12. Residual contract:
/// |Ax-b|_inf <= 1e-9 (1 + |b|_inf).
std::vector<double> solve_linear(const std::vector<std::vector<double>>& a,
                                 const std::vector<double>& b);

/// One factorization, many right-hand sides; columns of b / result.
std::vector<std::vector<double>> solve_linear_multi(
    const std::vector<std::vector<double>>& a,
    const std::vector<std::vector<double>>& b_cols);

/// Minimum-norm least squares |Ax - b|_2 (rank-deficient safe).
std::vector<double> least_squares(const std::vector<std::vector<double>>& a,
                                  const std::vector<double>& b);

/// Orthonormal basis of the null space of A, one vector per column of the
/// result; empty when A has full column rank.
std::vector<std::vector<double>> null_space(const std::vector<std::vector<double>>& a);

}  // namespace limitval
