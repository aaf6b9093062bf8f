#pragma once

#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "limitval/monomials.hpp"
#include "limitval/numerics.hpp"

namespace limitval {

/// A (coefficient, exponent) pair per (state, action): the family
/// x_lambda(s,i) ~ c(s,i) lambda^e(s,i), with the zero-exponent coefficients
/// of each state summing to 1.
struct CanonicalStrategy {
  StrategyShape shape;
  std::vector<double> coeff;     // > 0, flat over pairs
  std::vector<double> exponent;  // >= 0, flat over pairs

  double c(int state, int action) const { return coeff[shape.pair(state, action)]; }
  double e(int state, int action) const { return exponent[shape.pair(state, action)]; }

  /// c > 0, e >= 0, and per state: some e == 0 and sum of zero-exponent
  /// coefficients equal to 1 within 1e-9.
  void validate() const;

  nlohmann::json to_json() const;
  static CanonicalStrategy from_json(const nlohmann::json& j);
};

/// x_lambda(s,i) = c lambda^e / sum_i' c' lambda^e'.
StationaryStrategy instantiate(const CanonicalStrategy& xc, double lambda);

/// Analytic limit vector: with s = a + sum A e, the class is Zero (s > 0),
/// Infinite (s < 0) or Finite(prod c^A) (|s| <= 1e-12).
LimitVector limit_vector(const CanonicalStrategy& xc,
                         const std::vector<MonomialIndex>& indices);

struct FitOptions {
  double strict_threshold = 1e-9;  // accept exponents only when t* exceeds this
  double strict_quantum = 1e-6;    // ">= quantum" system used for the certificate
  double eq_residual_tol = 1e-9;   // consistency of the Finite equality rows
  double log_residual_tol = 1e-4;  // coefficient system residual, log space
  CheckConfig check;
};

/// Outcome of the exponent system: either exponents with positive slack t*,
/// or a Farkas certificate of the alternative system. `system` is the LP the
/// certificate multiplies; row_source maps its rows to positions in the
/// input LimitVector (npos for artifact rows such as t <= 1).
struct ExponentFit {
  bool feasible = false;
  std::vector<double> exponent;
  double slack = 0.0;
  FarkasCertificate certificate;
  LinearProgram system;
  std::vector<std::size_t> row_source;
};

/// Solves: maximize t s.t. sum A e + a >= t (Zero rows), sum A e + a = 0
/// (Finite rows), e >= 0, t <= 1. Exactly one of {t* > threshold, verified
/// certificate} results. Throws on Undetermined entries or on violations of
/// the finite-value consistency checks (class-level contradictions are left
/// to the LP: they are what the certificate adjudicates).
ExponentFit fit_exponents(const LimitVector& lv, const FitOptions& opts = {});

struct CoefficientFit {
  std::vector<double> coeff;
  double max_log_residual = 0.0;            // worst |E d - ln L| over Finite rows
  std::vector<int> unpinned;                // pairs not determined by Finite rows
  std::vector<double> state_normalization;  // per state |sum c(e=0) - 1| before fixup
};

/// Log-linear system sum A ln c = ln L over Finite rows; minimum-norm least
/// squares, then per-state renormalization of the zero-exponent mass:
/// pinned coordinates keep their fitted values, unpinned ones share the
/// remaining mass equally.
CoefficientFit fit_coefficients(const LimitVector& lv, const std::vector<double>& exponent,
                                const FitOptions& opts = {});

struct CanonicalFit {
  CanonicalStrategy strategy;
  ExponentFit exponents;
  CoefficientFit coefficients;
};

struct FitInfeasible : std::runtime_error {
  FitInfeasible(std::string msg, ExponentFit fit)
      : std::runtime_error(std::move(msg)), details(std::move(fit)) {}
  ExponentFit details;
};

/// Full constructive fit: exponents then coefficients. Throws FitInfeasible
/// (carrying the certificate) when the exponent alternative holds.
CanonicalFit fit_canonical(const LimitVector& lv, const FitOptions& opts = {});

/// Rounds exponents to multiples of 1/N and re-verifies the whole constraint
/// system in exact integer arithmetic (equalities stay equal, strict rows
/// keep slack >= 1/N); throws naming the first broken constraint.
std::vector<double> rationalize_exponents(const LimitVector& lv,
                                          const std::vector<double>& exponent, int n);

}  // namespace limitval
