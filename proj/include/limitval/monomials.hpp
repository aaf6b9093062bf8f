#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "limitval/game.hpp"

namespace limitval {

/// Player-1 (state, action) pair space over which monomial patterns live.
struct StrategyShape {
  std::vector<int> actions_per_state;
  std::vector<int> offset;  // size num_states()+1, prefix sums

  static StrategyShape from_actions(std::vector<int> actions);
  static StrategyShape for_p1(const Game& game);

  int num_states() const { return static_cast<int>(actions_per_state.size()); }
  int total_pairs() const { return offset.back(); }
  int pair(int state, int action) const { return offset[state] + action; }
  bool matches(const StationaryStrategy& x) const;
  bool operator==(const StrategyShape& o) const {
    return actions_per_state == o.actions_per_state;
  }
};

/// Index (A, a): signed selection pattern over pairs (entries -1/0/1) and a
/// power of lambda in [-|states|, |states|].
struct MonomialIndex {
  std::vector<std::int8_t> pattern;  // length = shape.total_pairs()
  int lambda_power = 0;
};

/// Complete enumeration of the index set; size 3^pairs * (2 states + 1).
/// Throws when the size exceeds cap (use the restricted enumeration then).
std::vector<MonomialIndex> enumerate_monomials(const StrategyShape& shape,
                                               std::size_t cap = 2'000'000);

/// Only indices with at most max_support nonzero pattern entries.
std::vector<MonomialIndex> enumerate_monomials_restricted(const StrategyShape& shape,
                                                          int max_support,
                                                          std::size_t cap = 2'000'000);

/// lambda^a * prod x^A with the limit conventions 0^0 = 1, 0^b = 0 and
/// 0^-b = +inf for b > 0; opposite zero factors cancel pairwise.
double eval_monomial(double lambda, const StationaryStrategy& x,
                     const StrategyShape& shape, const MonomialIndex& idx);

enum class LimitTag { Zero, Finite, Infinite, Undetermined };

struct LimitClass {
  LimitTag tag = LimitTag::Undetermined;
  double value = 0.0;       // > 0 iff Finite
  double slope = 0.0;       // fitted log-log slope (estimation diagnostics)
  double slope_band = 0.0;  // +- band on the slope
  double r2 = 1.0;
};

std::string to_string(LimitTag tag);

/// Map from monomial indices to limit classes over an enumerated subset.
struct LimitVector {
  StrategyShape shape;
  std::vector<MonomialIndex> indices;
  std::vector<LimitClass> classes;

  std::size_t size() const { return indices.size(); }
  /// Position of (A,a), or npos when not enumerated.
  std::size_t find(const MonomialIndex& idx) const;
  const LimitClass* lookup(const MonomialIndex& idx) const;

  void build_index();  // call after filling indices/classes

  nlohmann::json to_json() const;
  static LimitVector from_json(const nlohmann::json& j);

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// One observation of a vanishing-discount strategy family.
struct SamplePoint {
  double lambda = 0.0;
  StationaryStrategy x;
};

struct EstimateConfig {
  int min_points = 12;
  double min_decades = 4.0;     // required span of the lambda grid
  double slope_tol = 0.15;      // |slope| below this reads as Finite
  double window_fraction = 0.5; // trailing share of samples used for the fit
  double r2_min = 0.8;
  double sst_floor = 1e-2;      // log-drift below this reads as constant: R2 := 1
  double ratio_jump = 0.1;      // opposite log-ratio jumps above this: Undetermined
};

/// Classifies lim lambda^a prod x^A along the sampled family by log-log
/// regression over the trailing window. Finite values are exp(mean trailing
/// log value). Rows of x are used as raw positive data (stochasticity is not
/// required here).
LimitVector estimate_limit_vector(const std::vector<SamplePoint>& samples,
                                  const StrategyShape& shape,
                                  const std::vector<MonomialIndex>& indices,
                                  const EstimateConfig& config = {});

struct PropertyViolation {
  std::string rule;     // "P1", "P2", "P4", ...
  std::size_t pos = 0;  // first index involved
  std::size_t pos2 = LimitVector::npos;
  double magnitude = 0.0;
  bool value_issue = false;  // finite VALUES inconsistent (classes may still be)
  std::string detail;
};

struct CheckConfig {
  double rel_tol = 1e-3;
  std::size_t pair_budget = 2'000'000;  // P4 pairs checked exhaustively below this
};

/// Consistency checks P1 (unit, antisymmetry), P2 (pure-lambda indices),
/// P3/P4 (multiplicativity on in-range sums; reciprocal pairs always, general
/// pairs subsampled deterministically above the budget).
std::vector<PropertyViolation> check_properties(const LimitVector& lv,
                                                const CheckConfig& config = {});

}  // namespace limitval
