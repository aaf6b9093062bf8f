#include "limitval/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace limitval {

namespace {

constexpr double kExpSnap = 1e-9;  // LP residue below this counts as exponent zero

std::string pair_name(const StrategyShape& shape, int p) {
  for (int s = 0; s < shape.num_states(); ++s)
    if (p < shape.offset[s + 1])
      return "(state " + std::to_string(s) + ", action " +
             std::to_string(p - shape.offset[s]) + ")";
  return "(pair " + std::to_string(p) + ")";
}

double exponent_sum(const MonomialIndex& idx, const std::vector<double>& e) {
  double s = idx.lambda_power;
  for (std::size_t p = 0; p < idx.pattern.size(); ++p)
    if (idx.pattern[p] != 0) s += idx.pattern[p] * e[p];
  return s;
}

}  // namespace

void CanonicalStrategy::validate() const {
  const int t = shape.total_pairs();
  if (static_cast<int>(coeff.size()) != t || static_cast<int>(exponent.size()) != t)
    throw std::invalid_argument("canonical strategy arrays do not match the shape");
  for (int p = 0; p < t; ++p) {
    if (!(coeff[p] > 0.0) || !std::isfinite(coeff[p]))
      throw std::invalid_argument("coefficient at " + pair_name(shape, p) +
                                  " must be strictly positive");
    if (!(exponent[p] >= 0.0) || !std::isfinite(exponent[p]))
      throw std::invalid_argument("exponent at " + pair_name(shape, p) +
                                  " must be nonnegative");
  }
  for (int s = 0; s < shape.num_states(); ++s) {
    double sum = 0.0;
    bool any = false;
    for (int i = 0; i < shape.actions_per_state[s]; ++i) {
      if (e(s, i) == 0.0) {
        any = true;
        sum += c(s, i);
      }
    }
    if (!any)
      throw std::invalid_argument("state " + std::to_string(s) +
                                  " has no zero-exponent action");
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("state " + std::to_string(s) +
                                  ": zero-exponent coefficients sum to " +
                                  std::to_string(sum) + ", not 1");
  }
}

nlohmann::json CanonicalStrategy::to_json() const {
  nlohmann::json states = nlohmann::json::array();
  for (int s = 0; s < shape.num_states(); ++s) {
    nlohmann::json row = nlohmann::json::array();
    for (int i = 0; i < shape.actions_per_state[s]; ++i)
      row.push_back({{"action", i}, {"c", c(s, i)}, {"e", e(s, i)}});
    states.push_back(std::move(row));
  }
  return nlohmann::json{{"per_state", states}};
}

CanonicalStrategy CanonicalStrategy::from_json(const nlohmann::json& j) {
  const nlohmann::json& states = j.is_array() ? j : j.at("per_state");
  CanonicalStrategy xc;
  std::vector<int> actions;
  for (const auto& row : states) actions.push_back(static_cast<int>(row.size()));
  xc.shape = StrategyShape::from_actions(actions);
  xc.coeff.assign(xc.shape.total_pairs(), 0.0);
  xc.exponent.assign(xc.shape.total_pairs(), 0.0);
  int s = 0;
  for (const auto& row : states) {
    for (const auto& entry : row) {
      int a = entry.at("action").get<int>();
      if (a < 0 || a >= xc.shape.actions_per_state[s])
        throw std::invalid_argument("canonical entry action out of range in state " +
                                    std::to_string(s));
      xc.coeff[xc.shape.pair(s, a)] = entry.at("c").get<double>();
      xc.exponent[xc.shape.pair(s, a)] = entry.at("e").get<double>();
    }
    ++s;
  }
  xc.validate();
  return xc;
}

StationaryStrategy instantiate(const CanonicalStrategy& xc, double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0)
    throw std::invalid_argument("instantiate needs lambda in (0,1]");
  StationaryStrategy x;
  x.rows.resize(xc.shape.num_states());
  for (int s = 0; s < xc.shape.num_states(); ++s) {
    const int n = xc.shape.actions_per_state[s];
    auto& row = x.rows[s];
    row.resize(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      row[i] = xc.c(s, i) * std::pow(lambda, xc.e(s, i));
      sum += row[i];
    }
    for (int i = 0; i < n; ++i) row[i] /= sum;
  }
  return x;
}

LimitVector limit_vector(const CanonicalStrategy& xc,
                         const std::vector<MonomialIndex>& indices) {
  xc.validate();
  const int t = xc.shape.total_pairs();
  std::vector<double> logc(t);
  for (int p = 0; p < t; ++p) logc[p] = std::log(xc.coeff[p]);

  LimitVector lv;
  lv.shape = xc.shape;
  lv.indices = indices;
  lv.classes.resize(indices.size());
  for (std::size_t n = 0; n < indices.size(); ++n) {
    const MonomialIndex& idx = indices[n];
    double s = exponent_sum(idx, xc.exponent);
    LimitClass& c = lv.classes[n];
    if (s > 1e-12) {
      c.tag = LimitTag::Zero;
    } else if (s < -1e-12) {
      c.tag = LimitTag::Infinite;
    } else {
      double lg = 0.0;
      for (std::size_t p = 0; p < idx.pattern.size(); ++p)
        if (idx.pattern[p] != 0) lg += idx.pattern[p] * logc[p];
      c.tag = LimitTag::Finite;
      c.value = std::exp(lg);
    }
  }
  lv.build_index();
  return lv;
}

ExponentFit fit_exponents(const LimitVector& lv, const FitOptions& opts) {
  const int t = lv.shape.total_pairs();
  const int nv = t + 1;  // exponents plus the slack variable t

  std::size_t undetermined = 0;
  for (const auto& c : lv.classes)
    if (c.tag == LimitTag::Undetermined) ++undetermined;
  if (undetermined > 0)
    throw std::invalid_argument("limit vector has " + std::to_string(undetermined) +
                                " undetermined entries; refine the lambda grid");

  for (const auto& v : check_properties(lv, opts.check)) {
    if (!v.value_issue) continue;  // class contradictions go to the LP alternative
    throw std::invalid_argument("limit vector fails " + v.rule +
                                " consistency: " + v.detail);
  }

  // Dedupe: one equality per distinct Finite pattern (conflicting lambda
  // powers keep both rows: the LP certificate then exhibits the clash), and
  // the tightest Zero row per pattern.
  std::map<std::vector<std::int8_t>, std::size_t> eq_rows;   // pattern -> pos
  std::map<std::vector<std::int8_t>, std::size_t> zero_rows;
  std::vector<std::size_t> extra_eq;
  for (std::size_t n = 0; n < lv.size(); ++n) {
    const auto& idx = lv.indices[n];
    switch (lv.classes[n].tag) {
      case LimitTag::Finite: {
        auto [it, fresh] = eq_rows.try_emplace(idx.pattern, n);
        if (!fresh && lv.indices[it->second].lambda_power != idx.lambda_power)
          extra_eq.push_back(n);
        break;
      }
      case LimitTag::Zero: {
        auto [it, fresh] = zero_rows.try_emplace(idx.pattern, n);
        if (!fresh && idx.lambda_power < lv.indices[it->second].lambda_power)
          it->second = n;
        break;
      }
      default:
        break;  // Infinite rows constrain nothing; their mirrors are Zero rows
    }
  }

  auto lp_row = [&](std::size_t pos, bool with_t, double rhs_shift) {
    LpRow r;
    r.coeff.assign(nv, 0.0);
    const auto& idx = lv.indices[pos];
    for (int p = 0; p < t; ++p) r.coeff[p] = idx.pattern[p];
    if (with_t) r.coeff[t] = -1.0;
    r.rel = with_t || rhs_shift != 0.0 ? Rel::Ge : Rel::Eq;
    r.rhs = -static_cast<double>(idx.lambda_power) + rhs_shift;
    return r;
  };

  ExponentFit out;

  // Equality block: verify global consistency once, then keep an independent
  // subset for the LP. The least-squares residual doubles as the Farkas
  // certificate when the block is contradictory.
  std::vector<std::size_t> all_eq;
  for (const auto& [pat, pos] : eq_rows) all_eq.push_back(pos);
  all_eq.insert(all_eq.end(), extra_eq.begin(), extra_eq.end());

  std::vector<std::size_t> indep_eq;
  if (!all_eq.empty()) {
    std::vector<std::vector<double>> em;
    std::vector<double> er;
    for (std::size_t pos : all_eq) {
      const auto& idx = lv.indices[pos];
      em.emplace_back(idx.pattern.begin(), idx.pattern.end());
      er.push_back(-static_cast<double>(idx.lambda_power));
    }
    std::vector<double> ehat = least_squares(em, er);
    double worst = 0.0;
    std::vector<double> resid(all_eq.size());
    for (std::size_t i = 0; i < all_eq.size(); ++i) {
      double v = -er[i];
      for (int p = 0; p < t; ++p) v += em[i][p] * ehat[p];
      resid[i] = v;
      worst = std::max(worst, std::abs(v));
    }
    if (worst > opts.eq_residual_tol) {
      out.feasible = false;
      out.system.num_vars = t;
      out.system.objective.assign(t, 0.0);
      out.system.lower.assign(t, std::optional<double>(0.0));
      for (std::size_t pos : all_eq) {
        LpRow r = lp_row(pos, false, 0.0);
        r.coeff.resize(t);
        out.system.rows.push_back(std::move(r));
        out.row_source.push_back(pos);
      }
      // mu = residual of the least squares: mu^T E = 0 and mu^T rhs > 0
      out.certificate.row_mult.assign(resid.begin(), resid.end());
      double scale = 0.0;
      for (double v : resid) scale = std::max(scale, std::abs(v));
      for (double& v : out.certificate.row_mult) v /= scale;
      out.certificate.bound_mult.assign(t, 0.0);
      // flip so the combined rhs lands strictly negative
      auto ver = out.certificate.verify(out.system);
      if (!ver.ok) {
        for (double& v : out.certificate.row_mult) v = -v;
        ver = out.certificate.verify(out.system);
      }
      if (!ver.ok)
        throw std::runtime_error("equality certificate failed self-verification");
      return out;
    }

    // row-echelon selection of independent equality rows
    std::vector<std::vector<double>> basis;
    for (std::size_t i = 0; i < all_eq.size(); ++i) {
      std::vector<double> v = em[i];
      for (const auto& b : basis) {
        double dot = 0.0, nrm = 0.0;
        for (int p = 0; p < t; ++p) {
          dot += v[p] * b[p];
          nrm += b[p] * b[p];
        }
        double f = dot / nrm;
        for (int p = 0; p < t; ++p) v[p] -= f * b[p];
      }
      double nrm = 0.0;
      for (int p = 0; p < t; ++p) nrm += v[p] * v[p];
      if (nrm > 1e-16) {
        basis.push_back(v);
        indep_eq.push_back(all_eq[i]);
      }
      if (static_cast<int>(basis.size()) == t) break;
    }
  }

  // Restricted LP grown by row generation over the deduped Zero rows.
  LinearProgram lp;
  lp.num_vars = nv;
  lp.objective.assign(nv, 0.0);
  lp.objective[t] = 1.0;
  lp.lower.assign(nv, std::optional<double>(0.0));
  lp.lower[t] = std::nullopt;
  std::vector<std::size_t> source;
  for (std::size_t pos : indep_eq) {
    lp.rows.push_back(lp_row(pos, false, 0.0));
    source.push_back(pos);
  }
  {
    LpRow cap;  // t <= 1
    cap.coeff.assign(nv, 0.0);
    cap.coeff[t] = 1.0;
    cap.rel = Rel::Le;
    cap.rhs = 1.0;
    lp.rows.push_back(std::move(cap));
    source.push_back(LimitVector::npos);
  }

  std::vector<std::pair<std::vector<std::int8_t>, std::size_t>> pool(zero_rows.begin(),
                                                                     zero_rows.end());
  std::vector<bool> active(pool.size(), false);
  LpSolution sol;
  for (std::size_t round = 0; round <= pool.size() + 1; ++round) {
    sol = lp_solve(lp);
    if (sol.status == LpStatus::Infeasible) {
      out.feasible = false;
      out.system = lp;
      out.row_source = source;
      out.certificate = sol.certificate;
      if (!out.certificate.verify(out.system).ok)
        throw std::runtime_error("exponent certificate failed self-verification");
      return out;
    }
    if (sol.status != LpStatus::Optimal)
      throw std::runtime_error("exponent LP unbounded (internal error: t is capped)");

    // most violated inactive rows enter the LP
    std::vector<std::pair<double, std::size_t>> violated;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (active[k]) continue;
      const auto& idx = lv.indices[pool[k].second];
      double v = idx.lambda_power;
      for (int p = 0; p < t; ++p) v += idx.pattern[p] * sol.x[p];
      if (v < sol.x[t] - 1e-9) violated.push_back({v, k});
    }
    if (violated.empty()) break;
    std::sort(violated.begin(), violated.end());
    for (std::size_t i = 0; i < violated.size() && i < 16; ++i) {
      std::size_t k = violated[i].second;
      lp.rows.push_back(lp_row(pool[k].second, true, 0.0));
      source.push_back(pool[k].second);
      active[k] = true;
    }
  }

  if (sol.x[t] > opts.strict_threshold) {
    out.feasible = true;
    out.slack = sol.x[t];
    out.exponent.assign(sol.x.begin(), sol.x.begin() + t);
    for (double& e : out.exponent)
      if (e < kExpSnap) e = 0.0;  // LP vertex residue
    return out;
  }

  // The weak system is feasible but only with slack t* <= threshold: certify
  // the strict alternative by re-solving the active rows at a fixed positive
  // quantum, which must come out infeasible.
  LinearProgram strict;
  strict.num_vars = t;
  strict.objective.assign(t, 0.0);
  strict.lower.assign(t, std::optional<double>(0.0));
  std::vector<std::size_t> strict_source;
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    if (source[r] == LimitVector::npos) continue;  // the t <= 1 cap
    const auto& idx = lv.indices[source[r]];
    LpRow row;
    row.coeff.assign(t, 0.0);
    for (int p = 0; p < t; ++p) row.coeff[p] = idx.pattern[p];
    bool is_zero_row = lv.classes[source[r]].tag == LimitTag::Zero;
    row.rel = is_zero_row ? Rel::Ge : Rel::Eq;
    row.rhs = -static_cast<double>(idx.lambda_power) +
              (is_zero_row ? opts.strict_quantum : 0.0);
    strict.rows.push_back(std::move(row));
    strict_source.push_back(source[r]);
  }
  LpSolution ssol = lp_solve(strict);
  if (ssol.status != LpStatus::Infeasible)
    throw std::runtime_error(
        "strict exponent system unexpectedly solvable (slack was " +
        std::to_string(sol.x[t]) + ")");
  out.feasible = false;
  out.system = std::move(strict);
  out.row_source = std::move(strict_source);
  out.certificate = ssol.certificate;
  if (!out.certificate.verify(out.system).ok)
    throw std::runtime_error("strict certificate failed self-verification");
  return out;
}

CoefficientFit fit_coefficients(const LimitVector& lv, const std::vector<double>& exponent,
                                const FitOptions& opts) {
  const int t = lv.shape.total_pairs();
  if (static_cast<int>(exponent.size()) != t)
    throw std::invalid_argument("exponent vector does not match the shape");

  // Finite rows must already be satisfied by the exponents.
  std::map<std::vector<std::int8_t>, std::size_t> fin;
  for (std::size_t n = 0; n < lv.size(); ++n) {
    if (lv.classes[n].tag != LimitTag::Finite) continue;
    double s = exponent_sum(lv.indices[n], exponent);
    if (std::abs(s) > 1e-8)
      throw std::invalid_argument(
          "exponents violate a Finite-class equality (residual " + std::to_string(s) +
          "); fit exponents first");
    fin.try_emplace(lv.indices[n].pattern, n);
  }

  std::vector<std::vector<double>> em;
  std::vector<double> er;
  for (const auto& [pat, pos] : fin) {
    em.emplace_back(pat.begin(), pat.end());
    er.push_back(std::log(lv.classes[pos].value));
  }

  CoefficientFit out;
  std::vector<double> d(t, 0.0);
  if (!em.empty()) {
    d = least_squares(em, er);
    for (std::size_t i = 0; i < em.size(); ++i) {
      double v = -er[i];
      for (int p = 0; p < t; ++p) v += em[i][p] * d[p];
      out.max_log_residual = std::max(out.max_log_residual, std::abs(v));
    }
    if (out.max_log_residual > opts.log_residual_tol)
      throw std::runtime_error(
          "coefficient system is inconsistent (log residual " +
          std::to_string(out.max_log_residual) +
          "); the limit vector looks like estimation noise");
  }

  // a pair is pinned iff no null-space direction moves it
  std::vector<bool> pinned(t, !em.empty());
  if (em.empty()) {
    // no Finite rows: nothing is pinned
  } else {
    for (const auto& k : null_space(em))
      for (int p = 0; p < t; ++p)
        if (std::abs(k[p]) > 1e-8) pinned[p] = false;
  }
  for (int p = 0; p < t; ++p)
    if (!pinned[p]) out.unpinned.push_back(p);

  out.coeff.resize(t);
  for (int p = 0; p < t; ++p) out.coeff[p] = std::exp(d[p]);

  // Membership in X: zero-exponent coefficients of each state sum to 1.
  // Pinned values are kept; unpinned ones absorb the remaining mass.
  out.state_normalization.assign(lv.shape.num_states(), 0.0);
  for (int s = 0; s < lv.shape.num_states(); ++s) {
    double sum = 0.0, pinned_sum = 0.0;
    std::vector<int> zero_unpinned;
    bool any_zero = false;
    for (int i = 0; i < lv.shape.actions_per_state[s]; ++i) {
      int p = lv.shape.pair(s, i);
      if (exponent[p] != 0.0) continue;
      any_zero = true;
      sum += out.coeff[p];
      if (pinned[p])
        pinned_sum += out.coeff[p];
      else
        zero_unpinned.push_back(p);
    }
    if (!any_zero)
      throw std::runtime_error("state " + std::to_string(s) +
                               " has no zero-exponent action; the limit vector is not "
                               "canonically representable");
    out.state_normalization[s] = std::abs(sum - 1.0);
    if (!zero_unpinned.empty() && 1.0 - pinned_sum > 1e-9) {
      double share = (1.0 - pinned_sum) / zero_unpinned.size();
      for (int p : zero_unpinned) out.coeff[p] = share;
    } else if (std::abs(sum - 1.0) > 1e-12) {
      for (int i = 0; i < lv.shape.actions_per_state[s]; ++i) {
        int p = lv.shape.pair(s, i);
        if (exponent[p] == 0.0) out.coeff[p] /= sum;
      }
    }
  }
  return out;
}

CanonicalFit fit_canonical(const LimitVector& lv, const FitOptions& opts) {
  CanonicalFit out;
  out.exponents = fit_exponents(lv, opts);
  if (!out.exponents.feasible) {
    auto ver = out.exponents.certificate.verify(out.exponents.system);
    std::ostringstream os;
    os << "exponent system infeasible; Farkas certificate verifies with contradiction "
       << ver.contradiction;
    throw FitInfeasible(os.str(), std::move(out.exponents));
  }
  out.coefficients = fit_coefficients(lv, out.exponents.exponent, opts);
  out.strategy.shape = lv.shape;
  out.strategy.exponent = out.exponents.exponent;
  out.strategy.coeff = out.coefficients.coeff;
  out.strategy.validate();
  return out;
}

std::vector<double> rationalize_exponents(const LimitVector& lv,
                                          const std::vector<double>& exponent, int n) {
  if (n < 1) throw std::invalid_argument("denominator N must be >= 1");
  const int t = lv.shape.total_pairs();
  if (static_cast<int>(exponent.size()) != t)
    throw std::invalid_argument("exponent vector does not match the shape");

  std::vector<long long> scaled(t);
  std::vector<double> out(t);
  for (int p = 0; p < t; ++p) {
    scaled[p] = std::llround(exponent[p] * n);
    if (scaled[p] < 0) scaled[p] = 0;
    out[p] = static_cast<double>(scaled[p]) / n;
  }

  for (std::size_t k = 0; k < lv.size(); ++k) {
    const auto& idx = lv.indices[k];
    long long s = static_cast<long long>(idx.lambda_power) * n;
    for (int p = 0; p < t; ++p)
      if (idx.pattern[p] != 0) s += idx.pattern[p] * scaled[p];
    if (lv.classes[k].tag == LimitTag::Finite && s != 0)
      throw std::runtime_error("rounding to multiples of 1/" + std::to_string(n) +
                               " breaks the equality of a Finite index (a=" +
                               std::to_string(idx.lambda_power) + "); raise N");
    if (lv.classes[k].tag == LimitTag::Zero && s < 1)
      throw std::runtime_error("rounding to multiples of 1/" + std::to_string(n) +
                               " breaks the strict inequality of a Zero index (a=" +
                               std::to_string(idx.lambda_power) + "); raise N");
  }
  return out;
}

}  // namespace limitval
