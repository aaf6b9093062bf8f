#include "limitval/monomials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace limitval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Base-3 packing of the pattern plus the shifted lambda power. Fits 64 bits
// for up to 35 pairs, far beyond what full enumeration can reach anyway.
std::uint64_t pack_key(const MonomialIndex& idx, int num_states) {
  if (idx.pattern.size() > 35)
    throw std::invalid_argument("monomial key packing supports at most 35 pairs");
  std::uint64_t key = 0;
  for (std::size_t p = idx.pattern.size(); p-- > 0;)
    key = key * 3 + static_cast<std::uint64_t>(idx.pattern[p] + 1);
  return key * (2 * static_cast<std::uint64_t>(num_states) + 1) +
         static_cast<std::uint64_t>(idx.lambda_power + num_states);
}

struct LogValue {
  int zero_net = 0;   // >0 collapses to 0, <0 to +inf
  double logv = 0.0;  // meaningful when zero_net == 0
};

LogValue monomial_log(const double* logx, const std::uint8_t* is_zero,
                      double log_lambda, const MonomialIndex& idx) {
  LogValue out;
  out.logv = idx.lambda_power * log_lambda;
  for (std::size_t p = 0; p < idx.pattern.size(); ++p) {
    int a = idx.pattern[p];
    if (a == 0) continue;
    if (is_zero[p])
      out.zero_net += a;
    else
      out.logv += a * logx[p];
  }
  return out;
}

struct OlsFit {
  double slope = 0.0, slope_se = 0.0, mean_y = 0.0, r2 = 1.0, sst = 0.0;
};

OlsFit ols(const std::vector<double>& xs, const std::vector<double>& ys,
           double sst_floor) {
  const std::size_t k = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  OlsFit f;
  f.mean_y = my;
  f.sst = syy;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  double sse = std::max(syy - f.slope * sxy, 0.0);
  f.r2 = syy <= sst_floor ? 1.0 : 1.0 - sse / syy;
  if (k > 2 && sxx > 0.0) f.slope_se = std::sqrt(sse / (k - 2) / sxx);
  return f;
}

}  // namespace

StrategyShape StrategyShape::from_actions(std::vector<int> actions) {
  StrategyShape s;
  s.actions_per_state = std::move(actions);
  s.offset.resize(s.actions_per_state.size() + 1, 0);
  for (std::size_t i = 0; i < s.actions_per_state.size(); ++i) {
    if (s.actions_per_state[i] < 1)
      throw std::invalid_argument("shape needs at least one action per state");
    s.offset[i + 1] = s.offset[i] + s.actions_per_state[i];
  }
  return s;
}

StrategyShape StrategyShape::for_p1(const Game& game) {
  std::vector<int> a(game.num_states());
  for (int s = 0; s < game.num_states(); ++s) a[s] = game.num_actions_p1(s);
  return from_actions(std::move(a));
}

bool StrategyShape::matches(const StationaryStrategy& x) const {
  if (x.num_states() != num_states()) return false;
  for (int s = 0; s < num_states(); ++s)
    if (static_cast<int>(x.rows[s].size()) != actions_per_state[s]) return false;
  return true;
}

std::vector<MonomialIndex> enumerate_monomials(const StrategyShape& shape,
                                               std::size_t cap) {
  const int t = shape.total_pairs();
  const int n = shape.num_states();
  double count = std::pow(3.0, t) * (2.0 * n + 1.0);
  if (count > static_cast<double>(cap))
    throw std::invalid_argument(
        "full monomial enumeration would produce " + std::to_string(count) +
        " indices (cap " + std::to_string(cap) +
        "); use the restricted enumeration");

  std::vector<MonomialIndex> out;
  out.reserve(static_cast<std::size_t>(count));
  MonomialIndex idx;
  idx.pattern.assign(t, -1);
  for (;;) {
    for (int a = -n; a <= n; ++a) {
      idx.lambda_power = a;
      out.push_back(idx);
    }
    int p = 0;
    while (p < t && idx.pattern[p] == 1) idx.pattern[p++] = -1;
    if (p == t) break;
    ++idx.pattern[p];
  }
  return out;
}

std::vector<MonomialIndex> enumerate_monomials_restricted(const StrategyShape& shape,
                                                          int max_support,
                                                          std::size_t cap) {
  const int t = shape.total_pairs();
  const int n = shape.num_states();
  if (max_support < 0) throw std::invalid_argument("max_support must be >= 0");
  max_support = std::min(max_support, t);

  double count = 0.0, binom = 1.0;
  for (int j = 0; j <= max_support; ++j) {
    count += binom * std::pow(2.0, j);
    binom = binom * (t - j) / (j + 1);
  }
  count *= 2.0 * n + 1.0;
  if (count > static_cast<double>(cap))
    throw std::invalid_argument("restricted enumeration still exceeds the cap");

  std::vector<MonomialIndex> out;
  out.reserve(static_cast<std::size_t>(count));
  MonomialIndex idx;
  idx.pattern.assign(t, 0);
  std::vector<int> support;

  auto emit = [&]() {
    for (int a = -n; a <= n; ++a) {
      idx.lambda_power = a;
      out.push_back(idx);
    }
  };
  // depth-first over supports of size <= max_support, signs +-1 on each
  auto rec = [&](auto&& self, int from, int remaining) -> void {
    emit();
    if (remaining == 0) return;
    for (int p = from; p < t; ++p) {
      for (int sgn : {-1, 1}) {
        idx.pattern[p] = static_cast<std::int8_t>(sgn);
        self(self, p + 1, remaining - 1);
      }
      idx.pattern[p] = 0;
    }
  };
  rec(rec, 0, max_support);
  return out;
}

double eval_monomial(double lambda, const StationaryStrategy& x,
                     const StrategyShape& shape, const MonomialIndex& idx) {
  if (!(lambda > 0.0) || lambda > 1.0)
    throw std::invalid_argument("eval_monomial needs lambda in (0,1]");
  if (!shape.matches(x))
    throw std::invalid_argument("strategy does not match the monomial shape");
  if (static_cast<int>(idx.pattern.size()) != shape.total_pairs())
    throw std::invalid_argument("monomial pattern does not match the shape");

  int zero_net = 0;
  double v = 1.0;
  for (int s = 0; s < shape.num_states(); ++s) {
    for (int i = 0; i < shape.actions_per_state[s]; ++i) {
      int a = idx.pattern[shape.pair(s, i)];
      if (a == 0) continue;
      double xv = x.rows[s][i];
      if (xv == 0.0)
        zero_net += a;
      else if (a > 0)
        v *= xv;
      else
        v /= xv;
    }
  }
  if (zero_net > 0) return 0.0;
  if (zero_net < 0) return kInf;
  for (int k = 0; k < idx.lambda_power; ++k) v *= lambda;
  for (int k = 0; k > idx.lambda_power; --k) v /= lambda;
  return v;
}

std::string to_string(LimitTag tag) {
  switch (tag) {
    case LimitTag::Zero: return "zero";
    case LimitTag::Finite: return "finite";
    case LimitTag::Infinite: return "infinite";
    case LimitTag::Undetermined: return "undetermined";
  }
  return "?";
}

void LimitVector::build_index() {
  index_.clear();
  index_.reserve(indices.size() * 2);
  for (std::size_t i = 0; i < indices.size(); ++i)
    index_.emplace(pack_key(indices[i], shape.num_states()), i);
}

std::size_t LimitVector::find(const MonomialIndex& idx) const {
  auto it = index_.find(pack_key(idx, shape.num_states()));
  return it == index_.end() ? npos : it->second;
}

const LimitClass* LimitVector::lookup(const MonomialIndex& idx) const {
  std::size_t p = find(idx);
  return p == npos ? nullptr : &classes[p];
}

nlohmann::json LimitVector::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    nlohmann::json e;
    e["A"] = std::vector<int>(indices[i].pattern.begin(), indices[i].pattern.end());
    e["a"] = indices[i].lambda_power;
    e["class"] = to_string(classes[i].tag);
    if (classes[i].tag == LimitTag::Finite) e["value"] = classes[i].value;
    entries.push_back(std::move(e));
  }
  return nlohmann::json{{"actions_per_state", shape.actions_per_state},
                        {"entries", entries}};
}

LimitVector LimitVector::from_json(const nlohmann::json& j) {
  LimitVector lv;
  lv.shape = StrategyShape::from_actions(j.at("actions_per_state").get<std::vector<int>>());
  for (const auto& e : j.at("entries")) {
    MonomialIndex idx;
    for (int v : e.at("A").get<std::vector<int>>()) {
      if (v < -1 || v > 1) throw std::invalid_argument("pattern entry outside {-1,0,1}");
      idx.pattern.push_back(static_cast<std::int8_t>(v));
    }
    idx.lambda_power = e.at("a").get<int>();
    LimitClass c;
    std::string cls = e.at("class").get<std::string>();
    if (cls == "zero") c.tag = LimitTag::Zero;
    else if (cls == "infinite") c.tag = LimitTag::Infinite;
    else if (cls == "undetermined") c.tag = LimitTag::Undetermined;
    else {
      c.tag = LimitTag::Finite;
      c.value = e.at("value").get<double>();
      if (!(c.value > 0.0)) throw std::invalid_argument("finite limit value must be > 0");
    }
    lv.indices.push_back(std::move(idx));
    lv.classes.push_back(c);
  }
  lv.build_index();
  return lv;
}

LimitVector estimate_limit_vector(const std::vector<SamplePoint>& samples,
                                  const StrategyShape& shape,
                                  const std::vector<MonomialIndex>& indices,
                                  const EstimateConfig& config) {
  const int count = static_cast<int>(samples.size());
  if (count < config.min_points)
    throw std::invalid_argument("estimate needs at least " +
                                std::to_string(config.min_points) + " samples, got " +
                                std::to_string(count));
  for (int i = 0; i < count; ++i) {
    if (!(samples[i].lambda > 0.0) || samples[i].lambda > 1.0)
      throw std::invalid_argument("sample lambda outside (0,1]");
    if (i > 0 && !(samples[i].lambda < samples[i - 1].lambda))
      throw std::invalid_argument("sample lambdas must be strictly decreasing");
    if (!shape.matches(samples[i].x))
      throw std::invalid_argument("sample strategy does not match the shape");
  }
  if (std::log10(samples.front().lambda / samples.back().lambda) < config.min_decades)
    throw std::invalid_argument("lambda grid spans too few decades");

  const int t = shape.total_pairs();
  const int w0 = count - std::max(3, (count + 1) / 2);  // window start

  // flattened per-sample logs
  std::vector<double> logx(static_cast<std::size_t>(count) * t);
  std::vector<std::uint8_t> isz(static_cast<std::size_t>(count) * t);
  std::vector<double> logl(count);
  for (int i = 0; i < count; ++i) {
    logl[i] = std::log(samples[i].lambda);
    for (int s = 0; s < shape.num_states(); ++s) {
      for (int a = 0; a < shape.actions_per_state[s]; ++a) {
        double xv = samples[i].x.rows[s][a];
        if (!(xv >= 0.0))
          throw std::invalid_argument("sample strategy has a negative entry");
        int p = shape.pair(s, a);
        isz[i * t + p] = xv == 0.0;
        logx[i * t + p] = xv == 0.0 ? 0.0 : std::log(xv);
      }
    }
  }

  LimitVector lv;
  lv.shape = shape;
  lv.indices = indices;
  lv.classes.resize(indices.size());

  std::vector<double> xs, ys;
  for (std::size_t n = 0; n < indices.size(); ++n) {
    const MonomialIndex& idx = indices[n];
    int zeros = 0, infs = 0;
    xs.clear();
    ys.clear();
    for (int i = w0; i < count; ++i) {
      LogValue v = monomial_log(&logx[i * t], &isz[i * t], logl[i], idx);
      if (v.zero_net > 0) ++zeros;
      else if (v.zero_net < 0) ++infs;
      else {
        xs.push_back(logl[i]);
        ys.push_back(v.logv);
      }
    }
    const int k = count - w0;
    LimitClass& c = lv.classes[n];
    if (zeros == k) { c.tag = LimitTag::Zero; continue; }
    if (infs == k) { c.tag = LimitTag::Infinite; continue; }
    if (zeros + infs > 0) { c.tag = LimitTag::Undetermined; continue; }

    OlsFit f = ols(xs, ys, config.sst_floor);
    c.slope = f.slope;
    c.slope_band = 2.0 * f.slope_se;
    c.r2 = f.r2;

    bool up = false, down = false;
    for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
      double d = ys[i + 1] - ys[i];
      if (d > config.ratio_jump) up = true;
      if (d < -config.ratio_jump) down = true;
    }
    if ((up && down) || f.r2 < config.r2_min) {
      c.tag = LimitTag::Undetermined;
      continue;
    }
    if (f.slope > config.slope_tol) c.tag = LimitTag::Zero;
    else if (f.slope < -config.slope_tol) c.tag = LimitTag::Infinite;
    else {
      c.tag = LimitTag::Finite;
      c.value = std::exp(f.mean_y);
    }
  }
  lv.build_index();
  return lv;
}

std::vector<PropertyViolation> check_properties(const LimitVector& lv,
                                                const CheckConfig& config) {
  std::vector<PropertyViolation> out;
  const int ns = lv.shape.num_states();
  MonomialIndex mirror;

  auto add = [&](const char* rule, std::size_t p, std::size_t q, double mag,
                 bool values, std::string detail) {
    out.push_back({rule, p, q, mag, values, std::move(detail)});
  };

  for (std::size_t p = 0; p < lv.size(); ++p) {
    const MonomialIndex& idx = lv.indices[p];
    const LimitClass& c = lv.classes[p];
    if (c.tag == LimitTag::Undetermined) continue;

    bool is_origin = idx.lambda_power == 0 &&
                     std::all_of(idx.pattern.begin(), idx.pattern.end(),
                                 [](std::int8_t v) { return v == 0; });
    if (is_origin) {
      double err = c.tag == LimitTag::Finite ? std::abs(c.value - 1.0) : 1.0;
      if (err > config.rel_tol)
        add("P1", p, LimitVector::npos, err, true, "L(0,0) must be Finite(1)");
    }

    bool pure_lambda = std::all_of(idx.pattern.begin(), idx.pattern.end(),
                                   [](std::int8_t v) { return v == 0; });
    if (pure_lambda) {
      int a = idx.lambda_power;
      bool ok = (a > 0 && c.tag == LimitTag::Zero) ||
                (a < 0 && c.tag == LimitTag::Infinite) ||
                (a == 0 && c.tag == LimitTag::Finite &&
                 std::abs(c.value - 1.0) <= config.rel_tol);
      if (!ok)
        add("P2", p, LimitVector::npos, 1.0, false,
            "pure-lambda index with a=" + std::to_string(a) + " classified " +
                to_string(c.tag));
    }

    // antisymmetry and reciprocal products against the mirror index
    mirror.pattern.assign(idx.pattern.size(), 0);
    for (std::size_t i = 0; i < idx.pattern.size(); ++i)
      mirror.pattern[i] = static_cast<std::int8_t>(-idx.pattern[i]);
    mirror.lambda_power = -idx.lambda_power;
    std::size_t q = lv.find(mirror);
    if (q == LimitVector::npos || q < p) continue;
    const LimitClass& mc = lv.classes[q];
    if (mc.tag == LimitTag::Undetermined) continue;

    if ((c.tag == LimitTag::Infinite) != (mc.tag == LimitTag::Zero) ||
        (c.tag == LimitTag::Zero) != (mc.tag == LimitTag::Infinite))
      add("P1", p, q, 1.0, false,
          "antisymmetry: " + to_string(c.tag) + " vs " + to_string(mc.tag));
    if (c.tag == LimitTag::Finite && mc.tag == LimitTag::Finite) {
      double err = std::abs(c.value * mc.value - 1.0);
      if (err > config.rel_tol)
        add("P4", p, q, err, true,
            "reciprocal product " + std::to_string(c.value * mc.value));
    }
  }

  // general multiplicativity over Finite pairs, subsampled above the budget
  std::vector<std::size_t> fin;
  for (std::size_t p = 0; p < lv.size(); ++p)
    if (lv.classes[p].tag == LimitTag::Finite) fin.push_back(p);
  const std::uint64_t f = fin.size();
  const std::uint64_t pairs = f * (f + 1) / 2;
  const std::uint64_t step = pairs > config.pair_budget
                                 ? (pairs + config.pair_budget - 1) / config.pair_budget
                                 : 1;
  MonomialIndex sum;
  for (std::uint64_t tix = 0; tix < pairs; tix += step) {
    // triangular unranking: tix -> (r, s) with s <= r
    std::uint64_t r = static_cast<std::uint64_t>(
        (std::sqrt(8.0 * static_cast<double>(tix) + 1.0) - 1.0) / 2.0);
    while ((r + 1) * (r + 2) / 2 <= tix) ++r;
    while (r * (r + 1) / 2 > tix) --r;
    std::uint64_t s = tix - r * (r + 1) / 2;
    std::size_t p = fin[r], q = fin[s];

    const MonomialIndex& ia = lv.indices[p];
    const MonomialIndex& ib = lv.indices[q];
    int a = ia.lambda_power + ib.lambda_power;
    if (a < -ns || a > ns) continue;
    bool in_range = true;
    sum.pattern.assign(ia.pattern.size(), 0);
    for (std::size_t i = 0; i < ia.pattern.size(); ++i) {
      int v = ia.pattern[i] + ib.pattern[i];
      if (v < -1 || v > 1) { in_range = false; break; }
      sum.pattern[i] = static_cast<std::int8_t>(v);
    }
    if (!in_range) continue;
    sum.lambda_power = a;
    const LimitClass* sc = lv.lookup(sum);
    if (!sc || sc->tag == LimitTag::Undetermined) continue;
    double expected = lv.classes[p].value * lv.classes[q].value;
    if (sc->tag != LimitTag::Finite) {
      add("P4", p, q, 1.0, false,
          "product of Finite entries classified " + to_string(sc->tag));
    } else {
      double err = std::abs(sc->value / expected - 1.0);
      if (err > config.rel_tol)
        add("P4", p, q, err, true,
            "value " + std::to_string(sc->value) + " vs product " +
                std::to_string(expected));
    }
  }
  return out;
}

}  // namespace limitval
