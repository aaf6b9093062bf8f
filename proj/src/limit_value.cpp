#include "limitval/limit_value.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>

#include "limitval/stationary.hpp"

namespace limitval {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out.empty() ? "state" : out;
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || grid[i] > 1.0)
      throw std::invalid_argument("grid lambda outside (0,1]");
    if (i > 0 && !(grid[i] < grid[i - 1]))
      throw std::invalid_argument("lambda grid must be strictly decreasing");
  }
}

}  // namespace

nlohmann::json SweepTable::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"lambda", r.lambda},
                   {"values", r.values},
                   {"x_opt", r.x_opt.rows},
                   {"y_opt", r.y_opt.rows},
                   {"residual", r.residual},
                   {"iterations", r.iterations}});
  }
  return nlohmann::json{{"rows", arr}};
}

void SweepTable::write_csv(std::ostream& os, const Game& game) const {
  os << "lambda,residual";
  for (int s = 0; s < game.num_states(); ++s) os << ",v_" << sanitize(game.state_name(s));
  os << "\n";
  for (const auto& r : rows) {
    os << fmt17(r.lambda) << "," << fmt17(r.residual);
    for (double v : r.values) os << "," << fmt17(v);
    os << "\n";
  }
}

std::vector<double> dyadic_grid(int count) {
  if (count < 1) throw std::invalid_argument("grid count must be >= 1");
  std::vector<double> g(count);
  for (int k = 1; k <= count; ++k) g[k - 1] = std::ldexp(1.0, -k);
  return g;
}

SweepTable sweep(const Game& game, const std::vector<double>& grid, double tol,
                 int jobs, bool warm_start) {
  check_grid(grid);
  if (!(tol > 0.0)) throw std::invalid_argument("sweep tolerance must be positive");
  jobs = std::max(1, jobs);

  SweepTable table;
  table.rows.resize(grid.size());
  std::vector<std::string> errors(grid.size());

  auto run_row = [&](std::size_t k) {
    try {
      const std::vector<double> empty;
      DiscountedSolution s = discounted_value(
          game, grid[k], tol,
          warm_start && k > 0 ? table.rows[k - 1].values : empty);
      table.rows[k] = {s.lambda, std::move(s.values), std::move(s.x_opt),
                       std::move(s.y_opt), s.residual, s.iterations};
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  };

  if (warm_start) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      run_row(k);
      if (!errors[k].empty()) break;  // later rows would inherit garbage
    }
  } else if (jobs == 1 || grid.size() == 1) {
    for (std::size_t k = 0; k < grid.size(); ++k) run_row(k);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        std::size_t k = next.fetch_add(1);
        if (k >= grid.size()) return;
        run_row(k);
      }
    };
    std::vector<std::thread> pool;
    int n = std::min<int>(jobs, static_cast<int>(grid.size()));
    pool.reserve(n);
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t k = 0; k < grid.size(); ++k)
    if (!errors[k].empty())
      throw std::runtime_error("sweep failed at lambda=" + std::to_string(grid[k]) +
                               ": " + errors[k]);
  return table;
}

nlohmann::json LimitReport::to_json() const {
  return nlohmann::json{{"v_star", v_star},
                        {"tail_oscillation", tail_oscillation},
                        {"converged", converged}};
}

LimitReport estimate_limit(const SweepTable& table, double osc_threshold) {
  const std::size_t n = table.rows.size();
  if (n < 6)
    throw std::invalid_argument("limit estimation needs at least 6 sweep rows, got " +
                                std::to_string(n));
  LimitReport rep;
  rep.v_star = table.rows.back().values;

  std::size_t tail = std::max<std::size_t>(2, n / 3);
  rep.tail_oscillation = 0.0;
  for (std::size_t s = 0; s < rep.v_star.size(); ++s) {
    double lo = table.rows[n - tail].values[s], hi = lo;
    for (std::size_t k = n - tail; k < n; ++k) {
      lo = std::min(lo, table.rows[k].values[s]);
      hi = std::max(hi, table.rows[k].values[s]);
    }
    rep.tail_oscillation = std::max(rep.tail_oscillation, hi - lo);
  }
  rep.converged = rep.tail_oscillation <= osc_threshold;
  return rep;
}

AsymptoticFitResult fit_asymptotic_strategy(const Game& game, const SweepTable& table,
                                            const EstimateConfig& est,
                                            const FitOptions& fit) {
  StrategyShape shape = StrategyShape::for_p1(game);
  std::vector<MonomialIndex> indices;
  try {
    indices = enumerate_monomials(shape);
  } catch (const std::invalid_argument&) {
    indices = enumerate_monomials_restricted(shape, 4);
  }

  std::vector<SamplePoint> samples;
  samples.reserve(table.rows.size());
  for (const auto& r : table.rows) samples.push_back({r.lambda, r.x_opt});

  AsymptoticFitResult out;
  for (int round = 0;; ++round) {
    out.estimated = estimate_limit_vector(samples, shape, indices, est);
    std::size_t undetermined = 0;
    for (const auto& c : out.estimated.classes)
      if (c.tag == LimitTag::Undetermined) ++undetermined;
    if (undetermined == 0) break;
    if (round >= 2)
      throw std::runtime_error(
          std::to_string(undetermined) +
          " monomial indices stayed undetermined after subsequence retries; "
          "deepen the lambda grid");
    // mimic the subsequence extraction: keep every second row
    std::vector<SamplePoint> thinned;
    for (std::size_t k = 0; k < samples.size(); k += 2) thinned.push_back(samples[k]);
    if (static_cast<int>(thinned.size()) < est.min_points)
      throw std::runtime_error(
          "cannot extract a subsequence: too few rows left to re-estimate; "
          "deepen the lambda grid");
    samples = std::move(thinned);
    out.subsample_rounds = round + 1;
  }

  out.fit = fit_canonical(out.estimated, fit);
  return out;
}

nlohmann::json OptimalityCertificate::to_json() const {
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows) {
    rs.push_back({{"lambda", r.lambda},
                  {"worst_margin", r.worst_margin},
                  {"worst_state", r.worst_state},
                  {"pass", r.pass},
                  {"guarantee", r.guarantee},
                  {"margin", r.margin}});
  }
  nlohmann::json j{{"epsilon", epsilon}, {"rows", rs}};
  if (lambda0)
    j["lambda0"] = *lambda0;
  else
    j["lambda0"] = nullptr;
  return j;
}

void OptimalityCertificate::write_csv(std::ostream& os, const Game& game) const {
  os << "lambda,worst_margin";
  for (int s = 0; s < game.num_states(); ++s)
    os << ",margin_" << sanitize(game.state_name(s));
  os << "\n";
  for (const auto& r : rows) {
    os << fmt17(r.lambda) << "," << fmt17(r.worst_margin);
    for (double m : r.margin) os << "," << fmt17(m);
    os << "\n";
  }
}

OptimalityCertificate check_asymptotic_optimality(const Game& game,
                                                  const CanonicalStrategy& xc,
                                                  const std::vector<double>& v_star,
                                                  double epsilon,
                                                  const std::vector<double>& grid) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be strictly positive");
  check_grid(grid);
  if (static_cast<int>(v_star.size()) != game.num_states())
    throw std::invalid_argument("v_star length does not match the game");
  if (!(StrategyShape::for_p1(game) == xc.shape))
    throw std::invalid_argument("canonical strategy shape does not match the game");
  xc.validate();

  OptimalityCertificate cert;
  cert.epsilon = epsilon;
  cert.rows.reserve(grid.size());
  for (double lambda : grid) {
    OptimalityRow row;
    row.lambda = lambda;
    auto [policy, w] = best_reply_p2(game, instantiate(xc, lambda), lambda);
    row.guarantee = std::move(w);
    row.margin.resize(game.num_states());
    row.worst_margin = std::numeric_limits<double>::infinity();
    for (int s = 0; s < game.num_states(); ++s) {
      row.margin[s] = row.guarantee[s] - (v_star[s] - epsilon);
      if (row.margin[s] < row.worst_margin) {
        row.worst_margin = row.margin[s];
        row.worst_state = s;
      }
    }
    row.pass = row.worst_margin >= 0.0;
    cert.rows.push_back(std::move(row));
  }

  // last failing row, scanning toward lambda -> 0
  std::size_t last_fail = cert.rows.size();
  for (std::size_t k = 0; k < cert.rows.size(); ++k)
    if (!cert.rows[k].pass) last_fail = k;
  if (last_fail == cert.rows.size())
    cert.lambda0 = cert.rows.front().lambda;  // everything passes
  else if (last_fail + 1 < cert.rows.size())
    cert.lambda0 = cert.rows[last_fail].lambda;  // all strictly below this pass
  else
    cert.lambda0 = std::nullopt;  // the deepest grid point still fails
  return cert;
}

}  // namespace limitval
