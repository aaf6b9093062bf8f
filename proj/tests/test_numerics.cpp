#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "limitval/game.hpp"
#include "limitval/numerics.hpp"

using namespace limitval;

namespace {

LinearProgram make_lp(int nv) {
  LinearProgram lp;
  lp.num_vars = nv;
  lp.objective.assign(nv, 0.0);
  lp.lower.assign(nv, std::nullopt);
  return lp;
}

}  // namespace

TEST_CASE("identity solve returns the rhs") {
  auto x = solve_linear({{1, 0}, {0, 1}}, {3.5, -2});
  CHECK(x[0] == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(-2).epsilon(1e-12));
}

TEST_CASE("diagonal solve") {
  auto x = solve_linear({{2, 0}, {0, 4}}, {2, 8});
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("resolvent of a 2-cycle meets the residual contract") {
  double lam = 0.5;
  std::vector<std::vector<double>> a = {{1.0, -(1 - lam)}, {-(1 - lam), 1.0}};
  std::vector<double> b = {1, 1};
  auto x = solve_linear(a, b);
  for (int i = 0; i < 2; ++i) {
    double r = a[i][0] * x[0] + a[i][1] * x[1] - b[i];
    CHECK(std::abs(r) <= 1e-9 * 2);
  }
}

TEST_CASE("singular matrix raises with a condition estimate") {
  CHECK_THROWS_WITH_AS(solve_linear({{1, 2}, {2, 4}}, {1, 1}),
                       doctest::Contains("condition"), std::runtime_error);
}

TEST_CASE("lp: single bounded variable") {
  LinearProgram lp = make_lp(1);
  lp.objective = {1.0};
  lp.rows.push_back({{1.0}, Rel::Le, 3.0});
  auto sol = lp_solve(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(3.0));
  CHECK(sol.objective == doctest::Approx(3.0));
}

TEST_CASE("lp: forced contradiction yields the (1,1) certificate") {
  LinearProgram lp = make_lp(1);
  lp.rows.push_back({{1.0}, Rel::Ge, 1.0});   // x >= 1
  lp.rows.push_back({{1.0}, Rel::Le, 0.0});   // x <= 0
  auto sol = lp_solve(lp);
  REQUIRE(sol.status == LpStatus::Infeasible);
  auto ver = sol.certificate.verify(lp);
  CHECK(ver.ok);
  CHECK(ver.contradiction > 0.4);  // mu=(1,1)/scale exhibits 0 <= -1
  CHECK(sol.certificate.row_mult[0] == doctest::Approx(1.0));
  CHECK(sol.certificate.row_mult[1] == doctest::Approx(1.0));
}

TEST_CASE("lp: the exponent-style toy maximization") {
  // maximize t s.t. e - t >= 0, -e + 1 - t >= 0, e >= 0
  LinearProgram lp = make_lp(2);
  lp.objective = {0.0, 1.0};
  lp.lower[0] = 0.0;
  lp.rows.push_back({{1.0, -1.0}, Rel::Ge, 0.0});
  lp.rows.push_back({{-1.0, -1.0}, Rel::Ge, -1.0});
  auto sol = lp_solve(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sol.x[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("lp: unbounded detection") {
  LinearProgram lp = make_lp(1);
  lp.objective = {1.0};
  auto sol = lp_solve(lp);
  CHECK(sol.status == LpStatus::Unbounded);
}

TEST_CASE("lp: equality rows") {
  LinearProgram lp = make_lp(2);
  lp.objective = {1.0, 0.0};
  lp.lower = {0.0, 0.0};
  lp.rows.push_back({{1.0, 1.0}, Rel::Eq, 2.0});
  lp.rows.push_back({{1.0, -1.0}, Rel::Le, 0.5});
  auto sol = lp_solve(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(1.25));
  CHECK(sol.x[1] == doctest::Approx(0.75));
}

TEST_CASE("strong duality on random bounded instances") {
  std::uint64_t rng = 99;
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + trial % 3, m = 2 + (trial / 3) % 3;
    // primal: max c.x  s.t. A x <= b, x >= 0 with b > 0 (feasible at 0) and
    // a box row keeping it bounded
    std::vector<std::vector<double>> a(m + 1, std::vector<double>(n));
    std::vector<double> b(m + 1), c(n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) a[i][j] = uniform01(rng) * 2 - 0.5;
      b[i] = 0.5 + uniform01(rng);
    }
    for (int j = 0; j < n; ++j) a[m][j] = 1.0;
    b[m] = 5.0;
    for (int j = 0; j < n; ++j) c[j] = uniform01(rng) * 2 - 0.5;

    LinearProgram primal = make_lp(n);
    primal.objective = c;
    primal.lower.assign(n, 0.0);
    for (int i = 0; i <= m; ++i) primal.rows.push_back({a[i], Rel::Le, b[i]});
    auto ps = lp_solve(primal);
    REQUIRE(ps.status == LpStatus::Optimal);

    // dual: min b.y s.t. A^T y >= c, y >= 0  (maximize -b.y)
    LinearProgram dual = make_lp(m + 1);
    for (int i = 0; i <= m; ++i) dual.objective[i] = -b[i];
    dual.lower.assign(m + 1, 0.0);
    for (int j = 0; j < n; ++j) {
      LpRow r;
      r.coeff.resize(m + 1);
      for (int i = 0; i <= m; ++i) r.coeff[i] = a[i][j];
      r.rel = Rel::Ge;
      r.rhs = c[j];
      dual.rows.push_back(std::move(r));
    }
    auto ds = lp_solve(dual);
    REQUIRE(ds.status == LpStatus::Optimal);
    CHECK(std::abs(ps.objective - (-ds.objective)) <= 1e-8);
  }
}

TEST_CASE("every infeasible result carries a verifying certificate") {
  std::uint64_t rng = 4242;
  int infeasible_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + trial % 3;
    LinearProgram lp = make_lp(n);
    lp.lower.assign(n, 0.0);
    std::vector<double> dir(n);
    for (int j = 0; j < n; ++j) dir[j] = 0.1 + uniform01(rng);
    double mid = uniform01(rng) * 3;
    lp.rows.push_back({dir, Rel::Ge, mid + 0.5 + uniform01(rng)});
    lp.rows.push_back({dir, Rel::Le, mid});
    // decoy rows that stay feasible on their own
    for (int k = 0; k < n; ++k) {
      std::vector<double> row(n, 0.0);
      row[k] = 1.0;
      lp.rows.push_back({row, Rel::Le, 10.0});
    }
    auto sol = lp_solve(lp);
    REQUIRE(sol.status == LpStatus::Infeasible);
    ++infeasible_seen;
    auto ver = sol.certificate.verify(lp);
    CHECK(ver.ok);
    for (std::size_t i = 0; i < lp.rows.size(); ++i)
      if (lp.rows[i].rel != Rel::Eq) CHECK(sol.certificate.row_mult[i] >= -1e-8);
  }
  CHECK(infeasible_seen == 200);
}

TEST_CASE("least squares: consistent square system matches solve_linear") {
  std::vector<std::vector<double>> a = {{2, 1}, {1, 3}};
  std::vector<double> b = {3, 5};
  auto exact = solve_linear(a, b);
  auto ls = least_squares(a, b);
  CHECK(std::abs(exact[0] - ls[0]) <= 1e-9);
  CHECK(std::abs(exact[1] - ls[1]) <= 1e-9);
}

TEST_CASE("least squares: mean of two observations") {
  auto x = least_squares({{1.0}, {1.0}}, {0.0, 2.0});
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("least squares: minimum-norm on rank-deficient systems") {
  auto x = least_squares({{1.0, 1.0}}, {2.0});
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-10));
  // residual orthogonality: A^T (Ax - b) ~ 0
  double r = x[0] + x[1] - 2.0;
  CHECK(std::abs(r) <= 1e-8);
}

TEST_CASE("null space of a rank-1 matrix") {
  auto basis = null_space({{1.0, 1.0}});
  REQUIRE(basis.size() == 1);
  CHECK(std::abs(basis[0][0] + basis[0][1]) <= 1e-10);
  CHECK(null_space({{1.0, 0.0}, {0.0, 1.0}}).empty());
}
