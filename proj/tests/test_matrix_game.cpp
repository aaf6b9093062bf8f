#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "limitval/game.hpp"
#include "limitval/matrix_game.hpp"
#include "limitval/numerics.hpp"

using namespace limitval;

namespace {

double floor_against_columns(const Matrix& m, const std::vector<double>& x) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m[0].size(); ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) v += x[i] * m[i][j];
    worst = std::min(worst, v);
  }
  return worst;
}

double ceiling_against_rows(const Matrix& m, const std::vector<double>& y) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.size(); ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < m[0].size(); ++j) v += y[j] * m[i][j];
    worst = std::max(worst, v);
  }
  return worst;
}

Matrix random_matrix(std::uint64_t& rng, int ni, int nj) {
  Matrix m(ni, std::vector<double>(nj));
  for (auto& row : m)
    for (double& v : row) v = uniform01(rng) * 2.0 - 1.0;
  return m;
}

void check_solution(const Matrix& m, const MatrixGameSolution& s, double tol = 1e-9) {
  CHECK(floor_against_columns(m, s.row_strategy) >= s.value - tol);
  CHECK(ceiling_against_rows(m, s.col_strategy) <= s.value + tol);
  double sx = 0, sy = 0;
  for (double v : s.row_strategy) {
    CHECK(v >= -1e-12);
    sx += v;
  }
  for (double v : s.col_strategy) {
    CHECK(v >= -1e-12);
    sy += v;
  }
  CHECK(std::abs(sx - 1.0) <= 1e-12);
  CHECK(std::abs(sy - 1.0) <= 1e-12);
}

}  // namespace

TEST_CASE("single entry") {
  auto s = solve_matrix_game({{0.7}});
  CHECK(s.value == doctest::Approx(0.7));
  CHECK(s.row_strategy[0] == 1.0);
  CHECK(s.col_strategy[0] == 1.0);
}

TEST_CASE("matching pennies is a half") {
  auto s = solve_matrix_game({{0, 1}, {1, 0}});
  CHECK(s.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.row_strategy[0] == doctest::Approx(0.5));
  CHECK(s.col_strategy[0] == doctest::Approx(0.5));
}

TEST_CASE("2x2 equalizer: value 3/2, row (1/4, 3/4)") {
  auto s = solve_matrix_game({{3, 0}, {1, 2}});
  CHECK(s.value == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(s.row_strategy[0] == doctest::Approx(0.25));
  CHECK(s.row_strategy[1] == doctest::Approx(0.75));
  check_solution({{3, 0}, {1, 2}}, s);
}

TEST_CASE("saddle points are found pure") {
  auto s = solve_matrix_game({{2, 3}, {0, 1}});  // row 0 dominates, col 0
  CHECK(s.value == doctest::Approx(2.0));
  CHECK(s.row_strategy[0] == 1.0);
  CHECK(s.col_strategy[0] == 1.0);
}

TEST_CASE("rectangular games via the LP pair") {
  Matrix m = {{1, 0, 0.4}, {0, 1, 0.4}};
  auto s = solve_matrix_game(m);
  check_solution(m, s);
  CHECK(s.value == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("guarantees hold and deviations cannot beat the value") {
  std::uint64_t rng = 7;
  for (int trial = 0; trial < 300; ++trial) {
    int ni = 1 + trial % 6, nj = 1 + (trial / 6) % 6;
    Matrix m = random_matrix(rng, ni, nj);
    auto s = solve_matrix_game(m);
    check_solution(m, s);
    CHECK(s.value >= -1.0 - 1e-12);
    CHECK(s.value <= 1.0 + 1e-12);
    for (int dev = 0; dev < 10; ++dev) {
      std::vector<double> d(ni);
      double sum = 0;
      for (double& v : d) sum += v = 0.01 + uniform01(rng);
      for (double& v : d) v /= sum;
      CHECK(floor_against_columns(m, d) <= s.value + 1e-8);
    }
  }
}

TEST_CASE("shift and scale equivariance with support invariance") {
  std::uint64_t rng = 13;
  for (int trial = 0; trial < 100; ++trial) {
    int ni = 2 + trial % 4, nj = 2 + (trial / 4) % 4;
    Matrix m = random_matrix(rng, ni, nj);
    double alpha = 0.5 + uniform01(rng) * 2.0, beta = uniform01(rng) * 4 - 2;
    Matrix m2 = m;
    for (auto& row : m2)
      for (double& v : row) v = alpha * v + beta;
    auto s1 = solve_matrix_game(m);
    auto s2 = solve_matrix_game(m2);
    CHECK(s2.value == doctest::Approx(alpha * s1.value + beta).epsilon(1e-8));
    for (int i = 0; i < ni; ++i)
      CHECK((s1.row_strategy[i] > 1e-9) == (s2.row_strategy[i] > 1e-9));
    for (int j = 0; j < nj; ++j)
      CHECK((s1.col_strategy[j] > 1e-9) == (s2.col_strategy[j] > 1e-9));
  }
}

TEST_CASE("duality gap between the two LP formulations") {
  std::uint64_t rng = 2024;
  for (int trial = 0; trial < 1000; ++trial) {
    int ni = 1 + trial % 6, nj = 1 + (trial / 6) % 6;
    Matrix m = random_matrix(rng, ni, nj);
    double lo = m[0][0];
    for (auto& row : m)
      for (double v : row) lo = std::min(lo, v);
    double shift = 1.0 - lo;

    LinearProgram row_lp;  // min sum u, M'^T u >= 1
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
    LinearProgram col_lp;  // max sum w, M' w <= 1
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
    auto rs = lp_solve(row_lp);
    auto cs = lp_solve(col_lp);
    REQUIRE(rs.status == LpStatus::Optimal);
    REQUIRE(cs.status == LpStatus::Optimal);
    double v1 = 1.0 / -rs.objective - shift;
    double v2 = 1.0 / cs.objective - shift;
    CHECK(std::abs(v1 - v2) <= 1e-9);
  }
}

TEST_CASE("dispatch agrees with the pure LP route") {
  std::uint64_t rng = 555;
  for (int trial = 0; trial < 200; ++trial) {
    Matrix m = random_matrix(rng, 1 + trial % 3, 1 + (trial / 3) % 3);
    auto fast = solve_matrix_game(m);
    auto lp = solve_matrix_game_lp(m);
    CHECK(std::abs(fast.value - lp.value) <= 1e-9);
  }
}

TEST_CASE("value-only helper matches the full solver") {
  std::uint64_t rng = 31;
  for (int trial = 0; trial < 200; ++trial) {
    int ni = 1 + trial % 4, nj = 1 + (trial / 4) % 4;
    Matrix m = random_matrix(rng, ni, nj);
    std::vector<double> flat;
    for (auto& row : m) flat.insert(flat.end(), row.begin(), row.end());
    CHECK(std::abs(matrix_game_value(flat.data(), ni, nj) -
                   solve_matrix_game(m).value) <= 1e-9);
  }
}

TEST_CASE("empty and ragged matrices are rejected") {
  CHECK_THROWS_AS(solve_matrix_game({}), std::invalid_argument);
  CHECK_THROWS_AS(solve_matrix_game({{1.0}, {1.0, 2.0}}), std::invalid_argument);
}
