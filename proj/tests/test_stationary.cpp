#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "limitval/stationary.hpp"
#include "test_util.hpp"

using namespace limitval;

namespace {

// Independent oracle: fixed-point iteration gamma <- lambda g + (1-lambda) Q gamma.
std::vector<double> eval_by_iteration(const InducedChain& c, double lambda,
                                      int iters = 20000) {
  std::vector<double> v(c.n, 0.0), w(c.n);
  for (int k = 0; k < iters; ++k) {
    for (int s = 0; s < c.n; ++s) {
      double acc = 0;
      for (int t = 0; t < c.n; ++t) acc += c.at(s, t) * v[t];
      w[s] = lambda * c.g_vec[s] + (1 - lambda) * acc;
    }
    v.swap(w);
  }
  return v;
}

// Independent oracle: truncated series lambda sum_{m<=M} (1-lambda)^{m-1} Q^{m-1}.
std::vector<double> occupation_by_series(const InducedChain& c, double lambda, int m_max) {
  const int n = c.n;
  std::vector<double> total(n * n, 0.0), power(n * n, 0.0), next(n * n);
  for (int i = 0; i < n; ++i) power[i * n + i] = 1.0;  // Q^0
  double w = lambda;
  for (int m = 1; m <= m_max; ++m) {
    for (int i = 0; i < n * n; ++i) total[i] += w * power[i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0;
        for (int k = 0; k < n; ++k) acc += power[i * n + k] * c.q[k * n + j];
        next[i * n + j] = acc;
      }
    power.swap(next);
    w *= 1 - lambda;
  }
  return total;
}

// Independent oracle: enumerate all pure policies of player 2.
std::vector<double> best_reply_by_enumeration(const Game& g, const StationaryStrategy& x,
                                              double lambda) {
  const int n = g.num_states();
  std::vector<int> pol(n, 0);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  for (;;) {
    PurePolicy p{pol};
    auto gamma = discounted_payoff(g, x, pure_to_mixed(g, p, 2), lambda);
    for (int s = 0; s < n; ++s) best[s] = std::min(best[s], gamma[s]);
    int s = 0;
    while (s < n && pol[s] == g.num_actions_p2(s) - 1) pol[s++] = 0;
    if (s == n) break;
    ++pol[s];
  }
  return best;
}

}  // namespace

TEST_CASE("pure strategies copy the tensors") {
  Game g = testutil::big_match();
  auto x = pure_to_mixed(g, PurePolicy{{1, 0, 0}}, 1);  // Bottom at the live state
  auto y = pure_to_mixed(g, PurePolicy{{0, 0, 0}}, 2);  // Left
  InducedChain c = induce_chain(g, x, y);
  CHECK(c.g_vec[0] == 1.0);   // g(live, B, L)
  CHECK(c.at(0, 1) == 1.0);   // absorbs into the winning state
  CHECK(c.at(1, 1) == 1.0);
}

TEST_CASE("uniform mixing on one state averages the payoff matrix") {
  Game g = Game::random(1, 2, 2, 3);
  auto x = g.uniform_strategy(1);
  auto y = g.uniform_strategy(2);
  InducedChain c = induce_chain(g, x, y);
  double mean = (g.payoff(0, 0, 0) + g.payoff(0, 0, 1) + g.payoff(0, 1, 0) +
                 g.payoff(0, 1, 1)) / 4.0;
  CHECK(c.g_vec[0] == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("induced rows stay stochastic") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Game g = Game::random(3, 2, 2, seed);
    InducedChain c = induce_chain(g, testutil::random_strategy(g, 1, seed),
                                  testutil::random_strategy(g, 2, seed + 1));
    for (int s = 0; s < 3; ++s) {
      double sum = 0;
      for (int t = 0; t < 3; ++t) sum += c.at(s, t);
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("occupation of the identity chain is the identity") {
  InducedChain c;
  c.n = 2;
  c.q = {1, 0, 0, 1};
  c.g_vec = {0.5, 0.5};
  auto t = occupation(c, 0.3);
  CHECK(t.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.at(0, 1) == doctest::Approx(0.0));
  CHECK(t.at(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("2-cycle closed form t(1,1) = 1/(2-lambda)") {
  InducedChain c;
  c.n = 2;
  c.q = {0, 1, 1, 0};
  c.g_vec = {1, 0};
  auto t = occupation(c, 0.5);
  CHECK(std::abs(t.at(0, 0) - 2.0 / 3.0) <= 1e-12);
  CHECK(std::abs(t.at(0, 0) - 1.0 / (2.0 - 0.5)) <= 1e-12);
}

TEST_CASE("occupation rows sum to one") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Game g = Game::random(1 + seed % 4, 2, 2, seed);
    InducedChain c = induce_chain(g, testutil::random_strategy(g, 1, seed),
                                  testutil::random_strategy(g, 2, seed * 3));
    auto t = occupation(c, 0.3);
    for (int s = 0; s < c.n; ++s) {
      double sum = 0;
      for (int u = 0; u < c.n; ++u) {
        CHECK(t.at(s, u) >= -1e-12);
        sum += t.at(s, u);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("occupation matches the truncated series") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Game g = Game::random(3, 2, 2, seed + 40);
    InducedChain c = induce_chain(g, testutil::random_strategy(g, 1, seed),
                                  testutil::random_strategy(g, 2, seed + 5));
    double lam = 0.4;
    int m = 30;
    auto exact = occupation(c, lam);
    auto series = occupation_by_series(c, lam, m);
    double bound = std::pow(1 - lam, m) + 1e-9;
    for (int i = 0; i < c.n * c.n; ++i)
      CHECK(std::abs(exact.t[i] - series[i]) <= bound);
  }
}

TEST_CASE("constant payoff evaluates to the constant") {
  std::vector<std::vector<std::vector<double>>> pay = {{{0.7, 0.7}}, {{0.7}}};
  std::vector<std::vector<std::vector<std::vector<double>>>> tr = {
      {{{0.5, 0.5}, {0.2, 0.8}}}, {{{1.0, 0.0}}}};
  Game g(std::move(pay), std::move(tr));
  for (double lam : {1.0, 0.5, 0.05}) {
    auto gamma = discounted_payoff(g, g.uniform_strategy(1), g.uniform_strategy(2), lam);
    CHECK(gamma[0] == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(gamma[1] == doctest::Approx(0.7).epsilon(1e-9));
  }
}

TEST_CASE("big match under (Top, Left) pays zero forever") {
  Game g = testutil::big_match();
  auto x = pure_to_mixed(g, PurePolicy{{0, 0, 0}}, 1);
  auto y = pure_to_mixed(g, PurePolicy{{0, 0, 0}}, 2);
  for (double lam : {0.5, 0.1})
    CHECK(discounted_payoff(g, x, y, lam)[0] == doctest::Approx(0.0));
}

TEST_CASE("linear-solve evaluation agrees with recursion and iteration") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Game g = Game::random(1 + seed % 3, 2, 2, seed + 7);
    auto x = testutil::random_strategy(g, 1, seed);
    auto y = testutil::random_strategy(g, 2, seed + 13);
    double lam = 0.2 + 0.6 * (seed % 5) / 5.0;
    auto gamma = discounted_payoff(g, x, y, lam);
    InducedChain c = induce_chain(g, x, y);
    // recursion residual
    for (int s = 0; s < c.n; ++s) {
      double rec = lam * c.g_vec[s];
      for (int t = 0; t < c.n; ++t) rec += (1 - lam) * c.at(s, t) * gamma[t];
      CHECK(std::abs(rec - gamma[s]) <= 1e-9);
    }
    auto iter = eval_by_iteration(c, lam);
    for (int s = 0; s < c.n; ++s) CHECK(std::abs(iter[s] - gamma[s]) <= 1e-8);
  }
}

TEST_CASE("monte carlo agrees with the linear solve") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Game g = Game::random(2, 2, 2, seed + 90);
    auto x = testutil::random_strategy(g, 1, seed);
    auto y = testutil::random_strategy(g, 2, seed + 2);
    double lam = 0.3;
    auto exact = discounted_payoff(g, x, y, lam);
    auto est = simulate_discounted(g, x, y, lam, 0, 0, 20000, seed);
    CHECK(std::abs(est.mean - exact[0]) <= 4 * est.std_error + 1e-9);
    CHECK(est.std_error > 0);
  }
}

TEST_CASE("monte carlo determinism and degenerate cases") {
  Game g = testutil::big_match();
  auto x = pure_to_mixed(g, PurePolicy{{0, 0, 0}}, 1);
  auto y = pure_to_mixed(g, PurePolicy{{0, 0, 0}}, 2);
  auto a = simulate_discounted(g, x, y, 0.5, 0, 0, 1000, 42);
  auto b = simulate_discounted(g, x, y, 0.5, 0, 0, 1000, 42);
  CHECK(a.mean == b.mean);
  CHECK(a.mean == 0.0);  // (Top, Left) pays 0 on every path
  CHECK(a.std_error == 0.0);
  CHECK_THROWS_WITH_AS(simulate_discounted(g, x, y, 0.5, 0, 5, 100, 1),
                       doctest::Contains("horizon"), std::invalid_argument);
}

TEST_CASE("dominant column is picked everywhere") {
  // player 2's action 0 gives strictly smaller payoff in every cell
  std::vector<std::vector<std::vector<double>>> pay = {
      {{0.1, 0.9}, {0.2, 0.8}}, {{0.0, 0.5}}};
  std::vector<std::vector<std::vector<std::vector<double>>>> tr = {
      {{{0.5, 0.5}, {0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5}}},
      {{{0.3, 0.7}, {0.3, 0.7}}}};
  Game g(std::move(pay), std::move(tr));
  auto [p, w] = best_reply_p2(g, g.uniform_strategy(1), 0.4);
  CHECK(p.action[0] == 0);
  CHECK(p.action[1] == 0);
}

TEST_CASE("big match optimal mix guarantees a half") {
  Game g = testutil::big_match();
  for (double lam : {0.5, 0.1, 0.01}) {
    StationaryStrategy x;
    x.rows = {{1.0 / (1 + lam), lam / (1 + lam)}, {1.0}, {1.0}};
    auto [p, w] = best_reply_p2(g, x, lam);
    CHECK(std::abs(w[0] - 0.5) <= 1e-6);
    // cross-check by enumerating both pure replies
    auto brute = best_reply_by_enumeration(g, x, lam);
    CHECK(std::abs(w[0] - brute[0]) <= 1e-9);
  }
}

TEST_CASE("policy iteration equals exhaustive enumeration") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Game g = Game::random(1 + seed % 3, 1 + seed % 2, 2, seed);
    auto x = testutil::random_strategy(g, 1, seed + 19);
    double lam = 0.1 + 0.5 * (seed % 7) / 7.0;
    auto [p, w] = best_reply_p2(g, x, lam);
    auto brute = best_reply_by_enumeration(g, x, lam);
    for (int s = 0; s < g.num_states(); ++s) CHECK(std::abs(w[s] - brute[s]) <= 1e-9);
  }
}

TEST_CASE("best reply is a lower bound against mixed replies") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Game g = Game::random(2, 2, 2, seed + 333);
    auto x = testutil::random_strategy(g, 1, seed);
    double lam = 0.25;
    auto [p, w] = best_reply_p2(g, x, lam);
    for (int k = 0; k < 100; ++k) {
      auto y = testutil::random_strategy(g, 2, seed * 1000 + k);
      auto gamma = discounted_payoff(g, x, y, lam);
      for (int s = 0; s < g.num_states(); ++s) CHECK(w[s] <= gamma[s] + 1e-8);
    }
  }
}

TEST_CASE("guarantee inequality holds everywhere") {
  // single state: Phi(lambda, w) >= lambda min_j g(x, j) + (1-lambda) w = w
  Game g1 = Game::random(1, 2, 2, 0);
  auto c1 = guarantee_inequality_check(g1, testutil::random_strategy(g1, 1, 1), 0.3);
  CHECK(c1.holds);
  CHECK(c1.worst_margin >= -1e-12);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Game g = Game::random(1 + seed % 4, 1 + seed % 3, 1 + (seed / 3) % 3, seed);
    auto x = testutil::random_strategy(g, 1, seed + 5);
    double lam = 0.05 + 0.9 * (seed % 11) / 11.0;
    auto check = guarantee_inequality_check(g, x, lam);
    CHECK(check.holds);
  }
}
