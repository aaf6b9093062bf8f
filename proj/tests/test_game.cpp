#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "limitval/game.hpp"
#include "test_util.hpp"

using namespace limitval;

TEST_CASE("smallest legal instance") {
  Game g({{{0.5}}}, {{{{1.0}}}});
  CHECK(g.num_states() == 1);
  CHECK(g.payoff(0, 0, 0) == 0.5);
  CHECK(g.transition_row(0, 0, 0)[0] == 1.0);
}

TEST_CASE("transition row off by 0.1 is rejected with location") {
  std::vector<std::vector<std::vector<double>>> pay = {{{0.5, 0.5}}};
  std::vector<std::vector<std::vector<std::vector<double>>>> tr = {
      {{{1.0}, {0.9}}}};
  CHECK_THROWS_WITH_AS(Game(std::move(pay), std::move(tr)),
                       doctest::Contains("state 0, actions (0,1)"),
                       std::invalid_argument);
}

TEST_CASE("payoff outside [0,1] is rejected") {
  CHECK_THROWS_AS(Game({{{1.5}}}, {{{{1.0}}}}), std::invalid_argument);
  CHECK_THROWS_AS(Game({{{-0.1}}}, {{{{1.0}}}}), std::invalid_argument);
}

TEST_CASE("big match validates") {
  Game g = testutil::big_match();
  CHECK(g.num_states() == 3);
  CHECK(g.num_actions_p1(0) == 2);
  CHECK(g.num_actions_p1(1) == 1);
  CHECK(g.payoff(0, 1, 0) == 1.0);
  CHECK(g.transition_row(0, 1, 0)[1] == 1.0);
}

TEST_CASE("random game: single state has the forced transition row") {
  Game g = Game::random(1, 1, 1, 0);
  CHECK(g.transition_row(0, 0, 0)[0] == 1.0);
}

TEST_CASE("random game is deterministic in the seed") {
  Game a = Game::random(3, 2, 2, 7);
  Game b = Game::random(3, 2, 2, 7);
  CHECK(a.to_json() == b.to_json());
  Game c = Game::random(3, 2, 2, 8);
  CHECK(a.to_json() != c.to_json());
}

TEST_CASE("random game rows sum to one") {
  Game g = Game::random(2, 2, 2, 1);
  for (int s = 0; s < 2; ++s)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double* q = g.transition_row(s, i, j);
        CHECK(std::abs(q[0] + q[1] - 1.0) <= 1e-12);
      }
}

TEST_CASE("random games validate across seeds and shapes") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    int ns = 1 + seed % 4, a1 = 1 + seed % 3, a2 = 1 + (seed / 3) % 3;
    CHECK_NOTHROW(Game::random(ns, a1, a2, seed));
  }
}

TEST_CASE("json round trip reproduces the game exactly") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Game g = Game::random(1 + seed % 4, 1 + seed % 3, 1 + (seed / 2) % 3, seed);
    Game back = Game::from_json(g.to_json());
    REQUIRE(back.num_states() == g.num_states());
    for (int s = 0; s < g.num_states(); ++s)
      for (int i = 0; i < g.num_actions_p1(s); ++i)
        for (int j = 0; j < g.num_actions_p2(s); ++j) {
          CHECK(back.payoff(s, i, j) == g.payoff(s, i, j));
          for (int t = 0; t < g.num_states(); ++t)
            CHECK(back.transition_row(s, i, j)[t] == g.transition_row(s, i, j)[t]);
        }
  }
}

TEST_CASE("file round trip") {
  Game g = testutil::big_match();
  std::string path = "test_game_tmp.json";
  g.save(path);
  Game back = Game::load(path);
  CHECK(back.to_json() == g.to_json());
  std::remove(path.c_str());
}

TEST_CASE("load errors carry context") {
  std::string path = "test_game_bad.json";
  {
    std::ofstream out(path);
    out << "{\"payoff\": [[[0.5]]]}";
  }
  CHECK_THROWS_WITH_AS(Game::load(path), doctest::Contains("transition"),
                       std::invalid_argument);
  {
    std::ofstream out(path);
    out << "not json";
  }
  CHECK_THROWS_AS(Game::load(path), std::invalid_argument);
  std::remove(path.c_str());
  CHECK_THROWS_AS(Game::load("does_not_exist.json"), std::invalid_argument);
}

TEST_CASE("strategy validation") {
  Game g = testutil::big_match();
  StationaryStrategy x;
  x.rows = {{0.5, 0.5}, {1.0}, {1.0}};
  CHECK_NOTHROW(g.check_strategy(x, 1));
  x.rows[0] = {0.5, 0.4};
  CHECK_THROWS_AS(g.check_strategy(x, 1), std::invalid_argument);
  x.rows[0] = {0.5, 0.5, 0.0};
  CHECK_THROWS_AS(g.check_strategy(x, 1), std::invalid_argument);
  x.rows = {{0.25, 0.75}, {1.0}, {1.0}};
  CHECK_NOTHROW(g.check_strategy(x, 2));
}
