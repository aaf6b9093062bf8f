#include "limitval/game.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace limitval {

namespace {

constexpr double kProbTol = 1e-12;

std::string cell_str(int s, int i, int j) {
  std::ostringstream os;
  os << "state " << s << ", actions (" << i << "," << j << ")";
  return os.str();
}

}  // namespace

double uniform01(std::uint64_t& state) {
  // splitmix64; top 53 bits to double. Identical on every platform.
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z = z ^ (z >> 31);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

void StationaryStrategy::validate() const {
  for (std::size_t s = 0; s < rows.size(); ++s) {
    const auto& r = rows[s];
    if (r.empty())
      throw std::invalid_argument("strategy row " + std::to_string(s) + " is empty");
    double sum = 0.0;
    for (std::size_t a = 0; a < r.size(); ++a) {
      if (!(r[a] >= 0.0) || !std::isfinite(r[a]))
        throw std::invalid_argument("strategy row " + std::to_string(s) +
                                    " has negative or non-finite entry at action " +
                                    std::to_string(a));
      sum += r[a];
    }
    if (std::abs(sum - 1.0) > kProbTol)
      throw std::invalid_argument("strategy row " + std::to_string(s) +
                                  " sums to " + std::to_string(sum) + ", not 1");
  }
}

nlohmann::json StationaryStrategy::to_json() const {
  return nlohmann::json{{"rows", rows}};
}

StationaryStrategy StationaryStrategy::from_json(const nlohmann::json& j) {
  StationaryStrategy x;
  if (j.is_array())
    x.rows = j.get<std::vector<std::vector<double>>>();
  else
    x.rows = j.at("rows").get<std::vector<std::vector<double>>>();
  x.validate();
  return x;
}

Game::Game(std::vector<std::vector<std::vector<double>>> payoff,
           std::vector<std::vector<std::vector<std::vector<double>>>> transition,
           std::vector<std::string> state_names,
           std::vector<std::vector<std::string>> p1_action_names,
           std::vector<std::vector<std::string>> p2_action_names) {
  num_states_ = static_cast<int>(payoff.size());
  if (num_states_ == 0) throw std::invalid_argument("game has no states");
  if (static_cast<int>(transition.size()) != num_states_)
    throw std::invalid_argument("payoff and transition disagree on the number of states");

  na1_.resize(num_states_);
  na2_.resize(num_states_);
  cell_off_.resize(num_states_ + 1, 0);
  for (int s = 0; s < num_states_; ++s) {
    na1_[s] = static_cast<int>(payoff[s].size());
    if (na1_[s] == 0)
      throw std::invalid_argument("state " + std::to_string(s) + " has no player-1 actions");
    na2_[s] = static_cast<int>(payoff[s][0].size());
    if (na2_[s] == 0)
      throw std::invalid_argument("state " + std::to_string(s) + " has no player-2 actions");
    cell_off_[s + 1] = cell_off_[s] + static_cast<std::size_t>(na1_[s]) * na2_[s];
  }

  payoff_.resize(cell_off_[num_states_]);
  transition_.resize(cell_off_[num_states_] * num_states_);
  for (int s = 0; s < num_states_; ++s) {
    if (static_cast<int>(transition[s].size()) != na1_[s])
      throw std::invalid_argument("transition[" + std::to_string(s) +
                                  "] does not match payoff action count");
    for (int i = 0; i < na1_[s]; ++i) {
      if (static_cast<int>(payoff[s][i].size()) != na2_[s])
        throw std::invalid_argument("payoff[" + std::to_string(s) + "][" +
                                    std::to_string(i) + "] has ragged length");
      if (static_cast<int>(transition[s][i].size()) != na2_[s])
        throw std::invalid_argument("transition[" + std::to_string(s) + "][" +
                                    std::to_string(i) + "] has ragged length");
      for (int j = 0; j < na2_[s]; ++j) {
        const auto& row = transition[s][i][j];
        if (static_cast<int>(row.size()) != num_states_)
          throw std::invalid_argument("transition row at " + cell_str(s, i, j) +
                                      " has length " + std::to_string(row.size()) +
                                      ", expected " + std::to_string(num_states_));
        std::size_t cell = cell_off_[s] + static_cast<std::size_t>(i) * na2_[s] + j;
        payoff_[cell] = payoff[s][i][j];
        for (int t = 0; t < num_states_; ++t)
          transition_[cell * num_states_ + t] = row[t];
      }
    }
  }

  state_names_ = std::move(state_names);
  if (state_names_.empty()) {
    state_names_.resize(num_states_);
    for (int s = 0; s < num_states_; ++s) state_names_[s] = "s" + std::to_string(s);
  } else if (static_cast<int>(state_names_.size()) != num_states_) {
    throw std::invalid_argument("states name list has wrong length");
  }
  a1_names_ = std::move(p1_action_names);
  a2_names_ = std::move(p2_action_names);

  validate();
}

int Game::max_actions_p1() const {
  int m = 0;
  for (int v : na1_) m = std::max(m, v);
  return m;
}

int Game::max_actions_p2() const {
  int m = 0;
  for (int v : na2_) m = std::max(m, v);
  return m;
}

void Game::validate() const {
  for (int s = 0; s < num_states_; ++s) {
    for (int i = 0; i < na1_[s]; ++i) {
      for (int j = 0; j < na2_[s]; ++j) {
        double g = payoff(s, i, j);
        if (!std::isfinite(g) || g < 0.0 || g > 1.0)
          throw std::invalid_argument("payoff " + std::to_string(g) + " at " +
                                      cell_str(s, i, j) + " is outside [0,1]");
        const double* q = transition_row(s, i, j);
        double sum = 0.0;
        for (int t = 0; t < num_states_; ++t) {
          if (!std::isfinite(q[t]) || q[t] < 0.0)
            throw std::invalid_argument("transition probability at " + cell_str(s, i, j) +
                                        " -> state " + std::to_string(t) +
                                        " is negative or non-finite");
          sum += q[t];
        }
        if (std::abs(sum - 1.0) > kProbTol)
          throw std::invalid_argument("transition row at " + cell_str(s, i, j) +
                                      " sums to " + std::to_string(sum) + ", not 1");
      }
    }
  }
}

nlohmann::json Game::to_json() const {
  nlohmann::json j;
  j["states"] = state_names_;
  std::vector<std::vector<std::string>> a1 = a1_names_, a2 = a2_names_;
  if (a1.empty()) {
    a1.resize(num_states_);
    for (int s = 0; s < num_states_; ++s)
      for (int i = 0; i < na1_[s]; ++i) a1[s].push_back("a" + std::to_string(i));
  }
  if (a2.empty()) {
    a2.resize(num_states_);
    for (int s = 0; s < num_states_; ++s)
      for (int i = 0; i < na2_[s]; ++i) a2[s].push_back("b" + std::to_string(i));
  }
  j["p1_actions"] = a1;
  j["p2_actions"] = a2;

  std::vector<std::vector<std::vector<double>>> pay(num_states_);
  std::vector<std::vector<std::vector<std::vector<double>>>> tr(num_states_);
  for (int s = 0; s < num_states_; ++s) {
    pay[s].resize(na1_[s]);
    tr[s].resize(na1_[s]);
    for (int i = 0; i < na1_[s]; ++i) {
      pay[s][i].resize(na2_[s]);
      tr[s][i].resize(na2_[s]);
      for (int jj = 0; jj < na2_[s]; ++jj) {
        pay[s][i][jj] = payoff(s, i, jj);
        const double* q = transition_row(s, i, jj);
        tr[s][i][jj].assign(q, q + num_states_);
      }
    }
  }
  j["payoff"] = pay;
  j["transition"] = tr;
  return j;
}

Game Game::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("game file: top level is not an object");
  auto require = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end())
      throw std::invalid_argument(std::string("game file: missing field \"") + key + "\"");
    return *it;
  };
  std::vector<std::vector<std::vector<double>>> pay;
  std::vector<std::vector<std::vector<std::vector<double>>>> tr;
  try {
    pay = require("payoff").get<decltype(pay)>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("game file: field \"payoff\": ") + e.what());
  }
  try {
    tr = require("transition").get<decltype(tr)>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("game file: field \"transition\": ") + e.what());
  }
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> a1, a2;
  if (j.contains("states") && !j["states"].is_null())
    names = j["states"].get<std::vector<std::string>>();
  if (j.contains("p1_actions") && !j["p1_actions"].is_null())
    a1 = j["p1_actions"].get<std::vector<std::vector<std::string>>>();
  if (j.contains("p2_actions") && !j["p2_actions"].is_null())
    a2 = j["p2_actions"].get<std::vector<std::vector<std::string>>>();
  return Game(std::move(pay), std::move(tr), std::move(names), std::move(a1), std::move(a2));
}

Game Game::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open game file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

void Game::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write game file: " + path);
  out << to_json().dump(2) << "\n";
}

Game Game::random(int num_states, int actions_p1, int actions_p2, std::uint64_t seed) {
  if (num_states < 1 || actions_p1 < 1 || actions_p2 < 1)
    throw std::invalid_argument("random game sizes must be >= 1");
  std::uint64_t rng = seed * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL;
  std::vector<std::vector<std::vector<double>>> pay(num_states);
  std::vector<std::vector<std::vector<std::vector<double>>>> tr(num_states);
  for (int s = 0; s < num_states; ++s) {
    pay[s].assign(actions_p1, std::vector<double>(actions_p2));
    tr[s].assign(actions_p1,
                 std::vector<std::vector<double>>(actions_p2, std::vector<double>(num_states)));
    for (int i = 0; i < actions_p1; ++i) {
      for (int j = 0; j < actions_p2; ++j) {
        pay[s][i][j] = uniform01(rng);
        double sum = 0.0;
        for (int t = 0; t < num_states; ++t) {
          // floor keeps every row strictly positive so induced chains are
          // irreducible and row sums never degenerate
          double u = 1e-3 + 0.999 * uniform01(rng);
          tr[s][i][j][t] = u;
          sum += u;
        }
        for (int t = 0; t < num_states; ++t) tr[s][i][j][t] /= sum;
      }
    }
  }
  return Game(std::move(pay), std::move(tr));
}

StationaryStrategy Game::uniform_strategy(int player) const {
  StationaryStrategy x;
  x.rows.resize(num_states_);
  for (int s = 0; s < num_states_; ++s) {
    int n = player == 1 ? na1_[s] : na2_[s];
    x.rows[s].assign(n, 1.0 / n);
  }
  return x;
}

void Game::check_strategy(const StationaryStrategy& x, int player) const {
  if (x.num_states() != num_states_)
    throw std::invalid_argument("strategy has " + std::to_string(x.num_states()) +
                                " states, game has " + std::to_string(num_states_));
  for (int s = 0; s < num_states_; ++s) {
    int n = player == 1 ? na1_[s] : na2_[s];
    if (static_cast<int>(x.rows[s].size()) != n)
      throw std::invalid_argument("strategy row " + std::to_string(s) + " has " +
                                  std::to_string(x.rows[s].size()) + " actions, expected " +
                                  std::to_string(n));
  }
  x.validate();
}

}  // namespace limitval
