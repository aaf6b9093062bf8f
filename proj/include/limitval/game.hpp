#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace limitval {

/// Mixed action per state for one player. rows[s][a] is the probability of
/// action a in state s; each row must be a probability vector.
struct StationaryStrategy {
  std::vector<std::vector<double>> rows;

  int num_states() const { return static_cast<int>(rows.size()); }

  /// Throws std::invalid_argument if some row is not a probability vector
  /// (nonnegative, sums to 1 within 1e-12).
  void validate() const;

  nlohmann::json to_json() const;
  static StationaryStrategy from_json(const nlohmann::json& j);
};

/// One action index per state (player 2's pure stationary best replies).
struct PurePolicy {
  std::vector<int> action;
};

/// A finite two-person zero-sum discounted stochastic game:
/// states, per-state action sets for both players, stage payoffs g in [0,1]
/// (player 1 maximizes) and transition rows q(.|s,i,j).
///
/// Immutable after construction; safe to share across threads.
class Game {
 public:
  Game() = default;

  /// payoff[s][i][j], transition[s][i][j][s']. Validates on construction.
  Game(std::vector<std::vector<std::vector<double>>> payoff,
       std::vector<std::vector<std::vector<std::vector<double>>>> transition,
       std::vector<std::string> state_names = {},
       std::vector<std::vector<std::string>> p1_action_names = {},
       std::vector<std::vector<std::string>> p2_action_names = {});

  int num_states() const { return num_states_; }
  int num_actions_p1(int s) const { return na1_[s]; }
  int num_actions_p2(int s) const { return na2_[s]; }
  int max_actions_p1() const;
  int max_actions_p2() const;

  double payoff(int s, int i, int j) const {
    return payoff_[cell_off_[s] + i * na2_[s] + j];
  }
  /// Pointer to the |states|-long probability row q(.|s,i,j).
  const double* transition_row(int s, int i, int j) const {
    return transition_.data() +
           (cell_off_[s] + i * na2_[s] + j) * static_cast<std::size_t>(num_states_);
  }

  /// Contiguous per-state blocks, cell index i*|J|+j (hot loops).
  const double* payoff_cells(int s) const { return payoff_.data() + cell_off_[s]; }
  const double* transition_cells(int s) const {
    return transition_.data() + cell_off_[s] * static_cast<std::size_t>(num_states_);
  }

  const std::string& state_name(int s) const { return state_names_[s]; }

  /// Checks payoff range, transition row sums (1e-12 absolute) and shape
  /// consistency; throws std::invalid_argument naming the first violation.
  void validate() const;

  nlohmann::json to_json() const;
  static Game from_json(const nlohmann::json& j);
  static Game load(const std::string& path);
  void save(const std::string& path) const;

  /// Seeded generator: payoffs uniform on [0,1], transition rows drawn as
  /// normalized positive uniforms. Deterministic in (sizes, seed).
  static Game random(int num_states, int actions_p1, int actions_p2,
                     std::uint64_t seed);

  /// Uniform strategy for one player (player 1 or 2).
  StationaryStrategy uniform_strategy(int player) const;

  /// Checks a strategy's shape against this game for the given player.
  void check_strategy(const StationaryStrategy& x, int player) const;

 private:
  int num_states_ = 0;
  std::vector<int> na1_, na2_;
  std::vector<std::size_t> cell_off_;  // start of state s in the (i,j) cell space
  std::vector<double> payoff_;         // [cell]
  std::vector<double> transition_;     // [cell][s']
  std::vector<std::string> state_names_;
  std::vector<std::vector<std::string>> a1_names_, a2_names_;
};

/// Deterministic uniform double in [0,1) from a 64-bit RNG state; used by all
/// seeded generators so outputs are identical across platforms.
double uniform01(std::uint64_t& state);

}  // namespace limitval
