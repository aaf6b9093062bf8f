#pragma once

#include <vector>

namespace limitval {

using Matrix = std::vector<std::vector<double>>;

struct MatrixGameSolution {
  double value = 0.0;
  std::vector<double> row_strategy;  // maximizer
  std::vector<double> col_strategy;  // minimizer
};

/// Value and optimal mixed strategies of a zero-sum matrix game (row player
/// maximizes). Exact closed forms for 1xN, Nx1, pure saddle points and 2x2;
/// otherwise the pair of dual LPs on a positively shifted matrix.
///
/// Guarantees: row_strategy achieves >= value - 1e-9 against every column,
/// col_strategy <= value + 1e-9 against every row. When optima are not
/// unique the returned vertex is the Bland-rule one; do not rely on which.
MatrixGameSolution solve_matrix_game(const Matrix& m);

/// The dual-LP route only (no closed-form dispatch); exposed so the duality
/// gap between the two formulations can be measured directly.
MatrixGameSolution solve_matrix_game_lp(const Matrix& m);

/// Value only, row-major m with ni rows and nj columns. Allocation-free for
/// saddle points and sizes up to 2x2; falls back to the LP for the rest.
double matrix_game_value(const double* m, int ni, int nj);

}  // namespace limitval
