// Copyright 2025 The Prefgame Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PREFGAME_NASH_HPP_
#define PREFGAME_NASH_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "prefgame/errors.hpp"
#include "prefgame/preference.hpp"

namespace prefgame {

// Probability vector over responses. Construction clamps negative dust and
// checks normalization.
struct MixedStrategy {
  std::vector<double> weights;

  MixedStrategy() = default;
  explicit MixedStrategy(std::vector<double> w) : weights(std::move(w)) {
    double total = 0.0;
    for (double& value : weights) {
      if (value < -1e-12) {
        throw std::invalid_argument("MixedStrategy: negative weight");
      }
      value = std::max(value, 0.0);
      total += value;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("MixedStrategy: weights must sum to 1");
    }
  }

  static MixedStrategy pure(int n, int index) {
    std::vector<double> w(n, 0.0);
    w[index] = 1.0;
    return MixedStrategy(std::move(w));
  }

  static MixedStrategy uniform(int n) {
    return MixedStrategy(std::vector<double>(n, 1.0 / n));
  }

  int size() const { return static_cast<int>(weights.size()); }
};

struct NashSolution {
  MixedStrategy strategy;
  double value = 0.0;      // game value; 1/2 for these symmetric games
  std::vector<int> support;
  std::string method;
  double residual = 0.0;   // 1/2 - min_j (pi^T p)_j
};

// P(pi beats pi'): the bilinear form pi^T p pi'.
inline double preference_of_strategies(const PreferenceMatrix& matrix,
                                       const MixedStrategy& pi,
                                       const MixedStrategy& opponent) {
  const int n = matrix.size();
  if (pi.size() != n || opponent.size() != n) {
    throw std::invalid_argument("preference_of_strategies: dimension mismatch");
  }
  double value = 0.0;
  for (int i = 0; i < n; ++i) {
    if (pi.weights[i] == 0.0) continue;
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += matrix.at(i, j) * opponent.weights[j];
    value += pi.weights[i] * row;
  }
  return value;
}

namespace detail {

// Dense two-phase primal simplex for max c^T x s.t. A x = b, x >= 0, with
// Bland's rule. Sized for the small games this library solves.
struct SimplexProgram {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;  // row-major rows x cols
  std::vector<double> b;
  std::vector<double> c;
};

inline std::vector<double> simplex_solve(SimplexProgram program) {
  const int m = program.rows;
  const int n = program.cols;
  for (int r = 0; r < m; ++r) {
    if (program.b[r] < 0.0) {
      program.b[r] = -program.b[r];
      for (int j = 0; j < n; ++j) {
        program.a[static_cast<std::size_t>(r) * n + j] =
            -program.a[static_cast<std::size_t>(r) * n + j];
      }
    }
  }

  // Tableau with one artificial variable per row; phase 1 drives them out.
  const int total = n + m;
  const int width = total + 1;
  std::vector<double> tableau(static_cast<std::size_t>(m + 1) * width, 0.0);
  std::vector<int> basis(m);
  auto cell = [&](int r, int j) -> double& {
    return tableau[static_cast<std::size_t>(r) * width + j];
  };
  for (int r = 0; r < m; ++r) {
    for (int j = 0; j < n; ++j) cell(r, j) = program.a[static_cast<std::size_t>(r) * n + j];
    cell(r, n + r) = 1.0;
    cell(r, total) = program.b[r];
    basis[r] = n + r;
  }
  // Phase 1 objective row: minimize sum of artificials, expressed over the
  // current basis.
  for (int j = 0; j <= total; ++j) {
    double sum = 0.0;
    for (int r = 0; r < m; ++r) sum += cell(r, j);
    cell(m, j) = -sum;
  }
  for (int r = 0; r < m; ++r) cell(m, n + r) = 0.0;

  const double eps = 1e-9;
  auto pivot = [&](int row, int col) {
    const double inv = 1.0 / cell(row, col);
    for (int j = 0; j <= total; ++j) cell(row, j) *= inv;
    cell(row, col) = 1.0;
    for (int r = 0; r <= m; ++r) {
      if (r == row) continue;
      const double factor = cell(r, col);
      if (factor == 0.0) continue;
      for (int j = 0; j <= total; ++j) cell(r, j) -= factor * cell(row, j);
      cell(r, col) = 0.0;
    }
    basis[row] = col;
  };

  auto run_phase = [&](int allowed_cols) {
    for (int iteration = 0; iteration < 20000; ++iteration) {
      int entering = -1;  // Bland: smallest index with negative reduced cost
      for (int j = 0; j < allowed_cols; ++j) {
        if (cell(m, j) < -eps) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return;
      int leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        const double coefficient = cell(r, entering);
        if (coefficient > eps) {
          const double ratio = cell(r, total) / coefficient;
          if (ratio < best_ratio - eps ||
              (ratio < best_ratio + eps &&
               (leaving < 0 || basis[r] < basis[leaving]))) {
            best_ratio = ratio;
            leaving = r;
          }
        }
      }
      if (leaving < 0) {
        // A ray with essentially zero reduced cost (the v+/v- split owns
        // one) cannot improve the objective; the tableau is optimal.
        if (cell(m, entering) > -1e-7) return;
        throw SolverError("simplex: unbounded program");
      }
      pivot(leaving, entering);
    }
    throw SolverError("simplex: pivot budget exhausted");
  };

  run_phase(total);  // phase 1 may pivot among artificials too
  if (cell(m, total) < -1e-7) {
    throw SolverError("simplex: program infeasible");
  }
  // Kick remaining artificials out of the basis where possible.
  for (int r = 0; r < m; ++r) {
    if (basis[r] < n) continue;
    int replacement = -1;
    for (int j = 0; j < n; ++j) {
      if (std::abs(cell(r, j)) > 1e-9) {
        replacement = j;
        break;
      }
    }
    if (replacement >= 0) pivot(r, replacement);
  }

  // Phase 2 objective.
  for (int j = 0; j <= total; ++j) cell(m, j) = 0.0;
  for (int j = 0; j < n; ++j) cell(m, j) = -program.c[j];
  for (int r = 0; r < m; ++r) {
    if (basis[r] >= n) continue;
    const double factor = cell(m, basis[r]);
    if (factor == 0.0) continue;
    for (int j = 0; j <= total; ++j) cell(m, j) -= factor * cell(r, j);
  }
  run_phase(n);

  std::vector<double> solution(n, 0.0);
  for (int r = 0; r < m; ++r) {
    if (basis[r] < n) solution[basis[r]] = cell(r, total);
  }
  return solution;
}

}  // namespace detail

// Maximin LP for the symmetric game: maximize v subject to
// sum_i pi_i (p[i][j] - 1/2) >= v for every column j, pi on the simplex.
// The shift keeps the tableau centered; v is split into v+ - v-.
inline NashSolution solve_nash_lp(const PreferenceMatrix& matrix,
                                  double tolerance = 1e-9) {
  const int n = matrix.size();
  detail::SimplexProgram program;
  // Columns: pi_0..pi_{n-1}, v+, v-, slack_0..slack_{n-1}.
  program.rows = n + 1;
  program.cols = 2 * n + 2;
  program.a.assign(static_cast<std::size_t>(program.rows) * program.cols, 0.0);
  program.b.assign(program.rows, 0.0);
  program.c.assign(program.cols, 0.0);
  auto coefficient = [&](int r, int j) -> double& {
    return program.a[static_cast<std::size_t>(r) * program.cols + j];
  };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) coefficient(j, i) = matrix.at(i, j) - 0.5;
    coefficient(j, n) = -1.0;           // v+
    coefficient(j, n + 1) = 1.0;        // v-
    coefficient(j, n + 2 + j) = -1.0;   // surplus
    program.b[j] = 0.0;
  }
  for (int i = 0; i < n; ++i) coefficient(n, i) = 1.0;
  program.b[n] = 1.0;
  program.c[n] = 1.0;
  program.c[n + 1] = -1.0;

  std::vector<double> solution = detail::simplex_solve(std::move(program));

  std::vector<double> weights(solution.begin(), solution.begin() + n);
  double total = 0.0;
  for (double& w : weights) {
    if (w < 1e-9) w = 0.0;  // support cleanup before renormalization
    total += w;
  }
  if (total <= 0.0) throw SolverError("solve_nash_lp: empty strategy");
  for (double& w : weights) w /= total;

  NashSolution result;
  result.strategy = MixedStrategy(weights);
  double worst_column = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    double column = 0.0;
    for (int i = 0; i < n; ++i) column += weights[i] * matrix.at(i, j);
    worst_column = std::min(worst_column, column);
  }
  result.value = worst_column;
  result.residual = 0.5 - worst_column;
  result.method = "lp-simplex";
  for (int i = 0; i < n; ++i) {
    if (weights[i] > 0.0) result.support.push_back(i);
  }
  if (result.residual > tolerance) {
    throw SolverError("solve_nash_lp: residual " +
                      std::to_string(result.residual) +
                      " exceeds tolerance " + std::to_string(tolerance));
  }
  return result;
}

// Exhaustive support enumeration for small games. Solves the indifference
// system on every candidate support and keeps verified equilibria; the
// returned list holds every distinct equilibrium found (more than one entry
// means the equilibrium is not unique).
inline std::vector<NashSolution> solve_nash_support_enumeration(
    const PreferenceMatrix& matrix) {
  const int n = matrix.size();
  if (n > 10) {
    throw std::invalid_argument("solve_nash_support_enumeration: n must be <= 10");
  }
  const double feasibility_tolerance = 1e-8;
  std::vector<NashSolution> equilibria;

  std::vector<int> support;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    support.clear();
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) support.push_back(i);
    }
    const int k = static_cast<int>(support.size());

    // Square system: indifference on all support columns but the first,
    // plus normalization. The skipped column is implied by skew symmetry.
    std::vector<double> system(static_cast<std::size_t>(k) * k, 0.0);
    std::vector<double> rhs(k, 0.0);
    for (int row = 0; row + 1 < k; ++row) {
      const int j = support[row + 1];
      for (int col = 0; col < k; ++col) {
        system[static_cast<std::size_t>(row) * k + col] =
            matrix.at(support[col], j) - 0.5;
      }
    }
    for (int col = 0; col < k; ++col) {
      system[static_cast<std::size_t>(k - 1) * k + col] = 1.0;
    }
    rhs[k - 1] = 1.0;

    // Gaussian elimination with partial pivoting.
    bool singular = false;
    std::vector<int> permutation(k);
    std::iota(permutation.begin(), permutation.end(), 0);
    for (int col = 0; col < k && !singular; ++col) {
      int best = col;
      for (int row = col + 1; row < k; ++row) {
        if (std::abs(system[static_cast<std::size_t>(row) * k + col]) >
            std::abs(system[static_cast<std::size_t>(best) * k + col])) {
          best = row;
        }
      }
      if (std::abs(system[static_cast<std::size_t>(best) * k + col]) < 1e-12) {
        singular = true;
        break;
      }
      if (best != col) {
        for (int j = 0; j < k; ++j) {
          std::swap(system[static_cast<std::size_t>(best) * k + j],
                    system[static_cast<std::size_t>(col) * k + j]);
        }
        std::swap(rhs[best], rhs[col]);
      }
      for (int row = col + 1; row < k; ++row) {
        const double factor = system[static_cast<std::size_t>(row) * k + col] /
                              system[static_cast<std::size_t>(col) * k + col];
        if (factor == 0.0) continue;
        for (int j = col; j < k; ++j) {
          system[static_cast<std::size_t>(row) * k + j] -=
              factor * system[static_cast<std::size_t>(col) * k + j];
        }
        rhs[row] -= factor * rhs[col];
      }
    }

    std::vector<double> candidate(k, 0.0);
    if (!singular) {
      for (int row = k - 1; row >= 0; --row) {
        double value = rhs[row];
        for (int j = row + 1; j < k; ++j) {
          value -= system[static_cast<std::size_t>(row) * k + j] * candidate[j];
        }
        candidate[row] = value / system[static_cast<std::size_t>(row) * k + row];
      }
    } else if (k >= 2) {
      // Degenerate system (e.g. the constant game): fall back to the uniform
      // candidate on this support and let verification decide.
      std::fill(candidate.begin(), candidate.end(), 1.0 / k);
    } else {
      candidate[0] = 1.0;
    }

    // Verification: strictly positive on the support, indifferent on the
    // support, no profitable column off the support.
    bool feasible = true;
    for (double w : candidate) {
      if (!(w > 1e-7)) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    std::vector<double> weights(n, 0.0);
    for (int i = 0; i < k; ++i) weights[support[i]] = candidate[i];
    for (int j = 0; j < n && feasible; ++j) {
      double column = 0.0;
      for (int i = 0; i < n; ++i) column += weights[i] * matrix.at(i, j);
      const bool on_support = (mask & (1u << j)) != 0;
      if (on_support && std::abs(column - 0.5) > feasibility_tolerance) {
        feasible = false;
      }
      if (!on_support && column < 0.5 - feasibility_tolerance) {
        feasible = false;
      }
    }
    if (!feasible) continue;

    bool duplicate = false;
    for (const NashSolution& existing : equilibria) {
      double distance = 0.0;
      for (int i = 0; i < n; ++i) {
        distance = std::max(distance,
                            std::abs(existing.strategy.weights[i] - weights[i]));
      }
      if (distance < 1e-7) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;

    NashSolution solution;
    solution.strategy = MixedStrategy(weights);
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      double column = 0.0;
      for (int i = 0; i < n; ++i) column += weights[i] * matrix.at(i, j);
      worst = std::min(worst, column);
    }
    solution.value = worst;
    solution.residual = 0.5 - worst;
    solution.method = "support-enumeration";
    solution.support = support;
    equilibria.push_back(std::move(solution));
  }
  return equilibria;
}

struct EquilibriumCheck {
  bool passed = false;
  int best_response = -1;
  double gain = 0.0;  // max_y P(y beats pi) - 1/2
};

// No pure deviation may beat the candidate strategy by more than tolerance.
inline EquilibriumCheck verify_equilibrium(const PreferenceMatrix& matrix,
                                           const MixedStrategy& pi,
                                           double tolerance = 1e-9) {
  const int n = matrix.size();
  if (pi.size() != n) {
    throw std::invalid_argument("verify_equilibrium: dimension mismatch");
  }
  EquilibriumCheck check;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += matrix.at(i, j) * pi.weights[j];
    if (row > best) {
      best = row;
      check.best_response = i;
    }
  }
  check.gain = best - 0.5;
  check.passed = check.gain <= tolerance;
  return check;
}

// Exact maximizer of the KL-regularized expected reward for one prompt:
// pi proportional to pi_ref * exp(r / tau).
inline MixedStrategy rlhf_optimal_policy(const RewardVector& rewards,
                                         const MixedStrategy& reference,
                                         double tau) {
  if (tau <= 0.0) throw std::invalid_argument("rlhf_optimal_policy: tau > 0");
  const int n = static_cast<int>(rewards.size());
  if (reference.size() != n) {
    throw std::invalid_argument("rlhf_optimal_policy: dimension mismatch");
  }
  std::vector<double> log_weights(n);
  double max_log = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    log_weights[i] = std::log(reference.weights[i]) + rewards[i] / tau;
    max_log = std::max(max_log, log_weights[i]);
  }
  std::vector<double> weights(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    weights[i] = std::exp(log_weights[i] - max_log);
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  return MixedStrategy(std::move(weights));
}

}  // namespace prefgame

#endif  // PREFGAME_NASH_HPP_
