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

#ifndef PREFGAME_MONTECARLO_HPP_
#define PREFGAME_MONTECARLO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "prefgame/errors.hpp"
#include "prefgame/random.hpp"
#include "prefgame/ranking.hpp"

namespace prefgame {

struct EstimateRow {
  int labelers = 0;
  int responses = 0;
  std::uint64_t trials = 0;
  std::uint64_t cycle_hits = 0;
  std::uint64_t winner_hits = 0;
  double p_cycle = 0.0;
  double se_cycle = 0.0;
  double p_winner = 0.0;
  double se_winner = 0.0;
};

namespace detail {

struct TrialFlags {
  bool cycle = false;
  bool winner = false;
};

// Scratch buffers reused across trials of one thread.
struct TrialScratch {
  std::vector<std::uint64_t> scores;  // m x n, row-major by labeler
  std::vector<std::uint8_t> alive;
  std::vector<std::int32_t> stamp;
};

// Strict majority between responses i and j given integer scores.
// Returns +1 (i beats j), -1 (j beats i), 0 (tie). Sets `equal_scores` when
// any labeler holds the two responses at exactly the same score.
inline int majority(const std::uint64_t* scores, int m, int n, int i, int j,
                    bool& equal_scores) {
  int wins = 0;
  for (int l = 0; l < m; ++l) {
    const std::uint64_t a = scores[static_cast<std::size_t>(l) * n + i];
    const std::uint64_t b = scores[static_cast<std::size_t>(l) * n + j];
    wins += a > b ? 1 : 0;
    equal_scores |= a == b;
  }
  const int spread = 2 * wins - m;
  return spread > 0 ? 1 : (spread < 0 ? -1 : 0);
}

// Cycle and winner flags of the strict-majority digraph induced by one
// trial's scores.
//
// Winner: sequential champion scan plus verification, O(n m).
//
// Cycle: walk backward along "is strictly beaten by" edges. Revisiting a
// vertex inside one walk closes a directed cycle; a vertex with no strict
// in-neighbour among the alive set cannot lie on a cycle and is removed.
// Exact for any m (strict 3-cycles cannot exist for m = 4, so witnesses can
// be long and the detector must not rely on triangles). Typical cost is a
// short walk; the acyclic worst case degrades to O(n^2 m).
//
// Sets `equal_scores` and returns early when an exact score collision is
// observed; the caller resamples the trial.
inline TrialFlags evaluate_trial(const std::uint64_t* scores, int m, int n,
                                 TrialScratch& scratch, bool& equal_scores) {
  TrialFlags flags;
  equal_scores = false;

  int champion = 0;
  for (int i = 1; i < n; ++i) {
    if (majority(scores, m, n, champion, i, equal_scores) <= 0) champion = i;
  }
  flags.winner = true;
  for (int j = 0; j < n; ++j) {
    if (j != champion && majority(scores, m, n, champion, j, equal_scores) <= 0) {
      flags.winner = false;
      break;
    }
  }
  if (equal_scores) return flags;

  scratch.alive.assign(n, 1);
  scratch.stamp.assign(n, -1);
  int alive_count = n;
  int walk_id = 0;
  int start = 0;
  while (alive_count > 0) {
    while (!scratch.alive[start]) ++start;
    int current = start;
    ++walk_id;
    while (true) {
      if (scratch.stamp[current] == walk_id) {
        flags.cycle = true;
        return flags;
      }
      scratch.stamp[current] = walk_id;
      int dominator = -1;
      for (int step = 1; step < n; ++step) {
        const int u = current + step < n ? current + step : current + step - n;
        if (!scratch.alive[u]) continue;
        if (majority(scores, m, n, u, current, equal_scores) > 0) {
          dominator = u;
          break;
        }
      }
      if (equal_scores) return flags;
      if (dominator < 0) {
        // Nothing alive beats `current`: it lies on no cycle.
        scratch.alive[current] = 0;
        --alive_count;
        break;
      }
      current = dominator;
    }
  }
  return flags;
}

inline TrialFlags run_trial(int m, int n, std::uint64_t trial_key,
                            TrialScratch& scratch) {
  scratch.scores.resize(static_cast<std::size_t>(m) * n);
  for (std::uint64_t retry = 0;; ++retry) {
    SplitMix64 rng(retry == 0 ? trial_key : substream(trial_key, retry));
    for (auto& score : scratch.scores) score = rng.next();
    bool equal_scores = false;
    const TrialFlags flags =
        evaluate_trial(scratch.scores.data(), m, n, scratch, equal_scores);
    if (!equal_scores) return flags;
  }
}

}  // namespace detail

// Monte Carlo estimate of the probabilities that the strict-majority
// relation of m random rankings over n responses contains a Condorcet cycle
// and a Condorcet winner. Trial t draws from substream (seed, t), so counts
// are exact integers independent of the thread count.
inline EstimateRow estimate_cycle_and_winner(int m, int n, std::uint64_t trials,
                                             std::uint64_t seed, int threads = 1) {
  if (m < 1 || n < 2 || trials < 1) {
    throw std::invalid_argument(
        "estimate_cycle_and_winner: m >= 1, n >= 2, trials >= 1");
  }
  if (threads < 1) threads = 1;
  const int worker_count =
      static_cast<int>(std::min<std::uint64_t>(threads, trials));

  std::vector<std::uint64_t> cycle_counts(worker_count, 0);
  std::vector<std::uint64_t> winner_counts(worker_count, 0);
  auto work = [&](int worker) {
    detail::TrialScratch scratch;
    std::uint64_t cycles = 0;
    std::uint64_t winners = 0;
    for (std::uint64_t t = worker; t < trials;
         t += static_cast<std::uint64_t>(worker_count)) {
      const detail::TrialFlags flags =
          detail::run_trial(m, n, substream(seed, t), scratch);
      cycles += flags.cycle ? 1 : 0;
      winners += flags.winner ? 1 : 0;
    }
    cycle_counts[worker] = cycles;
    winner_counts[worker] = winners;
  };
  if (worker_count == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (int w = 0; w < worker_count; ++w) pool.emplace_back(work, w);
    for (auto& thread : pool) thread.join();
  }

  EstimateRow row;
  row.labelers = m;
  row.responses = n;
  row.trials = trials;
  for (int w = 0; w < worker_count; ++w) {
    row.cycle_hits += cycle_counts[w];
    row.winner_hits += winner_counts[w];
  }
  const double t = static_cast<double>(trials);
  row.p_cycle = static_cast<double>(row.cycle_hits) / t;
  row.p_winner = static_cast<double>(row.winner_hits) / t;
  row.se_cycle = std::sqrt(row.p_cycle * (1.0 - row.p_cycle) / t);
  row.se_winner = std::sqrt(row.p_winner * (1.0 - row.p_winner) / t);
  return row;
}

struct RateFit {
  int labelers = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;        // RMS residual of the fit
  double expected_slope = 0.0;  // 1 - m / ceil(m/2)
  std::vector<EstimateRow> rows;
  std::vector<int> used_rows;   // response counts that entered the fit
};

// Least-squares slope of log p_winner against log n over a grid of response
// counts. Rows with fewer than 100 winner hits are too noisy and are left
// out of the fit.
inline RateFit estimate_winner_rate(int m, const std::vector<int>& n_grid,
                                    std::uint64_t trials, std::uint64_t seed,
                                    int threads = 1) {
  if (m < 3) throw std::invalid_argument("estimate_winner_rate: m >= 3");
  if (n_grid.size() < 4) {
    throw std::invalid_argument("estimate_winner_rate: need >= 4 grid points");
  }
  for (std::size_t k = 0; k + 1 < n_grid.size(); ++k) {
    if (n_grid[k + 1] <= n_grid[k]) {
      throw std::invalid_argument("estimate_winner_rate: grid must increase");
    }
  }

  RateFit fit;
  fit.labelers = m;
  const int half_up = (m + 1) / 2;
  fit.expected_slope = 1.0 - static_cast<double>(m) / half_up;

  std::vector<int> starved;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    const EstimateRow row = estimate_cycle_and_winner(
        m, n_grid[k], trials, substream(seed, k), threads);
    fit.rows.push_back(row);
    if (row.winner_hits >= 100) {
      fit.used_rows.push_back(row.responses);
      xs.push_back(std::log(static_cast<double>(row.responses)));
      ys.push_back(std::log(row.p_winner));
    } else {
      starved.push_back(row.responses);
    }
  }
  if (xs.size() < 2) {
    std::string names;
    for (int n : starved) names += (names.empty() ? "" : ", ") + std::to_string(n);
    throw RateFitError(
        "estimate_winner_rate: fewer than 2 rows reached 100 winner hits; "
        "starved rows (by n): " + names,
        starved);
  }

  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= xs.size();
  mean_y /= ys.size();
  double covariance = 0.0;
  double variance = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    covariance += (xs[i] - mean_x) * (ys[i] - mean_y);
    variance += (xs[i] - mean_x) * (xs[i] - mean_x);
  }
  fit.slope = covariance / variance;
  fit.intercept = mean_y - fit.slope * mean_x;
  double squared_error = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    squared_error += r * r;
  }
  fit.residual = std::sqrt(squared_error / xs.size());
  return fit;
}

struct SimplexCyclicEstimate {
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double p = 0.0;
  double se = 0.0;
};

// Fraction of uniform draws on the 5-simplex whose mixture of the six
// rankings of three responses aggregates to a cyclic majority.
inline SimplexCyclicEstimate estimate_simplex_cyclic(std::uint64_t trials,
                                                     std::uint64_t seed,
                                                     int threads = 1) {
  if (trials < 1) {
    throw std::invalid_argument("estimate_simplex_cyclic: trials >= 1");
  }
  if (threads < 1) threads = 1;
  const int worker_count =
      static_cast<int>(std::min<std::uint64_t>(threads, trials));
  std::vector<std::uint64_t> counts(worker_count, 0);
  auto work = [&](int worker) {
    std::uint64_t hits = 0;
    for (std::uint64_t t = worker; t < trials;
         t += static_cast<std::uint64_t>(worker_count)) {
      SplitMix64 rng(substream(seed, t));
      hits += is_cyclic_simplex_point(sample_simplex6(rng)) ? 1 : 0;
    }
    counts[worker] = hits;
  };
  if (worker_count == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (int w = 0; w < worker_count; ++w) pool.emplace_back(work, w);
    for (auto& thread : pool) thread.join();
  }

  SimplexCyclicEstimate estimate;
  estimate.trials = trials;
  for (int w = 0; w < worker_count; ++w) estimate.hits += counts[w];
  estimate.p = static_cast<double>(estimate.hits) / static_cast<double>(trials);
  estimate.se = std::sqrt(estimate.p * (1.0 - estimate.p) /
                          static_cast<double>(trials));
  return estimate;
}

}  // namespace prefgame

#endif  // PREFGAME_MONTECARLO_HPP_
