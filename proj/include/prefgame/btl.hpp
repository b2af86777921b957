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

#ifndef PREFGAME_BTL_HPP_
#define PREFGAME_BTL_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "prefgame/errors.hpp"
#include "prefgame/preference.hpp"

namespace prefgame {

struct BtlFit {
  RewardVector rewards;   // mean zero
  int iterations = 0;
  double last_change = 0.0;
  bool degenerate = false;
};

// Maximum-likelihood Bradley-Terry rewards for the pairwise outcomes implied
// by a ranking profile, via the minorization-maximization scheme of Hunter
// (2004), "MM algorithms for generalized Bradley-Terry models".
// Every labeler compares every pair, so the comparison counts are n_ij = m.
// A response that wins all of its comparisons or none of them pushes the
// unpenalized MLE to infinity; such profiles get a small pseudo-count on
// every ordered pair and the fit is flagged degenerate.
inline BtlFit fit_btl_mle(const RankingProfile& profile, int max_iterations = 1000,
                          double tolerance = 1e-8) {
  profile.validate();
  const int n = profile.responses;
  const int m = profile.labelers;

  std::vector<double> wins(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<int> position(n);
  for (const auto& ranking : profile.rankings) {
    for (int k = 0; k < n; ++k) position[ranking[k]] = k;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (position[i] < position[j]) {
          wins[static_cast<std::size_t>(i) * n + j] += 1.0;
        } else {
          wins[static_cast<std::size_t>(j) * n + i] += 1.0;
        }
      }
    }
  }

  const double total_per_response = static_cast<double>(m) * (n - 1);
  bool degenerate = false;
  for (int i = 0; i < n; ++i) {
    double won = 0.0;
    for (int j = 0; j < n; ++j) won += wins[static_cast<std::size_t>(i) * n + j];
    if (won == 0.0 || won == total_per_response) degenerate = true;
  }
  if (degenerate) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) wins[static_cast<std::size_t>(i) * n + j] += 0.1;
      }
    }
  }

  std::vector<double> total_wins(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      total_wins[i] += wins[static_cast<std::size_t>(i) * n + j];
    }
  }

  auto normalize_geometric = [n](std::vector<double>& gamma) {
    double log_mean = 0.0;
    for (double g : gamma) log_mean += std::log(g);
    log_mean /= n;
    const double scale = std::exp(-log_mean);
    for (double& g : gamma) g *= scale;
  };

  std::vector<double> gamma(n, 1.0);
  std::vector<double> next(n, 0.0);
  double change = 0.0;
  for (int iteration = 1; iteration <= max_iterations; ++iteration) {
    for (int i = 0; i < n; ++i) {
      double denominator = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double n_ij = wins[static_cast<std::size_t>(i) * n + j] +
                            wins[static_cast<std::size_t>(j) * n + i];
        denominator += n_ij / (gamma[i] + gamma[j]);
      }
      next[i] = total_wins[i] / denominator;
    }
    normalize_geometric(next);
    change = 0.0;
    for (int i = 0; i < n; ++i) {
      change = std::max(change, std::abs(std::log(next[i]) - std::log(gamma[i])));
    }
    gamma.swap(next);
    if (change < tolerance) {
      RewardVector rewards(n);
      for (int i = 0; i < n; ++i) rewards[i] = std::log(gamma[i]);
      return BtlFit{std::move(rewards), iteration, change, degenerate};
    }
  }

  RewardVector last(n);
  for (int i = 0; i < n; ++i) last[i] = std::log(gamma[i]);
  throw ConvergenceError("fit_btl_mle: no convergence after " +
                             std::to_string(max_iterations) + " iterations",
                         std::move(last), max_iterations, change);
}

}  // namespace prefgame

#endif  // PREFGAME_BTL_HPP_
