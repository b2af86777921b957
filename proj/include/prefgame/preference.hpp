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

#ifndef PREFGAME_PREFERENCE_HPP_
#define PREFGAME_PREFERENCE_HPP_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "prefgame/ranking.hpp"

namespace prefgame {

using RewardVector = std::vector<double>;

inline constexpr double kComplementarityTolerance = 1e-9;

// Pairwise preference probabilities. at(i, j) is the probability that
// response i is preferred over response j; rows and columns complement to 1
// and the diagonal is exactly 1/2.
class PreferenceMatrix {
 public:
  explicit PreferenceMatrix(int n)
      : n_(n), p_(static_cast<std::size_t>(n) * n, 0.5) {
    if (n < 1) throw std::invalid_argument("PreferenceMatrix: n >= 1");
  }

  static PreferenceMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    PreferenceMatrix matrix(n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[i].size()) != n) {
        throw std::invalid_argument("PreferenceMatrix: rows must be n x n");
      }
      for (int j = 0; j < n; ++j) matrix.at(i, j) = rows[i][j];
    }
    matrix.validate();
    for (int i = 0; i < n; ++i) matrix.at(i, i) = 0.5;
    return matrix;
  }

  int size() const { return n_; }

  double at(int i, int j) const {
    return p_[static_cast<std::size_t>(i) * n_ + j];
  }
  double& at(int i, int j) { return p_[static_cast<std::size_t>(i) * n_ + j]; }

  void validate() const {
    for (int i = 0; i < n_; ++i) {
      if (std::abs(at(i, i) - 0.5) > kComplementarityTolerance) {
        throw std::invalid_argument("PreferenceMatrix: diagonal must be 1/2");
      }
      for (int j = 0; j < n_; ++j) {
        const double value = at(i, j);
        if (!(value >= 0.0 && value <= 1.0)) {
          throw std::invalid_argument(
              "PreferenceMatrix: entries must lie in [0, 1]");
        }
        if (std::abs(value + at(j, i) - 1.0) > kComplementarityTolerance) {
          throw std::invalid_argument(
              "PreferenceMatrix: p[i][j] + p[j][i] must equal 1 (entry " +
              std::to_string(i) + "," + std::to_string(j) + ")");
        }
      }
    }
  }

 private:
  int n_;
  std::vector<double> p_;
};

// Empirical preference matrix of a ranking profile: p[i][j] is the fraction
// of labelers ranking i above j. Counts are integers, so an even split gives
// exactly 1/2.
inline PreferenceMatrix preference_from_profile(const RankingProfile& profile) {
  profile.validate();
  const int n = profile.responses;
  const int m = profile.labelers;
  std::vector<int> wins(static_cast<std::size_t>(n) * n, 0);
  std::vector<int> position(n);
  for (const auto& ranking : profile.rankings) {
    for (int k = 0; k < n; ++k) position[ranking[k]] = k;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (position[i] < position[j]) {
          ++wins[static_cast<std::size_t>(i) * n + j];
        } else {
          ++wins[static_cast<std::size_t>(j) * n + i];
        }
      }
    }
  }
  PreferenceMatrix matrix(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      matrix.at(i, j) =
          static_cast<double>(wins[static_cast<std::size_t>(i) * n + j]) / m;
    }
  }
  return matrix;
}

// Bradley-Terry matrix: p[i][j] = exp(r_i) / (exp(r_i) + exp(r_j)), computed
// as the logistic of the reward difference.
inline PreferenceMatrix preference_from_btl(const RewardVector& rewards) {
  const int n = static_cast<int>(rewards.size());
  if (n < 1) throw std::invalid_argument("preference_from_btl: empty rewards");
  for (double r : rewards) {
    if (!std::isfinite(r)) {
      throw std::invalid_argument("preference_from_btl: rewards must be finite");
    }
  }
  PreferenceMatrix matrix(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      matrix.at(i, j) = 1.0 / (1.0 + std::exp(rewards[j] - rewards[i]));
    }
  }
  return matrix;
}

}  // namespace prefgame

#endif  // PREFGAME_PREFERENCE_HPP_
