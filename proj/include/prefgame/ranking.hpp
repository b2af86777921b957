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

#ifndef PREFGAME_RANKING_HPP_
#define PREFGAME_RANKING_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "prefgame/random.hpp"

namespace prefgame {

// Full rankings of n responses by m independent labelers. Each ranking is a
// permutation of {0,...,n-1}, best first.
struct RankingProfile {
  int labelers = 0;
  int responses = 0;
  std::vector<std::vector<int>> rankings;

  void validate() const {
    if (labelers < 1 || responses < 2) {
      throw std::invalid_argument("RankingProfile requires m >= 1 and n >= 2");
    }
    if (static_cast<int>(rankings.size()) != labelers) {
      throw std::invalid_argument("RankingProfile: ranking count != m");
    }
    std::vector<char> seen(responses);
    for (const auto& ranking : rankings) {
      if (static_cast<int>(ranking.size()) != responses) {
        throw std::invalid_argument("RankingProfile: ranking length != n");
      }
      std::fill(seen.begin(), seen.end(), 0);
      for (int y : ranking) {
        if (y < 0 || y >= responses || seen[y]) {
          throw std::invalid_argument(
              "RankingProfile: ranking is not a permutation of 0..n-1");
        }
        seen[y] = 1;
      }
    }
  }
};

// One uniform [0,1] score per labeler per response, row-major by labeler.
// Entries within a labeler's row are pairwise distinct.
struct ScoreMatrix {
  int labelers = 0;
  int responses = 0;
  std::vector<double> scores;

  double at(int labeler, int response) const {
    return scores[static_cast<std::size_t>(labeler) * responses + response];
  }
};

// m i.i.d. uniform permutations, Fisher-Yates on substream (seed, labeler).
inline RankingProfile sample_permutation_profile(int m, int n,
                                                 std::uint64_t seed) {
  if (m < 1 || n < 2) {
    throw std::invalid_argument("sample_permutation_profile: m >= 1, n >= 2");
  }
  RankingProfile profile{m, n, {}};
  profile.rankings.resize(m);
  for (int l = 0; l < m; ++l) {
    SplitMix64 rng(substream(seed, static_cast<std::uint64_t>(l)));
    auto& ranking = profile.rankings[l];
    ranking.resize(n);
    std::iota(ranking.begin(), ranking.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(i + 1)));
      std::swap(ranking[i], ranking[j]);
    }
  }
  return profile;
}

// Uniform scores, ranking by descending score. Equivalent in distribution to
// sample_permutation_profile; an exact score collision (measure zero in the
// continuous model) is resolved by resampling the colliding entry.
inline std::pair<RankingProfile, ScoreMatrix> sample_score_profile(
    int m, int n, std::uint64_t seed) {
  if (m < 1 || n < 2) {
    throw std::invalid_argument("sample_score_profile: m >= 1, n >= 2");
  }
  RankingProfile profile{m, n, {}};
  profile.rankings.resize(m);
  ScoreMatrix scores{m, n, std::vector<double>(static_cast<std::size_t>(m) * n)};
  std::vector<int> order(n);
  for (int l = 0; l < m; ++l) {
    SplitMix64 rng(substream(seed, static_cast<std::uint64_t>(l)));
    double* row = scores.scores.data() + static_cast<std::size_t>(l) * n;
    for (int i = 0; i < n; ++i) row[i] = rng.next_double();
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [row](int a, int b) { return row[a] > row[b]; });
    for (int k = 0; k + 1 < n; ++k) {
      while (row[order[k]] == row[order[k + 1]]) {
        row[order[k + 1]] = rng.next_double();
        std::sort(order.begin() + k, order.end(),
                  [row](int a, int b) { return row[a] > row[b]; });
      }
    }
    profile.rankings[l] = order;
  }
  return {std::move(profile), std::move(scores)};
}

// Mixture weights over the six rankings of three responses, indexed:
// 0: y1>y2>y3, 1: y2>y3>y1, 2: y3>y1>y2, 3: y2>y1>y3, 4: y3>y2>y1,
// 5: y1>y3>y2.
struct SimplexPoint6 {
  std::array<double, 6> alpha{};
};

// Uniform on the 5-simplex: six unit exponentials, normalized.
inline SimplexPoint6 sample_simplex6(SplitMix64& rng) {
  SimplexPoint6 point;
  double total = 0.0;
  for (double& a : point.alpha) {
    a = rng.next_exponential();
    total += a;
  }
  for (double& a : point.alpha) a /= total;
  return point;
}

inline SimplexPoint6 sample_simplex6(std::uint64_t seed) {
  SplitMix64 rng(seed);
  return sample_simplex6(rng);
}

// True iff the aggregated majority relation over the three responses is
// cyclic: the three pairwise majorities (1 over 2, 2 over 3, 3 over 1) are
// either all strict wins or all strict losses.
inline bool is_cyclic_simplex_point(const SimplexPoint6& point) {
  const auto& a = point.alpha;
  const double p23 = a[0] + a[1] + a[3];  // fraction preferring y2 over y3
  const double p31 = a[1] + a[2] + a[4];  // fraction preferring y3 over y1
  const double p12 = a[2] + a[0] + a[5];  // fraction preferring y1 over y2
  const bool forward = p23 > 0.5 && p31 > 0.5 && p12 > 0.5;
  const bool backward = p23 < 0.5 && p31 < 0.5 && p12 < 0.5;
  return forward || backward;
}

}  // namespace prefgame

#endif  // PREFGAME_RANKING_HPP_
