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

#ifndef PREFGAME_TOURNAMENT_HPP_
#define PREFGAME_TOURNAMENT_HPP_

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "prefgame/preference.hpp"

namespace prefgame {

// Strict-majority relation of a preference matrix: i beats j when
// p[i][j] > 1/2 (beyond the tie tolerance). A tournament has no off-diagonal
// tie.
class MajorityDigraph {
 public:
  static MajorityDigraph from_matrix(const PreferenceMatrix& matrix,
                                     double tie_tolerance = 0.0) {
    if (tie_tolerance < 0.0) {
      throw std::invalid_argument("MajorityDigraph: tie_tolerance >= 0");
    }
    MajorityDigraph graph;
    const int n = matrix.size();
    graph.n_ = n;
    graph.relation_.assign(static_cast<std::size_t>(n) * n, 0);
    graph.tournament_ = true;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double value = matrix.at(i, j);
        std::int8_t relation = 0;
        if (value > 0.5 + tie_tolerance) {
          relation = 1;
        } else if (value < 0.5 - tie_tolerance) {
          relation = -1;
        } else {
          graph.tournament_ = false;
        }
        graph.relation_[static_cast<std::size_t>(i) * n + j] = relation;
      }
    }
    return graph;
  }

  // Direct construction from a beats predicate; ties wherever neither
  // direction is asserted.
  template <typename BeatsFn>
  static MajorityDigraph from_relation(int n, BeatsFn&& beats) {
    MajorityDigraph graph;
    graph.n_ = n;
    graph.relation_.assign(static_cast<std::size_t>(n) * n, 0);
    graph.tournament_ = true;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const bool ij = beats(i, j);
        const bool ji = beats(j, i);
        if (ij && ji) {
          throw std::invalid_argument("MajorityDigraph: relation not antisymmetric");
        }
        if (!ij && !ji) graph.tournament_ = false;
        graph.relation_[static_cast<std::size_t>(i) * n + j] = ij ? 1 : (ji ? -1 : 0);
        graph.relation_[static_cast<std::size_t>(j) * n + i] = ji ? 1 : (ij ? -1 : 0);
      }
    }
    return graph;
  }

  int size() const { return n_; }
  bool is_tournament() const { return tournament_; }

  bool beats(int i, int j) const {
    return relation_[static_cast<std::size_t>(i) * n_ + j] > 0;
  }
  bool tie(int i, int j) const {
    return i != j && relation_[static_cast<std::size_t>(i) * n_ + j] == 0;
  }

  int out_degree(int i) const {
    int degree = 0;
    for (int j = 0; j < n_; ++j) degree += beats(i, j) ? 1 : 0;
    return degree;
  }

 private:
  int n_ = 0;
  std::vector<std::int8_t> relation_;
  bool tournament_ = true;
};

namespace detail {

// Depth-first search over strict edges; extracts a directed cycle when a
// back edge closes one.
inline std::optional<std::vector<int>> dfs_cycle(const MajorityDigraph& graph) {
  const int n = graph.size();
  std::vector<int> state(n, 0);  // 0 white, 1 gray, 2 black
  std::vector<int> stack;
  std::vector<int> next_child(n, 0);
  for (int root = 0; root < n; ++root) {
    if (state[root] != 0) continue;
    stack.clear();
    stack.push_back(root);
    state[root] = 1;
    next_child[root] = 0;
    while (!stack.empty()) {
      const int v = stack.back();
      bool advanced = false;
      for (int& j = next_child[v]; j < n; ++j) {
        if (j == v || !graph.beats(v, j)) continue;
        if (state[j] == 1) {
          // Back edge v -> j: the cycle is the stack segment from j to v.
          auto it = std::find(stack.begin(), stack.end(), j);
          return std::vector<int>(it, stack.end());
        }
        if (state[j] == 0) {
          state[j] = 1;
          next_child[j] = 0;
          stack.push_back(j);
          ++j;
          advanced = true;
          break;
        }
      }
      if (!advanced) {
        state[v] = 2;
        stack.pop_back();
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Witness cycle of the strict-majority relation, or nullopt when acyclic.
// On tournaments any cycle implies a 3-cycle, so a triangle scan suffices;
// tie-bearing digraphs can have longer minimal cycles and use a DFS.
inline std::optional<std::vector<int>> find_condorcet_cycle(
    const MajorityDigraph& graph) {
  const int n = graph.size();
  if (graph.is_tournament()) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
          if (graph.beats(i, j) && graph.beats(j, k) && graph.beats(k, i)) {
            return std::vector<int>{i, j, k};
          }
          if (graph.beats(i, k) && graph.beats(k, j) && graph.beats(j, i)) {
            return std::vector<int>{i, k, j};
          }
        }
      }
    }
    return std::nullopt;
  }
  return detail::dfs_cycle(graph);
}

// The unique response beating every other response strictly, if any.
// Sequential champion scan plus one verification pass.
inline std::optional<int> find_condorcet_winner(const MajorityDigraph& graph) {
  const int n = graph.size();
  if (n == 0) return std::nullopt;
  int champion = 0;
  for (int i = 1; i < n; ++i) {
    if (!graph.beats(champion, i)) champion = i;
  }
  for (int j = 0; j < n; ++j) {
    if (j != champion && !graph.beats(champion, j)) return std::nullopt;
  }
  return champion;
}

struct CycleWitness {
  std::vector<int> vertices;
};

// Rewards n-1, n-2, ..., 0 along the topological order of an acyclic
// tournament (out-degree equals rank there), or the witness cycle that rules
// a consistent reward out.
inline std::variant<RewardVector, CycleWitness> construct_reward(
    const MajorityDigraph& graph) {
  if (!graph.is_tournament()) {
    throw std::invalid_argument("construct_reward: input has majority ties");
  }
  if (auto cycle = find_condorcet_cycle(graph)) {
    return CycleWitness{std::move(*cycle)};
  }
  const int n = graph.size();
  RewardVector rewards(n);
  for (int i = 0; i < n; ++i) {
    rewards[i] = static_cast<double>(graph.out_degree(i));
  }
  return rewards;
}

// Hamiltonian path by insertion: each new vertex goes in front of the first
// path vertex it beats, or at the end.
inline std::vector<int> hamiltonian_path(const MajorityDigraph& graph) {
  if (!graph.is_tournament()) {
    throw std::invalid_argument("hamiltonian_path: input has majority ties");
  }
  const int n = graph.size();
  std::vector<int> path;
  path.reserve(n);
  for (int v = 0; v < n; ++v) {
    auto position = path.end();
    for (auto it = path.begin(); it != path.end(); ++it) {
      if (graph.beats(v, *it)) {
        position = it;
        break;
      }
    }
    path.insert(position, v);
  }
  return path;
}

// Ordered partition into Condorcet winning blocks: each block is a single
// response or carries a Hamiltonian cycle, and earlier blocks beat later
// ones pointwise.
struct Decomposition {
  std::vector<std::vector<int>> blocks;
};

namespace detail {

// First block of the decomposition restricted to `vertices`: the dominator
// closure of the top out-degree vertex, grown as a prefix of the out-degree
// order.
inline std::vector<int> leading_block(const MajorityDigraph& graph,
                                      const std::vector<int>& vertices) {
  const int k = static_cast<int>(vertices.size());
  std::vector<int> degree(k, 0);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (a != b && graph.beats(vertices[a], vertices[b])) ++degree[a];
    }
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (degree[a] != degree[b]) return degree[a] > degree[b];
    return vertices[a] < vertices[b];
  });

  int upper = 0;
  for (int i = 0; i <= upper; ++i) {
    for (int j = k - 1; j > i; --j) {
      if (graph.beats(vertices[order[j]], vertices[order[i]])) {
        upper = std::max(upper, j);
        break;
      }
    }
  }
  std::vector<int> block;
  block.reserve(upper + 1);
  for (int i = 0; i <= upper; ++i) block.push_back(vertices[order[i]]);
  std::sort(block.begin(), block.end());
  return block;
}

}  // namespace detail

// Peels leading blocks until the vertex set is exhausted. O(n^2) per block,
// O(n^3) total.
inline Decomposition winning_set_decomposition(const MajorityDigraph& graph) {
  if (!graph.is_tournament()) {
    throw std::invalid_argument(
        "winning_set_decomposition: input has majority ties");
  }
  Decomposition decomposition;
  std::vector<int> remaining(graph.size());
  std::iota(remaining.begin(), remaining.end(), 0);
  while (!remaining.empty()) {
    std::vector<int> block = detail::leading_block(graph, remaining);
    std::vector<int> rest;
    rest.reserve(remaining.size() - block.size());
    for (int v : remaining) {
      if (!std::binary_search(block.begin(), block.end(), v)) rest.push_back(v);
    }
    decomposition.blocks.push_back(std::move(block));
    remaining = std::move(rest);
  }
  return decomposition;
}

namespace detail {

// Hamiltonian cycle existence on the sub-tournament induced by `vertices`,
// by Held-Karp subset DP. Exponential; only for the brute-force oracle.
inline bool has_hamiltonian_cycle(const MajorityDigraph& graph,
                                  const std::vector<int>& vertices) {
  const int k = static_cast<int>(vertices.size());
  if (k == 1) return false;
  if (k == 2) return false;
  // reach[mask][v]: a path over exactly `mask` starting at vertex 0 ends at v.
  const std::uint32_t full = (1u << k) - 1;
  std::vector<std::uint32_t> reach(1u << k, 0);
  reach[1u] = 1u;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    if (!(mask & 1u)) continue;
    const std::uint32_t ends = reach[mask];
    if (!ends) continue;
    for (int v = 0; v < k; ++v) {
      if (!(ends & (1u << v))) continue;
      for (int w = 1; w < k; ++w) {
        if (mask & (1u << w)) continue;
        if (graph.beats(vertices[v], vertices[w])) {
          reach[mask | (1u << w)] |= (1u << w);
        }
      }
    }
  }
  const std::uint32_t final_ends = reach[full];
  for (int v = 1; v < k; ++v) {
    if ((final_ends & (1u << v)) && graph.beats(vertices[v], vertices[0])) {
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Independent oracle for the decomposition: the first block is the smallest
// out-degree prefix that dominates the rest and is a singleton or
// Hamiltonian-cyclic (checked by subset DP, no tournament theory involved).
inline Decomposition brute_force_decomposition(const MajorityDigraph& graph) {
  if (!graph.is_tournament()) {
    throw std::invalid_argument(
        "brute_force_decomposition: input has majority ties");
  }
  if (graph.size() > 12) {
    throw std::invalid_argument("brute_force_decomposition: n must be <= 12");
  }
  Decomposition decomposition;
  std::vector<int> remaining(graph.size());
  std::iota(remaining.begin(), remaining.end(), 0);
  while (!remaining.empty()) {
    const int k = static_cast<int>(remaining.size());
    std::vector<int> degree(k, 0);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        if (a != b && graph.beats(remaining[a], remaining[b])) ++degree[a];
      }
    }
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (degree[a] != degree[b]) return degree[a] > degree[b];
      return remaining[a] < remaining[b];
    });
    std::vector<int> block;
    for (int size = 1; size <= k; ++size) {
      std::vector<int> prefix;
      prefix.reserve(size);
      for (int i = 0; i < size; ++i) prefix.push_back(remaining[order[i]]);
      bool dominates = true;
      for (int i = 0; i < size && dominates; ++i) {
        for (int j = size; j < k; ++j) {
          if (!graph.beats(remaining[order[i]], remaining[order[j]])) {
            dominates = false;
            break;
          }
        }
      }
      if (!dominates) continue;
      if (size == 1 || detail::has_hamiltonian_cycle(graph, prefix)) {
        block = std::move(prefix);
        break;
      }
    }
    std::sort(block.begin(), block.end());
    std::vector<int> rest;
    for (int v : remaining) {
      if (!std::binary_search(block.begin(), block.end(), v)) rest.push_back(v);
    }
    decomposition.blocks.push_back(std::move(block));
    remaining = std::move(rest);
  }
  return decomposition;
}

}  // namespace prefgame

#endif  // PREFGAME_TOURNAMENT_HPP_
