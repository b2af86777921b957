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

#ifndef PREFGAME_RANDOM_HPP_
#define PREFGAME_RANDOM_HPP_

#include <cmath>
#include <cstdint>

namespace prefgame {

// Stafford mix13 finalizer. Bijective avalanche on 64 bits.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Derives an independent stream key from (seed, stream). Used everywhere a
// substream is needed: (seed, labeler), (seed, trial), (trial key, retry).
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed ^ 0x9e3779b97f4a7c15ULL) +
               mix64(stream + 0xd1b54a32d192ed03ULL));
}

// SplitMix64. Deterministic, seedable, cheap enough for tight Monte Carlo
// loops; streams never share state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, bound) by rejection.
  std::uint32_t next_below(std::uint32_t bound) {
    const std::uint64_t threshold = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
    std::uint64_t x = next();
    while (x >= threshold) x = next();
    return static_cast<std::uint32_t>(x % bound);
  }

  // Unit-rate exponential variate. 1 - U lies in (0, 1], so the log is finite.
  double next_exponential() { return -std::log(1.0 - next_double()); }

 private:
  std::uint64_t state_;
};

}  // namespace prefgame

#endif  // PREFGAME_RANDOM_HPP_
