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

#ifndef PREFGAME_ERRORS_HPP_
#define PREFGAME_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace prefgame {

// Invalid arguments and schema violations map to CLI exit code 2; the
// runtime errors below map to exit code 3.

// An iterative fit ran out of iterations. Carries the last iterate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> last_iterate,
                   int iterations, double last_change)
      : std::runtime_error(what),
        last_iterate(std::move(last_iterate)),
        iterations(iterations),
        last_change(last_change) {}

  std::vector<double> last_iterate;
  int iterations;
  double last_change;
};

// An LP solve failed numerically or exceeded its pivot budget.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Rejection sampling exhausted its proposal budget before collecting the
// requested number of accepted samples.
class SamplingStarvationError : public std::runtime_error {
 public:
  SamplingStarvationError(const std::string& what, std::int64_t proposals,
                          std::int64_t accepted)
      : std::runtime_error(what), proposals(proposals), accepted(accepted) {}

  std::int64_t proposals;
  std::int64_t accepted;
};

// Gradient ascent diverged.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

// A rate fit had too few rows with enough positive hits. Names the starved
// rows by their response count.
class RateFitError : public std::runtime_error {
 public:
  RateFitError(const std::string& what, std::vector<int> starved_rows)
      : std::runtime_error(what), starved_rows(std::move(starved_rows)) {}

  std::vector<int> starved_rows;
};

}  // namespace prefgame

#endif  // PREFGAME_ERRORS_HPP_
