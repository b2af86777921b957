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

#ifndef PREFGAME_IO_HPP_
#define PREFGAME_IO_HPP_

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "prefgame/montecarlo.hpp"
#include "prefgame/nlhf.hpp"
#include "prefgame/preference.hpp"
#include "prefgame/ranking.hpp"
#include "prefgame/version.hpp"

namespace prefgame {

using json = nlohmann::json;

// Shortest round-trip decimal form, '.' separator, locale independent.
inline std::string format_double(double value) {
  char buffer[64];
  auto [end, errc] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

// Every output embeds this: version, seed, and the algorithmic parameters of
// the run (never the thread count, which must not affect bytes).
inline json make_meta(std::uint64_t seed, json parameters) {
  return json{{"version", kVersion},
              {"seed", seed},
              {"parameters", std::move(parameters)}};
}

inline json profile_to_json(const RankingProfile& profile) {
  return json{{"m", profile.labelers},
              {"n", profile.responses},
              {"rankings", profile.rankings}};
}

inline RankingProfile profile_from_json(const json& j) {
  if (!j.is_object() || !j.contains("m") || !j.contains("n") ||
      !j.contains("rankings")) {
    throw std::invalid_argument(
        "profile schema: expected {\"m\", \"n\", \"rankings\"}");
  }
  RankingProfile profile;
  profile.labelers = j.at("m").get<int>();
  profile.responses = j.at("n").get<int>();
  profile.rankings = j.at("rankings").get<std::vector<std::vector<int>>>();
  profile.validate();
  return profile;
}

inline json matrix_to_json(const PreferenceMatrix& matrix) {
  const int n = matrix.size();
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) rows[i][j] = matrix.at(i, j);
  }
  return json{{"n", n}, {"p", rows}};
}

inline PreferenceMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("p")) {
    throw std::invalid_argument("matrix schema: expected {\"n\", \"p\"}");
  }
  const int n = j.at("n").get<int>();
  const auto rows = j.at("p").get<std::vector<std::vector<double>>>();
  if (static_cast<int>(rows.size()) != n) {
    throw std::invalid_argument("matrix schema: p must have n rows");
  }
  return PreferenceMatrix::from_rows(rows);
}

inline NlhfProblem problem_from_json(const json& j) {
  if (!j.is_object() || !j.contains("tau") || !j.contains("prompts")) {
    throw std::invalid_argument(
        "problem schema: expected {\"tau\", \"prompts\"}");
  }
  NlhfProblem problem;
  problem.tau = j.at("tau").get<double>();
  for (const auto& entry : j.at("prompts")) {
    if (!entry.contains("weight") || !entry.contains("p") ||
        !entry.contains("pi_ref")) {
      throw std::invalid_argument(
          "problem schema: each prompt needs {\"weight\", \"p\", \"pi_ref\"}");
    }
    const auto rows = entry.at("p").get<std::vector<std::vector<double>>>();
    problem.prompts.emplace_back(entry.at("weight").get<double>(),
                                 PreferenceMatrix::from_rows(rows),
                                 entry.at("pi_ref").get<std::vector<double>>());
  }
  problem.validate();
  return problem;
}

inline json problem_to_json(const NlhfProblem& problem) {
  json prompts = json::array();
  for (const auto& prompt : problem.prompts) {
    prompts.push_back(json{{"weight", prompt.weight},
                           {"p", matrix_to_json(prompt.preference).at("p")},
                           {"pi_ref", prompt.reference}});
  }
  return json{{"tau", problem.tau}, {"prompts", std::move(prompts)}};
}

inline std::string estimate_csv_header() {
  return "m,n,trials,cycle_hits,winner_hits,p_cycle,se_cycle,p_winner,se_winner";
}

inline std::string estimate_csv_row(const EstimateRow& row) {
  std::string line;
  line += std::to_string(row.labelers);
  line += ',';
  line += std::to_string(row.responses);
  line += ',';
  line += std::to_string(row.trials);
  line += ',';
  line += std::to_string(row.cycle_hits);
  line += ',';
  line += std::to_string(row.winner_hits);
  line += ',';
  line += format_double(row.p_cycle);
  line += ',';
  line += format_double(row.se_cycle);
  line += ',';
  line += format_double(row.p_winner);
  line += ',';
  line += format_double(row.se_winner);
  return line;
}

inline json ratefit_to_json(const RateFit& fit) {
  json rows = json::array();
  for (const auto& row : fit.rows) {
    rows.push_back(json{{"m", row.labelers},
                        {"n", row.responses},
                        {"trials", row.trials},
                        {"cycle_hits", row.cycle_hits},
                        {"winner_hits", row.winner_hits},
                        {"p_cycle", row.p_cycle},
                        {"se_cycle", row.se_cycle},
                        {"p_winner", row.p_winner},
                        {"se_winner", row.se_winner}});
  }
  return json{{"m", fit.labelers},
              {"slope", fit.slope},
              {"intercept", fit.intercept},
              {"residual", fit.residual},
              {"expected", fit.expected_slope},
              {"used_rows", fit.used_rows},
              {"rows", std::move(rows)}};
}

inline std::string train_report_csv(const std::vector<TrainRecord>& report) {
  std::string text = "iter,objective,residual,kl,value\n";
  for (const auto& record : report) {
    text += std::to_string(record.iteration);
    text += ',';
    text += format_double(record.objective);
    text += ',';
    text += format_double(record.residual);
    text += ',';
    text += format_double(record.kl);
    text += ',';
    text += format_double(record.value);
    text += '\n';
  }
  return text;
}

inline json policy_to_json(const NlhfProblem& problem,
                           const TabularPolicy& policy) {
  json prompts = json::array();
  for (std::size_t x = 0; x < problem.prompts.size(); ++x) {
    prompts.push_back(json{{"logits", policy.logits[x]},
                           {"pi", policy.distribution(static_cast<int>(x))}});
  }
  return json{{"prompts", std::move(prompts)}};
}

inline json load_json_file(const std::string& path) {
  std::ifstream input(path);
  if (!input) {
    throw std::invalid_argument("cannot open input file: " + path);
  }
  json j;
  input >> j;
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream output(path, std::ios::binary);
  if (!output) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  output << text;
}

}  // namespace prefgame

#endif  // PREFGAME_IO_HPP_
