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
//
// Command-line front end. Subcommands cover profile generation, preference
// matrices, tournament analysis, Nash solving, Monte Carlo estimation, and
// tabular Nash-RS training. Exit codes: 0 success, 2 invalid input or
// schema violation, 3 solver/training non-convergence or sampling
// starvation.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "prefgame/btl.hpp"
#include "prefgame/io.hpp"
#include "prefgame/montecarlo.hpp"
#include "prefgame/nash.hpp"
#include "prefgame/nlhf.hpp"
#include "prefgame/preference.hpp"
#include "prefgame/ranking.hpp"
#include "prefgame/tournament.hpp"
#include "prefgame/version.hpp"

namespace {

using prefgame::json;

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
  } else {
    prefgame::write_text_file(out_path, text);
  }
}

void emit_json(const std::string& out_path, const json& j) {
  emit(out_path, j.dump(2) + "\n");
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    const std::size_t end = text.find(',', begin);
    const std::string token =
        text.substr(begin, end == std::string::npos ? end : end - begin);
    if (!token.empty()) values.push_back(std::stod(token));
    if (end == std::string::npos) break;
    begin = end + 1;
  }
  if (values.empty()) throw std::invalid_argument("empty numeric list");
  return values;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  for (double v : parse_double_list(text)) values.push_back(static_cast<int>(v));
  return values;
}

// A flat JSON config mirrors long flag names; explicit flags win. Keys not
// already on the command line are appended as --key=value tokens before
// parsing.
std::vector<std::string> apply_config_file(const std::vector<std::string>& args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) return args;
  const json config = prefgame::load_json_file(config_path);
  if (!config.is_object()) {
    throw std::invalid_argument("config file must hold a flat JSON object");
  }
  std::vector<std::string> result = args;
  for (const auto& [key, value] : config.items()) {
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& arg : args) {
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) {
        present = true;
        break;
      }
    }
    if (present) continue;
    std::string rendered;
    if (value.is_string()) {
      rendered = value.get<std::string>();
    } else if (value.is_array()) {
      for (const auto& element : value) {
        if (!rendered.empty()) rendered += ',';
        rendered += element.dump();
      }
    } else {
      rendered = value.dump();
    }
    result.push_back(flag + "=" + rendered);
  }
  return result;
}

json meta_for(std::uint64_t seed, json parameters) {
  return prefgame::make_meta(seed, std::move(parameters));
}

std::string csv_meta_line(std::uint64_t seed, const std::string& parameters) {
  return "# version=" + std::string(prefgame::kVersion) +
         " seed=" + std::to_string(seed) +
         (parameters.empty() ? "" : " " + parameters);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference aggregation, tournament analysis, and tabular NLHF"};
  app.set_version_flag("--version", std::string(prefgame::kVersion));
  app.require_subcommand(1);

  // Common knobs; subcommands read whichever apply.
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_path;
  std::string format = "csv";
  std::string config_path;
  app.add_option("--seed", seed, "64-bit RNG seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads for Monte Carlo")
      ->capture_default_str();
  app.add_option("--out", out_path, "output path (default: stdout)");
  app.add_option("--format", format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--config", config_path,
                 "flat JSON config mirroring flags; flags override");

  // gen-profile
  auto* gen = app.add_subcommand("gen-profile", "Sample a ranking profile");
  int gen_m = 3;
  int gen_n = 3;
  std::string gen_sampler = "permutation";
  gen->add_option("--m", gen_m, "labelers")->capture_default_str();
  gen->add_option("--n", gen_n, "responses")->capture_default_str();
  gen->add_option("--sampler", gen_sampler, "permutation or score")
      ->check(CLI::IsMember({"permutation", "score"}))
      ->capture_default_str();

  // pref-matrix
  auto* pref = app.add_subcommand(
      "pref-matrix", "Preference matrix from a profile or BTL rewards");
  std::string pref_in;
  std::string pref_btl;
  pref->add_option("--in", pref_in, "ranking profile JSON");
  pref->add_option("--btl-rewards", pref_btl,
                   "comma-separated rewards for a BTL matrix");

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "Cycle, winner, reward, and decomposition of a matrix");
  std::string analyze_in;
  double tie_tolerance = 0.0;
  analyze->add_option("--in", analyze_in, "preference matrix JSON")->required();
  analyze->add_option("--tie-tolerance", tie_tolerance,
                      "entries within this of 1/2 count as ties")
      ->capture_default_str();

  // solve-nash
  auto* solve = app.add_subcommand("solve-nash",
                                   "Mixed-strategy Nash equilibrium by LP");
  std::string solve_in;
  double solve_tolerance = 1e-9;
  solve->add_option("--in", solve_in, "preference matrix JSON")->required();
  solve->add_option("--tolerance", solve_tolerance, "residual tolerance")
      ->capture_default_str();

  // estimate
  auto* estimate = app.add_subcommand(
      "estimate", "Monte Carlo cycle/winner probabilities for one (m, n)");
  int est_m = 3;
  int est_n = 3;
  std::uint64_t est_trials = 100000;
  estimate->add_option("--m", est_m, "labelers")->capture_default_str();
  estimate->add_option("--n", est_n, "responses")->capture_default_str();
  estimate->add_option("--trials", est_trials, "trial count")
      ->capture_default_str();

  // estimate-rate
  auto* rate = app.add_subcommand(
      "estimate-rate", "Winner-probability rate fit over a response grid");
  int rate_m = 3;
  std::uint64_t rate_trials = 100000;
  std::string rate_grid = "16,32,64,128,256,512,1024,2048,4096";
  rate->add_option("--m", rate_m, "labelers")->capture_default_str();
  rate->add_option("--trials", rate_trials, "trials per grid point")
      ->capture_default_str();
  rate->add_option("--n-grid", rate_grid, "comma-separated response counts")
      ->capture_default_str();

  // simplex-cyclic
  auto* simplex = app.add_subcommand(
      "simplex-cyclic", "Fraction of the ranking simplex with cyclic majority");
  std::uint64_t simplex_trials = 1000000;
  simplex->add_option("--trials", simplex_trials, "trial count")
      ->capture_default_str();

  // train-nashrs
  auto* train = app.add_subcommand("train-nashrs",
                                   "Tabular Nash-RS gradient training");
  std::string train_in;
  int train_steps = 2000;
  double train_lr = 0.1;
  std::string train_mode = "exact";
  std::string train_rule = "gibbs-consistent";
  int train_b1 = 32;
  int train_b2 = 64;
  std::int64_t train_max_proposals = 1000000;
  int report_every = 1;
  std::string policy_out;
  train->add_option("--in", train_in, "problem JSON")->required();
  train->add_option("--steps", train_steps, "gradient steps")
      ->capture_default_str();
  train->add_option("--lr", train_lr, "learning rate")->capture_default_str();
  train->add_option("--mode", train_mode, "exact or sampled")
      ->check(CLI::IsMember({"exact", "sampled"}))
      ->capture_default_str();
  train->add_option("--rule", train_rule, "rejection acceptance rule")
      ->check(CLI::IsMember({"gibbs-consistent", "paper-literal"}))
      ->capture_default_str();
  train->add_option("--B1", train_b1, "policy batch for P-hat")
      ->capture_default_str();
  train->add_option("--B2", train_b2, "accepted opponent samples per step")
      ->capture_default_str();
  train->add_option("--max-proposals", train_max_proposals,
                    "proposal budget per rejection batch")
      ->capture_default_str();
  train->add_option("--report-every", report_every, "report row cadence")
      ->capture_default_str();
  train->add_option("--policy-out", policy_out, "final policy JSON path");

  // reward-compare
  auto* compare = app.add_subcommand(
      "reward-compare",
      "Single-response policy reward vs. BTL reward over a preference grid");
  double compare_tau = 1.0;
  std::string compare_ref = "0.5,0.5";
  double a_min = 0.01;
  double a_max = 0.99;
  int a_steps = 99;
  compare->add_option("--tau", compare_tau, "regularization strength")
      ->capture_default_str();
  compare->add_option("--ref", compare_ref, "two-point reference distribution")
      ->capture_default_str();
  compare->add_option("--a-min", a_min, "grid start (exclusive of 0)")
      ->capture_default_str();
  compare->add_option("--a-max", a_max, "grid end (exclusive of 1)")
      ->capture_default_str();
  compare->add_option("--a-steps", a_steps, "grid size")->capture_default_str();

  // Common flags may appear after the subcommand name.
  for (CLI::App* subcommand : app.get_subcommands({})) {
    subcommand->fallthrough();
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = apply_config_file(args);
    std::vector<const char*> raw;
    raw.push_back(argv[0]);
    for (const auto& arg : args) raw.push_back(arg.c_str());
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) {
      json output;
      if (gen_sampler == "permutation") {
        output = prefgame::profile_to_json(
            prefgame::sample_permutation_profile(gen_m, gen_n, seed));
      } else {
        auto [profile, scores] = prefgame::sample_score_profile(gen_m, gen_n, seed);
        output = prefgame::profile_to_json(profile);
        std::vector<std::vector<double>> rows(gen_m, std::vector<double>(gen_n));
        for (int l = 0; l < gen_m; ++l) {
          for (int i = 0; i < gen_n; ++i) rows[l][i] = scores.at(l, i);
        }
        output["scores"] = rows;
      }
      output["meta"] = meta_for(
          seed, json{{"m", gen_m}, {"n", gen_n}, {"sampler", gen_sampler}});
      emit_json(out_path, output);
    } else if (pref->parsed()) {
      if (pref_in.empty() == pref_btl.empty()) {
        throw std::invalid_argument(
            "pref-matrix: exactly one of --in or --btl-rewards is required");
      }
      prefgame::PreferenceMatrix matrix =
          pref_in.empty()
              ? prefgame::preference_from_btl(parse_double_list(pref_btl))
              : prefgame::preference_from_profile(
                    prefgame::profile_from_json(prefgame::load_json_file(pref_in)));
      json output = prefgame::matrix_to_json(matrix);
      output["meta"] = meta_for(
          seed, json{{"source", pref_in.empty() ? "btl" : pref_in}});
      emit_json(out_path, output);
    } else if (analyze->parsed()) {
      const prefgame::PreferenceMatrix matrix =
          prefgame::matrix_from_json(prefgame::load_json_file(analyze_in));
      const auto graph =
          prefgame::MajorityDigraph::from_matrix(matrix, tie_tolerance);
      json output;
      output["tournament"] = graph.is_tournament();
      const auto cycle = prefgame::find_condorcet_cycle(graph);
      output["cycle"] = cycle ? json(*cycle) : json(nullptr);
      const auto winner = prefgame::find_condorcet_winner(graph);
      output["winner"] = winner ? json(*winner) : json(nullptr);
      if (graph.is_tournament()) {
        output["decomposition"] =
            prefgame::winning_set_decomposition(graph).blocks;
        const auto reward = prefgame::construct_reward(graph);
        if (std::holds_alternative<prefgame::RewardVector>(reward)) {
          output["reward"] = std::get<prefgame::RewardVector>(reward);
        } else {
          output["reward"] = nullptr;
        }
      } else {
        output["decomposition"] = nullptr;
        output["reward"] = nullptr;
      }
      output["meta"] = meta_for(
          seed, json{{"in", analyze_in}, {"tie_tolerance", tie_tolerance}});
      emit_json(out_path, output);
    } else if (solve->parsed()) {
      const prefgame::PreferenceMatrix matrix =
          prefgame::matrix_from_json(prefgame::load_json_file(solve_in));
      const prefgame::NashSolution solution =
          prefgame::solve_nash_lp(matrix, solve_tolerance);
      json output{{"strategy", solution.strategy.weights},
                  {"value", solution.value},
                  {"support", solution.support},
                  {"residual", solution.residual},
                  {"method", solution.method}};
      output["meta"] = meta_for(
          seed, json{{"in", solve_in}, {"tolerance", solve_tolerance}});
      emit_json(out_path, output);
    } else if (estimate->parsed()) {
      const prefgame::EstimateRow row =
          prefgame::estimate_cycle_and_winner(est_m, est_n, est_trials, seed, threads);
      if (format == "json") {
        json output{{"m", row.labelers},
                    {"n", row.responses},
                    {"trials", row.trials},
                    {"cycle_hits", row.cycle_hits},
                    {"winner_hits", row.winner_hits},
                    {"p_cycle", row.p_cycle},
                    {"se_cycle", row.se_cycle},
                    {"p_winner", row.p_winner},
                    {"se_winner", row.se_winner}};
        output["meta"] = meta_for(
            seed, json{{"m", est_m}, {"n", est_n}, {"trials", est_trials}});
        emit_json(out_path, output);
      } else {
        std::string text =
            csv_meta_line(seed, "m=" + std::to_string(est_m) +
                                    " n=" + std::to_string(est_n) +
                                    " trials=" + std::to_string(est_trials)) +
            "\n" + prefgame::estimate_csv_header() + "\n" +
            prefgame::estimate_csv_row(row) + "\n";
        emit(out_path, text);
      }
    } else if (rate->parsed()) {
      const prefgame::RateFit fit = prefgame::estimate_winner_rate(
          rate_m, parse_int_list(rate_grid), rate_trials, seed, threads);
      json output = prefgame::ratefit_to_json(fit);
      output["meta"] = meta_for(seed, json{{"m", rate_m},
                                           {"trials", rate_trials},
                                           {"n_grid", parse_int_list(rate_grid)}});
      emit_json(out_path, output);
    } else if (simplex->parsed()) {
      const prefgame::SimplexCyclicEstimate estimate_result =
          prefgame::estimate_simplex_cyclic(simplex_trials, seed, threads);
      json output{{"trials", estimate_result.trials},
                  {"hits", estimate_result.hits},
                  {"p", estimate_result.p},
                  {"se", estimate_result.se}};
      output["meta"] = meta_for(seed, json{{"trials", simplex_trials}});
      emit_json(out_path, output);
    } else if (train->parsed()) {
      const prefgame::NlhfProblem problem =
          prefgame::problem_from_json(prefgame::load_json_file(train_in));
      prefgame::TrainOptions options;
      options.steps = train_steps;
      options.learning_rate = train_lr;
      options.mode = train_mode == "exact" ? prefgame::TrainMode::kExact
                                           : prefgame::TrainMode::kSampled;
      options.rejection.policy_batch = train_b1;
      options.rejection.accept_target = train_b2;
      options.rejection.max_proposals = train_max_proposals;
      options.rejection.rule = train_rule == "gibbs-consistent"
                                   ? prefgame::AcceptanceRule::kGibbsConsistent
                                   : prefgame::AcceptanceRule::kPaperLiteral;
      options.seed = seed;
      options.report_every = report_every;
      const prefgame::TrainResult result = prefgame::train_nash_rs(
          problem, prefgame::TabularPolicy::reference_init(problem), options);
      const json parameters{{"in", train_in},
                            {"steps", train_steps},
                            {"lr", train_lr},
                            {"mode", train_mode},
                            {"rule", train_rule},
                            {"B1", train_b1},
                            {"B2", train_b2}};
      const std::string text =
          csv_meta_line(seed, "steps=" + std::to_string(train_steps) +
                                  " lr=" + prefgame::format_double(train_lr) +
                                  " mode=" + train_mode) +
          "\n" + prefgame::train_report_csv(result.report);
      emit(out_path, text);
      if (!policy_out.empty()) {
        json policy_json = prefgame::policy_to_json(problem, result.policy);
        policy_json["meta"] = meta_for(seed, parameters);
        prefgame::write_text_file(policy_out, policy_json.dump(2) + "\n");
      }
    } else if (compare->parsed()) {
      const std::vector<double> reference = parse_double_list(compare_ref);
      if (a_steps < 1 || !(a_min > 0.0) || !(a_max < 1.0) || a_min > a_max) {
        throw std::invalid_argument(
            "reward-compare: grid must satisfy 0 < a-min <= a-max < 1");
      }
      std::string text =
          csv_meta_line(seed, "tau=" + prefgame::format_double(compare_tau)) +
          "\na,z_y1,z_y2,r_y1_over_tau,r_y2_over_tau\n";
      for (int k = 0; k < a_steps; ++k) {
        const double a =
            a_steps == 1
                ? a_min
                : a_min + (a_max - a_min) * static_cast<double>(k) / (a_steps - 1);
        const prefgame::SingleResponseRewards rewards =
            prefgame::compare_single_response_rewards(a, compare_tau, reference);
        text += prefgame::format_double(a) + ',' +
                prefgame::format_double(rewards.policy_reward_y1) + ',' +
                prefgame::format_double(rewards.policy_reward_y2) + ',' +
                prefgame::format_double(rewards.btl_reward_y1_over_tau) + ',' +
                prefgame::format_double(rewards.btl_reward_y2_over_tau) + '\n';
      }
      emit(out_path, text);
    }
  } catch (const prefgame::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const prefgame::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const prefgame::SamplingStarvationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const prefgame::TrainingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const prefgame::RateFitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
