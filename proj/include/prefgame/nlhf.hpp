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

#ifndef PREFGAME_NLHF_HPP_
#define PREFGAME_NLHF_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "prefgame/errors.hpp"
#include "prefgame/preference.hpp"
#include "prefgame/random.hpp"

namespace prefgame {

// One prompt of the regularized preference game: its preference matrix, a
// strictly positive reference distribution, and the prompt weight rho.
struct PromptInstance {
  double weight = 1.0;
  PreferenceMatrix preference;
  std::vector<double> reference;

  PromptInstance(double weight, PreferenceMatrix preference,
                 std::vector<double> reference)
      : weight(weight),
        preference(std::move(preference)),
        reference(std::move(reference)) {}
};

struct NlhfProblem {
  double tau = 1.0;
  std::vector<PromptInstance> prompts;

  void validate() const {
    if (tau <= 0.0) throw std::invalid_argument("NlhfProblem: tau > 0");
    if (prompts.empty()) throw std::invalid_argument("NlhfProblem: no prompts");
    double total_weight = 0.0;
    for (const auto& prompt : prompts) {
      if (prompt.weight < 0.0) {
        throw std::invalid_argument("NlhfProblem: prompt weights >= 0");
      }
      total_weight += prompt.weight;
      const int n = prompt.preference.size();
      if (static_cast<int>(prompt.reference.size()) != n) {
        throw std::invalid_argument("NlhfProblem: reference size mismatch");
      }
      double total = 0.0;
      for (double r : prompt.reference) {
        if (r <= 0.0) {
          throw std::invalid_argument(
              "NlhfProblem: reference must be strictly positive");
        }
        total += r;
      }
      if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("NlhfProblem: reference must sum to 1");
      }
      prompt.preference.validate();
    }
    if (std::abs(total_weight - 1.0) > 1e-9) {
      throw std::invalid_argument("NlhfProblem: prompt weights must sum to 1");
    }
  }
};

using PolicyDistributions = std::vector<std::vector<double>>;

// Softmax policy, one logit vector per prompt.
struct TabularPolicy {
  std::vector<std::vector<double>> logits;

  static TabularPolicy reference_init(const NlhfProblem& problem) {
    TabularPolicy policy;
    policy.logits.reserve(problem.prompts.size());
    for (const auto& prompt : problem.prompts) {
      std::vector<double> logit(prompt.reference.size());
      for (std::size_t i = 0; i < logit.size(); ++i) {
        logit[i] = std::log(prompt.reference[i]);
      }
      policy.logits.push_back(std::move(logit));
    }
    return policy;
  }

  std::vector<double> distribution(int prompt) const {
    const auto& logit = logits[prompt];
    double max_logit = -std::numeric_limits<double>::infinity();
    for (double v : logit) max_logit = std::max(max_logit, v);
    std::vector<double> probabilities(logit.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logit.size(); ++i) {
      probabilities[i] = std::exp(logit[i] - max_logit);
      total += probabilities[i];
    }
    for (double& p : probabilities) p /= total;
    return probabilities;
  }

  PolicyDistributions distributions() const {
    PolicyDistributions all;
    all.reserve(logits.size());
    for (std::size_t x = 0; x < logits.size(); ++x) {
      all.push_back(distribution(static_cast<int>(x)));
    }
    return all;
  }
};

namespace detail {

// (pi^T P)_{y'} for one prompt: how strongly pi beats each opponent response.
inline std::vector<double> beat_scores(const PreferenceMatrix& matrix,
                                       const std::vector<double>& pi) {
  const int n = matrix.size();
  std::vector<double> scores(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double w = pi[i];
    if (w == 0.0) continue;
    for (int j = 0; j < n; ++j) scores[j] += w * matrix.at(i, j);
  }
  return scores;
}

inline double log_sum_exp(const std::vector<double>& values) {
  double max_value = -std::numeric_limits<double>::infinity();
  for (double v : values) max_value = std::max(max_value, v);
  double total = 0.0;
  for (double v : values) total += std::exp(v - max_value);
  return max_value + std::log(total);
}

inline double kl_divergence(const std::vector<double>& pi,
                            const std::vector<double>& reference) {
  double kl = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (pi[i] > 0.0) kl += pi[i] * std::log(pi[i] / reference[i]);
  }
  return kl;
}

inline int sample_index(const std::vector<double>& distribution,
                        SplitMix64& rng) {
  const double u = rng.next_double();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < distribution.size(); ++i) {
    cumulative += distribution[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  return static_cast<int>(distribution.size()) - 1;
}

}  // namespace detail

// Policy reward: Z(x, pi) = -log E_{y' ~ ref} exp(-(pi^T P)_{y'} / tau),
// with log-sum-exp stabilization.
inline double policy_reward(const NlhfProblem& problem,
                            const std::vector<double>& pi, int prompt) {
  const auto& instance = problem.prompts[prompt];
  const std::vector<double> scores = detail::beat_scores(instance.preference, pi);
  std::vector<double> exponents(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    exponents[j] = std::log(instance.reference[j]) - scores[j] / problem.tau;
  }
  return -detail::log_sum_exp(exponents);
}

// Regularized objective: sum_x rho_x [Z(x, pi) - KL(pi || ref)].
inline double objective(const NlhfProblem& problem,
                        const PolicyDistributions& distributions) {
  double value = 0.0;
  for (std::size_t x = 0; x < problem.prompts.size(); ++x) {
    const auto& instance = problem.prompts[x];
    value += instance.weight *
             (policy_reward(problem, distributions[x], static_cast<int>(x)) -
              detail::kl_divergence(distributions[x], instance.reference));
  }
  return value;
}

// Inner minimizer in closed form: the reference distribution exponentially
// tilted down by how strongly pi beats each response. Its log-normalizer
// equals -Z(x, pi).
inline std::vector<double> gibbs_opponent(const NlhfProblem& problem,
                                          const std::vector<double>& pi,
                                          int prompt) {
  const auto& instance = problem.prompts[prompt];
  const std::vector<double> scores = detail::beat_scores(instance.preference, pi);
  std::vector<double> log_weights(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    log_weights[j] = std::log(instance.reference[j]) - scores[j] / problem.tau;
  }
  const double log_normalizer = detail::log_sum_exp(log_weights);
  std::vector<double> opponent(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    opponent[j] = std::exp(log_weights[j] - log_normalizer);
  }
  return opponent;
}

// Implicit reward r'(x, y): expected win probability of y against the Gibbs
// opponent, scaled by 1/tau.
inline double implicit_reward_exact(const NlhfProblem& problem,
                                    const std::vector<double>& pi, int prompt,
                                    int response) {
  const auto& instance = problem.prompts[prompt];
  const std::vector<double> opponent = gibbs_opponent(problem, pi, prompt);
  double expected = 0.0;
  for (std::size_t j = 0; j < opponent.size(); ++j) {
    expected += opponent[j] * instance.preference.at(response, static_cast<int>(j));
  }
  return expected / problem.tau;
}

enum class AcceptanceRule {
  kGibbsConsistent,  // accept iff P_hat(y') <= -tau log u; targets the Gibbs law
  kPaperLiteral,     // accept iff P_hat(y') >= -tau log u, as printed
};

struct RejectionConfig {
  int policy_batch = 32;         // B1: policy samples forming P_hat
  int accept_target = 64;        // B2: accepted opponent samples wanted
  std::int64_t max_proposals = 1000000;
  AcceptanceRule rule = AcceptanceRule::kGibbsConsistent;

  void validate() const {
    if (policy_batch < 1 || accept_target < 1) {
      throw std::invalid_argument("RejectionConfig: batch sizes >= 1");
    }
    if (max_proposals < accept_target) {
      throw std::invalid_argument(
          "RejectionConfig: max_proposals >= accept_target");
    }
  }
};

struct RejectionDraw {
  std::vector<int> accepted;
  std::int64_t proposals = 0;
  double acceptance_rate = 0.0;
  std::vector<double> p_hat;  // batch estimate of P(pi beats y') per response
};

// Rejection sampling against the reference proposal. P_hat comes from B1
// policy draws; proposals continue until B2 acceptances or the budget runs
// out.
inline RejectionDraw rejection_sample_opponent(const NlhfProblem& problem,
                                               const std::vector<double>& pi,
                                               int prompt,
                                               const RejectionConfig& config,
                                               std::uint64_t seed) {
  config.validate();
  const auto& instance = problem.prompts[prompt];
  const int n = instance.preference.size();
  SplitMix64 rng(seed);

  RejectionDraw draw;
  draw.p_hat.assign(n, 0.0);
  for (int b = 0; b < config.policy_batch; ++b) {
    const int y = detail::sample_index(pi, rng);
    for (int j = 0; j < n; ++j) {
      draw.p_hat[j] += instance.preference.at(y, j);
    }
  }
  for (double& value : draw.p_hat) value /= config.policy_batch;

  draw.accepted.reserve(config.accept_target);
  while (static_cast<int>(draw.accepted.size()) < config.accept_target) {
    if (draw.proposals >= config.max_proposals) {
      throw SamplingStarvationError(
          "rejection_sample_opponent: proposal budget exhausted (" +
              std::to_string(draw.proposals) + " proposals, " +
              std::to_string(draw.accepted.size()) + " accepted)",
          draw.proposals, static_cast<std::int64_t>(draw.accepted.size()));
    }
    ++draw.proposals;
    const int proposal = detail::sample_index(instance.reference, rng);
    const double threshold = -problem.tau * std::log(1.0 - rng.next_double());
    const bool accept = config.rule == AcceptanceRule::kGibbsConsistent
                            ? draw.p_hat[proposal] <= threshold
                            : draw.p_hat[proposal] >= threshold;
    if (accept) draw.accepted.push_back(proposal);
  }
  draw.acceptance_rate =
      static_cast<double>(draw.accepted.size()) / static_cast<double>(draw.proposals);
  return draw;
}

// Monte Carlo implicit reward: mean win probability of y against the
// accepted opponent samples, scaled by 1/tau.
inline double implicit_reward_sampled(const NlhfProblem& problem,
                                      const std::vector<double>& pi, int prompt,
                                      int response, const RejectionConfig& config,
                                      std::uint64_t seed) {
  const auto& instance = problem.prompts[prompt];
  const RejectionDraw draw =
      rejection_sample_opponent(problem, pi, prompt, config, seed);
  double total = 0.0;
  for (int opponent : draw.accepted) {
    total += instance.preference.at(response, opponent);
  }
  return total / (problem.tau * static_cast<double>(draw.accepted.size()));
}

// Exact gradient of the objective in logit coordinates. Per prompt:
// rho * pi_j * [(r'_j - E_pi r') - (log(pi_j/ref_j) - KL)].
inline std::vector<std::vector<double>> policy_gradient(
    const NlhfProblem& problem, const TabularPolicy& policy) {
  std::vector<std::vector<double>> gradients;
  gradients.reserve(problem.prompts.size());
  for (std::size_t x = 0; x < problem.prompts.size(); ++x) {
    const auto& instance = problem.prompts[x];
    const std::vector<double> pi = policy.distribution(static_cast<int>(x));
    const int n = instance.preference.size();
    const std::vector<double> opponent =
        gibbs_opponent(problem, pi, static_cast<int>(x));
    std::vector<double> reward(n, 0.0);
    for (int y = 0; y < n; ++y) {
      double expected = 0.0;
      for (int j = 0; j < n; ++j) {
        expected += opponent[j] * instance.preference.at(y, j);
      }
      reward[y] = expected / problem.tau;
    }
    double mean_reward = 0.0;
    double kl = 0.0;
    std::vector<double> log_ratio(n, 0.0);
    for (int y = 0; y < n; ++y) {
      if (pi[y] == 0.0) continue;  // underflowed mass contributes nothing
      mean_reward += pi[y] * reward[y];
      log_ratio[y] = std::log(pi[y] / instance.reference[y]);
      kl += pi[y] * log_ratio[y];
    }
    std::vector<double> gradient(n, 0.0);
    for (int y = 0; y < n; ++y) {
      if (pi[y] == 0.0) continue;
      gradient[y] = instance.weight * pi[y] *
                    ((reward[y] - mean_reward) - (log_ratio[y] - kl));
    }
    gradients.push_back(std::move(gradient));
  }
  return gradients;
}

// One step of the self-play iteration: pi_{t+1} proportional to
// ref * exp(P(y beats pi_t) / tau). Its fixed point is the regularized Nash
// equilibrium.
inline PolicyDistributions online_ipo_iterate(const NlhfProblem& problem,
                                              const PolicyDistributions& current) {
  PolicyDistributions next;
  next.reserve(problem.prompts.size());
  for (std::size_t x = 0; x < problem.prompts.size(); ++x) {
    const auto& instance = problem.prompts[x];
    const int n = instance.preference.size();
    std::vector<double> win(n, 0.0);  // P(y beats pi_t)
    for (int y = 0; y < n; ++y) {
      for (int j = 0; j < n; ++j) {
        win[y] += instance.preference.at(y, j) * current[x][j];
      }
    }
    std::vector<double> log_weights(n);
    for (int y = 0; y < n; ++y) {
      log_weights[y] = std::log(instance.reference[y]) + win[y] / problem.tau;
    }
    const double log_normalizer = detail::log_sum_exp(log_weights);
    std::vector<double> distribution(n);
    for (int y = 0; y < n; ++y) {
      distribution[y] = std::exp(log_weights[y] - log_normalizer);
    }
    next.push_back(std::move(distribution));
  }
  return next;
}

// One step of mirror descent against the geometric mixture
// ref_t = pi_t^{1 - eta tau} * ref^{eta tau} (normalized):
// pi_{t+1} proportional to ref_t * exp(eta * P(y beats ref_t)).
inline PolicyDistributions nash_md_iterate(const NlhfProblem& problem,
                                           const PolicyDistributions& current,
                                           double eta) {
  if (eta <= 0.0) throw std::invalid_argument("nash_md_iterate: eta > 0");
  PolicyDistributions next;
  next.reserve(problem.prompts.size());
  const double mix = eta * problem.tau;
  for (std::size_t x = 0; x < problem.prompts.size(); ++x) {
    const auto& instance = problem.prompts[x];
    const int n = instance.preference.size();
    std::vector<double> log_mixture(n);
    for (int y = 0; y < n; ++y) {
      // At eta * tau == 1 the mixture is exactly the reference, and the
      // current policy must not contribute (even a zero entry).
      log_mixture[y] = mix * std::log(instance.reference[y]);
      if (mix != 1.0) log_mixture[y] += (1.0 - mix) * std::log(current[x][y]);
    }
    const double mixture_normalizer = detail::log_sum_exp(log_mixture);
    std::vector<double> mixture(n);
    for (int y = 0; y < n; ++y) {
      mixture[y] = std::exp(log_mixture[y] - mixture_normalizer);
    }
    std::vector<double> win(n, 0.0);  // P(y beats mixture)
    for (int y = 0; y < n; ++y) {
      for (int j = 0; j < n; ++j) {
        win[y] += instance.preference.at(y, j) * mixture[j];
      }
    }
    std::vector<double> log_weights(n);
    for (int y = 0; y < n; ++y) {
      log_weights[y] = log_mixture[y] - mixture_normalizer + eta * win[y];
    }
    const double log_normalizer = detail::log_sum_exp(log_weights);
    std::vector<double> distribution(n);
    for (int y = 0; y < n; ++y) {
      distribution[y] = std::exp(log_weights[y] - log_normalizer);
    }
    next.push_back(std::move(distribution));
  }
  return next;
}

enum class TrainMode { kExact, kSampled };

struct TrainOptions {
  int steps = 2000;
  double learning_rate = 0.1;
  TrainMode mode = TrainMode::kExact;
  RejectionConfig rejection{};
  std::uint64_t seed = 0;
  int report_every = 1;
};

struct TrainRecord {
  int iteration = 0;
  double objective = 0.0;
  double residual = 0.0;  // ||pi - G(pi)||_inf, G the self-play map
  double kl = 0.0;
  double value = 0.0;     // P_tau(pi beats its Gibbs opponent)
};

struct TrainResult {
  TabularPolicy policy;
  std::vector<TrainRecord> report;
};

namespace detail {

inline TrainRecord train_record(const NlhfProblem& problem,
                                const PolicyDistributions& distributions,
                                int iteration) {
  TrainRecord record;
  record.iteration = iteration;
  record.objective = objective(problem, distributions);
  const PolicyDistributions next = online_ipo_iterate(problem, distributions);
  double residual = 0.0;
  double kl = 0.0;
  double value = 0.0;
  for (std::size_t x = 0; x < problem.prompts.size(); ++x) {
    const auto& instance = problem.prompts[x];
    const int n = instance.preference.size();
    for (int y = 0; y < n; ++y) {
      residual = std::max(residual, std::abs(distributions[x][y] - next[x][y]));
    }
    kl += instance.weight * kl_divergence(distributions[x], instance.reference);
    const std::vector<double> opponent =
        gibbs_opponent(problem, distributions[x], static_cast<int>(x));
    double win = 0.0;
    for (int y = 0; y < n; ++y) {
      for (int j = 0; j < n; ++j) {
        win += distributions[x][y] * instance.preference.at(y, j) * opponent[j];
      }
    }
    value += instance.weight *
             (win - problem.tau * kl_divergence(distributions[x], instance.reference) +
              problem.tau * kl_divergence(opponent, instance.reference));
  }
  record.residual = residual;
  record.kl = kl;
  record.value = value;
  return record;
}

}  // namespace detail

// Plain gradient ascent on the logits. Exact mode uses the analytic implicit
// reward; sampled mode estimates it with one rejection-sampled opponent
// batch per prompt per step.
inline TrainResult train_nash_rs(const NlhfProblem& problem, TabularPolicy init,
                                 const TrainOptions& options) {
  problem.validate();
  if (options.steps < 1) throw std::invalid_argument("train_nash_rs: steps >= 1");
  if (options.learning_rate <= 0.0) {
    throw std::invalid_argument("train_nash_rs: learning rate > 0");
  }
  if (init.logits.size() != problem.prompts.size()) {
    throw std::invalid_argument("train_nash_rs: policy/problem size mismatch");
  }

  TrainResult result;
  result.policy = std::move(init);
  const double initial_objective =
      objective(problem, result.policy.distributions());
  const double divergence_floor =
      initial_objective - 10.0 * std::max(std::abs(initial_objective), 1e-3);

  for (int step = 0; step < options.steps; ++step) {
    std::vector<std::vector<double>> gradients;
    if (options.mode == TrainMode::kExact) {
      gradients = policy_gradient(problem, result.policy);
    } else {
      gradients.reserve(problem.prompts.size());
      for (std::size_t x = 0; x < problem.prompts.size(); ++x) {
        const auto& instance = problem.prompts[x];
        const int n = instance.preference.size();
        const std::vector<double> pi =
            result.policy.distribution(static_cast<int>(x));
        const std::uint64_t draw_seed = substream(
            options.seed, static_cast<std::uint64_t>(step) *
                                  problem.prompts.size() +
                              x);
        const RejectionDraw draw = rejection_sample_opponent(
            problem, pi, static_cast<int>(x), options.rejection, draw_seed);
        std::vector<double> reward(n, 0.0);
        for (int y = 0; y < n; ++y) {
          double total = 0.0;
          for (int opponent : draw.accepted) {
            total += instance.preference.at(y, opponent);
          }
          reward[y] = total / (problem.tau *
                               static_cast<double>(draw.accepted.size()));
        }
        double mean_reward = 0.0;
        double kl = 0.0;
        std::vector<double> log_ratio(n, 0.0);
        for (int y = 0; y < n; ++y) {
          if (pi[y] == 0.0) continue;
          mean_reward += pi[y] * reward[y];
          log_ratio[y] = std::log(pi[y] / instance.reference[y]);
          kl += pi[y] * log_ratio[y];
        }
        std::vector<double> gradient(n, 0.0);
        for (int y = 0; y < n; ++y) {
          if (pi[y] == 0.0) continue;
          gradient[y] = instance.weight * pi[y] *
                        ((reward[y] - mean_reward) - (log_ratio[y] - kl));
        }
        gradients.push_back(std::move(gradient));
      }
    }

    for (std::size_t x = 0; x < gradients.size(); ++x) {
      for (std::size_t y = 0; y < gradients[x].size(); ++y) {
        result.policy.logits[x][y] += options.learning_rate * gradients[x][y];
      }
    }

    if ((step + 1) % options.report_every == 0 || step + 1 == options.steps) {
      const TrainRecord record = detail::train_record(
          problem, result.policy.distributions(), step + 1);
      if (record.objective < divergence_floor) {
        result.report.push_back(record);
        throw TrainingError("train_nash_rs: objective diverged at step " +
                            std::to_string(step + 1));
      }
      result.report.push_back(record);
    }
  }
  return result;
}

// Closed forms on a two-response prompt with P(y1 beats y2) = a:
// the single-response policy reward stays within [0, 1/tau] while the
// mean-zero BTL reward over tau diverges as a approaches 0 or 1.
struct SingleResponseRewards {
  double policy_reward_y1 = 0.0;
  double policy_reward_y2 = 0.0;
  double btl_reward_y1_over_tau = 0.0;
  double btl_reward_y2_over_tau = 0.0;
};

inline SingleResponseRewards compare_single_response_rewards(
    double a, double tau, const std::vector<double>& reference) {
  if (!(a > 0.0 && a < 1.0)) {
    throw std::invalid_argument(
        "compare_single_response_rewards: a must lie strictly inside (0, 1)");
  }
  if (tau <= 0.0) {
    throw std::invalid_argument("compare_single_response_rewards: tau > 0");
  }
  if (reference.size() != 2 || reference[0] <= 0.0 || reference[1] <= 0.0 ||
      std::abs(reference[0] + reference[1] - 1.0) > 1e-9) {
    throw std::invalid_argument(
        "compare_single_response_rewards: reference must be a positive "
        "two-point distribution");
  }
  SingleResponseRewards rewards;
  rewards.policy_reward_y1 =
      -std::log(reference[0] * std::exp(-0.5 / tau) +
                reference[1] * std::exp(-a / tau));
  rewards.policy_reward_y2 =
      -std::log(reference[0] * std::exp(-(1.0 - a) / tau) +
                reference[1] * std::exp(-0.5 / tau));
  rewards.btl_reward_y1_over_tau = 0.5 / tau * std::log(a / (1.0 - a));
  rewards.btl_reward_y2_over_tau =
      rewards.btl_reward_y1_over_tau == 0.0 ? 0.0
                                            : -rewards.btl_reward_y1_over_tau;
  return rewards;
}

}  // namespace prefgame

#endif  // PREFGAME_NLHF_HPP_
