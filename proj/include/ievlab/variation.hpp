#pragma once

#include <string_view>
#include <vector>

#include "ievlab/envs.hpp"
#include "ievlab/policy.hpp"
#include "ievlab/rng.hpp"

namespace ievlab::variation {

/// How the per-step action perturbation amplitude is scheduled.
///   fixed:        constant sigma_act
///   incremental1: ramps 0 -> sigma_act_max across the steps of each episode
///   incremental2: ramps 0 -> sigma_act_max across generations
enum class Modality { kFixed, kIncremental1, kIncremental2 };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view text);

struct VariationPlan {
  double sigma_init = 0.0;
  Modality action_modality = Modality::kFixed;
  /// Active for the fixed modality only.
  double sigma_act = 0.0;
  /// Active for the incremental modalities only.
  double sigma_act_max = 0.0;
  /// incremental2 ramp length in generations.
  int ramp_generations = 1;
  int episodes_per_eval = 1;

  void validate() const;
};

/// Action-noise amplitude at step t of an episode of planned length T, in generation g.
double sigma_act_at(const VariationPlan& plan, int t, int episode_length, int generation);

/// Largest amplitude the plan applies during generation g.
double sigma_act_effective(const VariationPlan& plan, int episode_length, int generation);

struct EvaluationRecord {
  /// Mean of the per-episode returns.
  double fitness = 0.0;
  std::vector<double> episode_returns;
  std::vector<double> episode_progress;
  std::vector<int> episode_steps;
};

/// Runs plan.episodes_per_eval episodes and averages their returns. Problems
/// that score the genotype directly skip the episodes.
EvaluationRecord evaluate(const policy::Policy& policy, envs::Environment& env, const VariationPlan& plan,
                          envs::RewardVariant variant, int generation, Rng& rng);

/// Same as evaluate() with an explicit fixed amplitude pair, for post-evaluation.
EvaluationRecord evaluate_fixed(const policy::Policy& policy, envs::Environment& env, double sigma_init,
                                double sigma_act, int episodes, envs::RewardVariant variant, Rng& rng);

}  // namespace ievlab::variation
