#include "ievlab/variation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ievlab/error.hpp"

namespace ievlab::variation {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::kFixed: return "fixed";
    case Modality::kIncremental1: return "incremental1";
    case Modality::kIncremental2: return "incremental2";
  }
  return "?";
}

Modality parse_modality(std::string_view text) {
  for (auto m : {Modality::kFixed, Modality::kIncremental1, Modality::kIncremental2}) {
    if (to_string(m) == text) return m;
  }
  throw InvalidInput("unknown action modality '" + std::string(text) + "'");
}

void VariationPlan::validate() const {
  auto check_amp = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidInput(std::string(name) + " must be finite and >= 0");
  };
  check_amp(sigma_init, "sigma_init");
  check_amp(sigma_act, "sigma_act");
  check_amp(sigma_act_max, "sigma_act_max");
  if (episodes_per_eval < 1) throw InvalidInput("episodes_per_eval must be >= 1");
  if (action_modality == Modality::kFixed) {
    if (sigma_act_max != 0.0) throw InvalidInput("sigma_act_max is inactive for the fixed modality");
  } else {
    if (sigma_act != 0.0) throw InvalidInput("sigma_act is inactive for incremental modalities; use sigma_act_max");
  }
  if (action_modality == Modality::kIncremental2 && ramp_generations < 1) {
    throw InvalidInput("ramp_generations must be >= 1");
  }
}

double sigma_act_at(const VariationPlan& plan, int t, int episode_length, int generation) {
  if (t < 0 || generation < 0) throw InvalidInput("step and generation must be >= 0");
  switch (plan.action_modality) {
    case Modality::kFixed: return plan.sigma_act;
    case Modality::kIncremental1:
      if (episode_length < 2) throw InvalidInput("incremental1 needs an episode length of at least 2");
      if (t >= episode_length) throw InvalidInput("step index beyond episode length");
      return plan.sigma_act_max * static_cast<double>(t) / static_cast<double>(episode_length - 1);
    case Modality::kIncremental2:
      return plan.sigma_act_max *
             std::min(1.0, static_cast<double>(generation) / static_cast<double>(plan.ramp_generations));
  }
  return 0.0;
}

double sigma_act_effective(const VariationPlan& plan, int episode_length, int generation) {
  if (plan.action_modality == Modality::kIncremental1) return plan.sigma_act_max;
  return sigma_act_at(plan, 0, episode_length, generation);
}

namespace {

template <typename SigmaAt>
EvaluationRecord run_episodes(const policy::Policy& policy, envs::Environment& env, double sigma_init, int episodes,
                              envs::RewardVariant variant, Rng& rng, SigmaAt sigma_at) {
  EvaluationRecord rec;
  rec.episode_returns.reserve(static_cast<std::size_t>(episodes));
  if (const auto direct = env.score_genotype(policy.params.values)) {
    rec.fitness = *direct;
    rec.episode_returns.assign(static_cast<std::size_t>(episodes), *direct);
    rec.episode_progress.assign(static_cast<std::size_t>(episodes), 0.0);
    rec.episode_steps.assign(static_cast<std::size_t>(episodes), 0);
    return rec;
  }
  policy::Controller controller(policy.spec, policy.params.values, policy.normalizer);
  const int horizon = env.max_steps();
  double mean = 0.0;
  for (int e = 0; e < episodes; ++e) {
    auto obs = env.reset(rng, sigma_init);
    envs::EpisodeTotals totals;
    for (int t = 0;; ++t) {
      const auto action = controller.act(obs);
      auto r = env.step(action, rng, sigma_at(t, horizon));
      totals.add(r);
      if (r.done) break;
      obs = std::move(r.observation);
    }
    const double ret = envs::episode_return(totals, variant);
    rec.episode_returns.push_back(ret);
    rec.episode_progress.push_back(totals.progress);
    rec.episode_steps.push_back(totals.steps);
    // Running mean: identical returns average to exactly that return.
    mean += (ret - mean) / static_cast<double>(e + 1);
  }
  rec.fitness = mean;
  return rec;
}

}  // namespace

EvaluationRecord evaluate(const policy::Policy& policy, envs::Environment& env, const VariationPlan& plan,
                          envs::RewardVariant variant, int generation, Rng& rng) {
  plan.validate();
  if (plan.action_modality == Modality::kIncremental1 && env.max_steps() < 2 && !env.genotype_dim()) {
    throw InvalidInput("incremental1 needs an episode length of at least 2");
  }
  return run_episodes(policy, env, plan.sigma_init, plan.episodes_per_eval, variant, rng,
                      [&](int t, int horizon) { return sigma_act_at(plan, t, horizon, generation); });
}

EvaluationRecord evaluate_fixed(const policy::Policy& policy, envs::Environment& env, double sigma_init,
                                double sigma_act, int episodes, envs::RewardVariant variant, Rng& rng) {
  if (episodes < 1) throw InvalidInput("episodes must be >= 1");
  return run_episodes(policy, env, sigma_init, episodes, variant, rng, [&](int, int) { return sigma_act; });
}

}  // namespace ievlab::variation
