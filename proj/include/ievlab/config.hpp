#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ievlab/envs.hpp"
#include "ievlab/es.hpp"
#include "ievlab/policy.hpp"
#include "ievlab/variation.hpp"

namespace ievlab::harness {

/// Complete description of one experiment. Serialized as JSON; unknown keys
/// are rejected so typos in sweep grids cannot pass silently.
///
/// Schema (all keys optional; defaults are the member initializers below):
///   env:       { id, theta_max, max_steps, dim, target_seed }
///   reward:    "V0" | "V5"
///   policy:    { hidden_dim, normalizer_episodes }
///   es:        { population_size, noise_std, learning_rate, beta1, beta2,
///                epsilon, weight_decay, generations, iev_instrumentation, init_std }
///   variation: { sigma_init, action_modality, sigma_act, sigma_act_max,
///                ramp_generations, episodes_per_eval, noise_family }
///   master_seed, replication_count, output_dir, checkpoint_every, workers
struct RunConfig {
  envs::EnvSpec env = envs::EnvSpec::defaults_for(envs::EnvId::kCartWalker);
  envs::RewardVariant reward = envs::RewardVariant::kV5;
  std::size_t hidden_dim = 50;
  int normalizer_episodes = 10;
  es::EsConfig es;
  variation::VariationPlan variation{.sigma_init = 0.1, .sigma_act = 0.01};
  /// Distribution family of every perturbation; only "gaussian" is implemented.
  std::string noise_family = "gaussian";
  std::uint64_t master_seed = 1;
  int replication_count = 10;
  std::string output_dir = "runs/default";
  /// Write a parameter checkpoint every K generations; 0 disables.
  int checkpoint_every = 0;
  /// Evaluation threads. Never changes results.
  int workers = 1;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);

/// Builds a config from JSON. A zero or missing variation.ramp_generations
/// resolves to es.generations. Errors name the offending field.
RunConfig from_json(const nlohmann::json& j);

/// Parses JSON text; syntax errors report line and column.
nlohmann::json parse_json(std::string_view text, std::string_view source);

RunConfig parse_run_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& config);

/// Sets a dotted key ("variation.sigma_act") inside a JSON tree.
void set_dotted(nlohmann::json& j, std::string_view dotted_key, const nlohmann::json& value);

/// Derives the master seed of one replication.
std::uint64_t replication_seed(std::uint64_t master_seed, int replication);

/// Network shape for a config's environment.
policy::MlpSpec mlp_for(const RunConfig& config);

/// Problem with the normalizer built from the replication's normalizer stream.
es::Problem make_problem(const RunConfig& config, std::uint64_t replication_seed);

}  // namespace ievlab::harness
