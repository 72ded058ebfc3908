#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ievlab/envs.hpp"
#include "ievlab/error.hpp"
#include "ievlab/metrics.hpp"
#include "ievlab/policy.hpp"
#include "ievlab/rng.hpp"
#include "ievlab/variation.hpp"

namespace ievlab::es {

struct EsConfig {
  int population_size = 40;
  double noise_std = 0.05;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.005;
  int generations = 100;
  bool iev_instrumentation = true;
  /// Std of the Gaussian used to draw the initial center; 0 starts at the origin.
  double init_std = 0.1;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;

  AdamState() = default;
  explicit AdamState(std::size_t dim) : m(dim, 0.0), v(dim, 0.0) {}
};

struct GenerationLog {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  std::optional<double> iev;
  std::optional<double> snr;
  double sigma_act_effective = 0.0;
  double center_eval_fitness = 0.0;

  friend bool operator==(const GenerationLog&, const GenerationLog&) = default;
};

using Perturbations = std::vector<std::vector<double>>;

/// s/2 standard-normal draws followed each by its negation: [e1, -e1, e2, -e2, ...].
Perturbations sample_perturbations(std::size_t dim, int s, Rng& rng);

/// Rank-based utilities k/(s-1) - 0.5. Tied fitness values share the mean
/// utility of the ranks they span, so a flat landscape maps to all zeros.
std::vector<double> centered_ranks(std::span<const double> fitness);

/// g = 1/(s * sigma) * sum_i u_i * eps_i.
std::vector<double> gradient_estimate(std::span<const double> utilities, const Perturbations& perturbations,
                                      double sigma);

/// g - wd * theta.
std::vector<double> apply_weight_decay(std::span<const double> g, std::span<const double> theta, double wd);

/// Bias-corrected Adam step taken as ascent: theta += lr * m_hat / (sqrt(v_hat) + eps).
void adam_ascend(std::vector<double>& theta, std::span<const double> g_total, AdamState& state,
                 const EsConfig& config);

/// One parameter update from evaluated perturbations: shaping, gradient,
/// decay and Adam. Shared by evolve() and tests.
void update_center(std::vector<double>& theta, AdamState& state, const Perturbations& perturbations,
                   std::span<const double> fitness, const EsConfig& config);

/// The optimisation problem: environment, reward and the controller that
/// maps genotypes to behaviour.
struct Problem {
  envs::EnvSpec env;
  envs::RewardVariant reward = envs::RewardVariant::kV5;
  policy::MlpSpec mlp;
  policy::ObsNormalizer normalizer;
};

/// Genotype length: the environment's own when it scores genotypes
/// directly, otherwise the network parameter count.
std::size_t genotype_dim(const Problem& problem);

struct EvolveResult {
  /// Center with the highest center evaluation across generations.
  policy::ParameterVector best;
  double best_fitness = 0.0;
  policy::ParameterVector final_center;
  std::vector<GenerationLog> log;
};

/// Raised when an evaluation fails mid-run; carries the generations completed so far.
class RunAborted : public Error {
 public:
  RunAborted(const std::string& what, std::vector<GenerationLog> partial)
      : Error("run_aborted", what), partial_(std::move(partial)) {}
  const std::vector<GenerationLog>& partial_log() const noexcept { return partial_; }

 private:
  std::vector<GenerationLog> partial_;
};

using GenerationCallback = std::function<void(const GenerationLog&, std::span<const double> center)>;

EvolveResult evolve(const Problem& problem, const EsConfig& config, const variation::VariationPlan& plan,
                    std::uint64_t master_seed, int workers = 1, const GenerationCallback& on_generation = {});

}  // namespace ievlab::es
