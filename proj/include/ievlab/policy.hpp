#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ievlab/envs.hpp"

namespace ievlab::policy {

/// Three-layer tanh network: obs -> hidden -> action.
struct MlpSpec {
  std::size_t obs_dim = 1;
  std::size_t hidden_dim = 50;
  std::size_t action_dim = 1;

  void validate() const;
  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

std::size_t param_count(const MlpSpec& spec);

/// Flat genotype. Layout: W1 (hidden x obs, row-major), b1, W2 (action x hidden), b2.
struct ParameterVector {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  /// Throws InvalidInput if any entry is non-finite.
  void validate() const;
  friend bool operator==(const ParameterVector&, const ParameterVector&) = default;
};

inline constexpr double kStdFloor = 1e-2;

/// Frozen reference statistics used to normalize observations.
struct ObsNormalizer {
  std::vector<double> mean;
  std::vector<double> std;
  std::size_t reference_count = 0;

  static ObsNormalizer identity(std::size_t obs_dim);
  friend bool operator==(const ObsNormalizer&, const ObsNormalizer&) = default;
};

/// Evaluates the network with a reusable scratch buffer. Holds references;
/// the spec, parameters and normalizer must outlive it.
class Controller {
 public:
  Controller(const MlpSpec& spec, std::span<const double> params, const ObsNormalizer& normalizer);
  std::span<const double> act(std::span<const double> obs);

 private:
  const MlpSpec& spec_;
  std::span<const double> params_;
  const ObsNormalizer& normalizer_;
  std::vector<double> input_;
  std::vector<double> hidden_;
  std::vector<double> action_;
};

std::vector<double> forward(const MlpSpec& spec, const ParameterVector& params, const ObsNormalizer& normalizer,
                            std::span<const double> obs);

/// Runs `episodes` episodes with uniform random actions in [-1, 1] and
/// returns per-dimension mean and population std (floored at kStdFloor).
ObsNormalizer build_normalizer(envs::Environment& env, int episodes, std::uint64_t rng_seed,
                               double sigma_init = 0.0);

/// Everything a rollout needs to act.
struct Policy {
  MlpSpec spec;
  ParameterVector params;
  ObsNormalizer normalizer;
};

/// Little-endian uint64 length followed by little-endian IEEE-754 doubles.
void write_parameters(const std::filesystem::path& path, const ParameterVector& params);
ParameterVector read_parameters(const std::filesystem::path& path);

}  // namespace ievlab::policy
