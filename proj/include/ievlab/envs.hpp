#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ievlab/rng.hpp"

namespace ievlab::envs {

enum class EnvId { kLinearMover, kCartWalker, kNoiseOnly, kStaticFunction };

/// V5 scores progress only; V0 adds +1 per surviving step.
enum class RewardVariant { kV5, kV0 };

std::string_view to_string(EnvId id);
std::string_view to_string(RewardVariant v);
EnvId parse_env_id(std::string_view text);
RewardVariant parse_reward_variant(std::string_view text);

struct EnvSpec {
  EnvId id = EnvId::kCartWalker;
  /// cart_walker fall threshold on |theta|, radians.
  double theta_max = 0.7;
  int max_steps = 1000;
  /// static_function genotype length.
  std::size_t dim = 20;
  /// static_function optimum is drawn uniformly in [-1, 1]^dim from this seed.
  std::uint64_t target_seed = 1;

  /// Per-environment defaults (max_steps differs between environments).
  static EnvSpec defaults_for(EnvId id);
  void validate() const;
};

inline constexpr double kHardThetaMax = 0.2;

struct StepResult {
  std::vector<double> observation;
  std::vector<double> effective_action;
  /// Forward displacement during this step.
  double progress_reward = 0.0;
  /// 1 if the agent is still standing after this step, else 0.
  double alive_bonus = 0.0;
  bool done = false;
  int step_index = 0;
};

using Trajectory = std::vector<StepResult>;

/// Episode totals accumulated step by step.
struct EpisodeTotals {
  double progress = 0.0;
  double alive = 0.0;
  int steps = 0;

  void add(const StepResult& r) {
    progress += r.progress_reward;
    alive += r.alive_bonus;
    ++steps;
  }
};

double episode_return(const EpisodeTotals& totals, RewardVariant variant);
double episode_return(std::span<const StepResult> trajectory, RewardVariant variant);

/// Common reset/step protocol. Subclasses implement the dynamics; the base
/// class owns action perturbation, clamping, horizon and the done flag.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;
  virtual std::size_t obs_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual std::vector<std::string> state_names() const = 0;
  virtual std::vector<double> state() const = 0;

  /// Fitness computed directly from the genotype, for problems without episodes.
  virtual std::optional<double> score_genotype(std::span<const double> /*genotype*/) const {
    return std::nullopt;
  }
  /// Genotype length required by score_genotype, if any.
  virtual std::optional<std::size_t> genotype_dim() const { return std::nullopt; }

  int max_steps() const { return spec().max_steps; }
  bool active() const noexcept { return active_; }

  /// Canonical initial state with each perturbable component offset by N(0, sigma_init).
  std::vector<double> reset(Rng& rng, double sigma_init);

  /// Applies clamp(action + N(0, sigma_act), -1, 1) and advances one tick.
  StepResult step(std::span<const double> action, Rng& rng, double sigma_act);

 protected:
  struct Tick {
    std::vector<double> observation;
    double progress = 0.0;
    bool fallen = false;
  };

  virtual std::vector<double> do_reset(Rng& rng, double sigma_init) = 0;
  virtual Tick do_step(std::span<const double> effective_action, Rng& rng) = 0;

 private:
  bool active_ = false;
  int step_index_ = 0;
};

std::unique_ptr<Environment> make_environment(const EnvSpec& spec);

// cart_walker dynamics, exposed for direct testing.
struct CartPoleState {
  double x = 0.0;
  double v = 0.0;
  double theta = 0.0;
  double omega = 0.0;
};

inline constexpr double kCartMass = 1.0;
inline constexpr double kPoleMass = 0.1;
inline constexpr double kPoleHalfLength = 0.5;
inline constexpr double kGravity = 9.8;
inline constexpr double kForceScale = 10.0;
inline constexpr double kDt = 0.02;

/// One explicit Euler tick of the cart-pole equations of motion.
CartPoleState cart_pole_tick(const CartPoleState& s, double force);

class LinearMover final : public Environment {
 public:
  explicit LinearMover(EnvSpec spec);
  const EnvSpec& spec() const override { return spec_; }
  std::size_t obs_dim() const override { return 1; }
  std::size_t action_dim() const override { return 1; }
  std::vector<std::string> state_names() const override { return {"x", "v"}; }
  std::vector<double> state() const override { return {x_, v_}; }

 protected:
  std::vector<double> do_reset(Rng& rng, double sigma_init) override;
  Tick do_step(std::span<const double> a, Rng& rng) override;

 private:
  EnvSpec spec_;
  double x_ = 0.0;
  double v_ = 0.0;
};

class CartWalker final : public Environment {
 public:
  explicit CartWalker(EnvSpec spec);
  const EnvSpec& spec() const override { return spec_; }
  std::size_t obs_dim() const override { return 4; }
  std::size_t action_dim() const override { return 1; }
  std::vector<std::string> state_names() const override { return {"x", "v", "theta", "omega"}; }
  std::vector<double> state() const override { return {s_.x, s_.v, s_.theta, s_.omega}; }

  /// Places the environment in an arbitrary state and starts an episode there.
  std::vector<double> reset_to(const CartPoleState& s);

 protected:
  std::vector<double> do_reset(Rng& rng, double sigma_init) override;
  Tick do_step(std::span<const double> a, Rng& rng) override;

 private:
  std::vector<double> observe() const;

  EnvSpec spec_;
  CartPoleState s_;
  bool pending_state_ = false;
};

/// Episode return is a standard-normal draw that ignores the policy.
class NoiseOnly final : public Environment {
 public:
  explicit NoiseOnly(EnvSpec spec);
  const EnvSpec& spec() const override { return spec_; }
  std::size_t obs_dim() const override { return 1; }
  std::size_t action_dim() const override { return 1; }
  std::vector<std::string> state_names() const override { return {}; }
  std::vector<double> state() const override { return {}; }

 protected:
  std::vector<double> do_reset(Rng& rng, double sigma_init) override;
  Tick do_step(std::span<const double> a, Rng& rng) override;

 private:
  EnvSpec spec_;
};

/// fitness(theta) = -||theta - target||^2 over the raw genotype. The episode
/// interface is a single inert step.
class StaticFunction final : public Environment {
 public:
  explicit StaticFunction(EnvSpec spec);
  StaticFunction(EnvSpec spec, std::vector<double> target);
  const EnvSpec& spec() const override { return spec_; }
  std::size_t obs_dim() const override { return 1; }
  std::size_t action_dim() const override { return 1; }
  std::vector<std::string> state_names() const override { return {}; }
  std::vector<double> state() const override { return {}; }
  std::optional<double> score_genotype(std::span<const double> genotype) const override;
  std::optional<std::size_t> genotype_dim() const override { return target_.size(); }
  const std::vector<double>& target() const noexcept { return target_; }

 protected:
  std::vector<double> do_reset(Rng& rng, double sigma_init) override;
  Tick do_step(std::span<const double> a, Rng& rng) override;

 private:
  EnvSpec spec_;
  std::vector<double> target_;
};

/// Writes one CSV row per step: step, state components, effective action, rewards.
void write_trajectory_csv(std::ostream& out, const std::vector<std::string>& state_names,
                          const std::vector<std::vector<double>>& states, const Trajectory& trajectory);

}  // namespace ievlab::envs
