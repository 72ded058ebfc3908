#include "ievlab/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ievlab/csv.hpp"
#include "ievlab/error.hpp"

namespace ievlab::envs {

std::string_view to_string(EnvId id) {
  switch (id) {
    case EnvId::kLinearMover: return "linear_mover";
    case EnvId::kCartWalker: return "cart_walker";
    case EnvId::kNoiseOnly: return "noise_only";
    case EnvId::kStaticFunction: return "static_function";
  }
  return "?";
}

std::string_view to_string(RewardVariant v) { return v == RewardVariant::kV0 ? "V0" : "V5"; }

EnvId parse_env_id(std::string_view text) {
  for (auto id : {EnvId::kLinearMover, EnvId::kCartWalker, EnvId::kNoiseOnly, EnvId::kStaticFunction}) {
    if (to_string(id) == text) return id;
  }
  throw InvalidInput("unknown environment id '" + std::string(text) + "'");
}

RewardVariant parse_reward_variant(std::string_view text) {
  if (text == "V0") return RewardVariant::kV0;
  if (text == "V5") return RewardVariant::kV5;
  throw InvalidInput("unknown reward variant '" + std::string(text) + "' (expected V0 or V5)");
}

EnvSpec EnvSpec::defaults_for(EnvId id) {
  EnvSpec s;
  s.id = id;
  switch (id) {
    case EnvId::kLinearMover: s.max_steps = 200; break;
    case EnvId::kCartWalker: s.max_steps = 1000; break;
    case EnvId::kNoiseOnly:
    case EnvId::kStaticFunction: s.max_steps = 1; break;
  }
  return s;
}

void EnvSpec::validate() const {
  if (max_steps < 1) throw InvalidInput("max_steps must be >= 1");
  if (!(theta_max > 0.0 && theta_max < std::numbers::pi / 2)) {
    throw InvalidInput("theta_max must lie in (0, pi/2)");
  }
  if (id == EnvId::kStaticFunction && dim == 0) throw InvalidInput("static_function dim must be >= 1");
}

double episode_return(const EpisodeTotals& totals, RewardVariant variant) {
  return variant == RewardVariant::kV0 ? totals.progress + totals.alive : totals.progress;
}

double episode_return(std::span<const StepResult> trajectory, RewardVariant variant) {
  EpisodeTotals t;
  for (const auto& r : trajectory) t.add(r);
  return episode_return(t, variant);
}

std::vector<double> Environment::reset(Rng& rng, double sigma_init) {
  if (!std::isfinite(sigma_init) || sigma_init < 0.0) throw InvalidInput("sigma_init must be finite and >= 0");
  auto obs = do_reset(rng, sigma_init);
  active_ = true;
  step_index_ = 0;
  return obs;
}

StepResult Environment::step(std::span<const double> action, Rng& rng, double sigma_act) {
  if (!active_) throw ProtocolViolation("step called without an active episode");
  if (action.size() != action_dim()) {
    throw InvalidInput("action has " + std::to_string(action.size()) + " components, expected " +
                       std::to_string(action_dim()));
  }
  if (!std::isfinite(sigma_act) || sigma_act < 0.0) throw InvalidInput("sigma_act must be finite and >= 0");
  StepResult r;
  r.effective_action.resize(action.size());
  for (std::size_t i = 0; i < action.size(); ++i) {
    if (!std::isfinite(action[i])) throw InvalidInput("non-finite action component");
    r.effective_action[i] = std::clamp(action[i] + rng.normal(sigma_act), -1.0, 1.0);
  }
  auto tick = do_step(r.effective_action, rng);
  r.observation = std::move(tick.observation);
  r.progress_reward = tick.progress;
  r.alive_bonus = tick.fallen ? 0.0 : 1.0;
  r.step_index = step_index_++;
  r.done = tick.fallen || step_index_ >= max_steps();
  if (r.done) active_ = false;
  return r;
}

// linear_mover

LinearMover::LinearMover(EnvSpec spec) : spec_(spec) { spec_.validate(); }

std::vector<double> LinearMover::do_reset(Rng& rng, double sigma_init) {
  x_ = 0.0;
  v_ = rng.normal(sigma_init);
  return {v_};
}

Environment::Tick LinearMover::do_step(std::span<const double> a, Rng& /*rng*/) {
  v_ = 0.9 * v_ + 0.1 * a[0];
  x_ += v_;
  return {{v_}, v_, false};
}

// cart_walker

CartPoleState cart_pole_tick(const CartPoleState& s, double force) {
  constexpr double total_mass = kCartMass + kPoleMass;
  constexpr double pole_mass_length = kPoleMass * kPoleHalfLength;
  const double sin_t = std::sin(s.theta);
  const double cos_t = std::cos(s.theta);
  const double temp = (force + pole_mass_length * s.omega * s.omega * sin_t) / total_mass;
  const double theta_acc = (kGravity * sin_t - cos_t * temp) /
                           (kPoleHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass;
  CartPoleState n;
  n.x = s.x + kDt * s.v;
  n.v = s.v + kDt * x_acc;
  n.theta = s.theta + kDt * s.omega;
  n.omega = s.omega + kDt * theta_acc;
  return n;
}

CartWalker::CartWalker(EnvSpec spec) : spec_(spec) { spec_.validate(); }

std::vector<double> CartWalker::observe() const {
  return {s_.v, std::sin(s_.theta), std::cos(s_.theta), s_.omega};
}

std::vector<double> CartWalker::reset_to(const CartPoleState& s) {
  pending_state_ = true;
  s_ = s;
  Rng unused(0);
  return reset(unused, 0.0);
}

std::vector<double> CartWalker::do_reset(Rng& rng, double sigma_init) {
  if (pending_state_) {
    pending_state_ = false;
    return observe();
  }
  s_ = CartPoleState{};
  s_.theta = rng.normal(sigma_init);
  s_.omega = rng.normal(sigma_init);
  s_.v = rng.normal(sigma_init);
  return observe();
}

Environment::Tick CartWalker::do_step(std::span<const double> a, Rng& /*rng*/) {
  const double x_prev = s_.x;
  s_ = cart_pole_tick(s_, kForceScale * a[0]);
  return {observe(), s_.x - x_prev, std::abs(s_.theta) > spec_.theta_max};
}

// noise_only

NoiseOnly::NoiseOnly(EnvSpec spec) : spec_(spec) { spec_.validate(); }

std::vector<double> NoiseOnly::do_reset(Rng& /*rng*/, double /*sigma_init*/) { return {0.0}; }

Environment::Tick NoiseOnly::do_step(std::span<const double> /*a*/, Rng& rng) {
  return {{0.0}, rng.normal(), false};
}

// static_function

namespace {

std::vector<double> draw_target(const EnvSpec& spec) {
  Rng rng(derive_seed(spec.target_seed, Stream::kTarget));
  std::vector<double> t(spec.dim);
  for (auto& v : t) v = rng.uniform(-1.0, 1.0);
  return t;
}

}  // namespace

StaticFunction::StaticFunction(EnvSpec spec) : spec_(spec) {
  spec_.validate();
  target_ = draw_target(spec_);
}

StaticFunction::StaticFunction(EnvSpec spec, std::vector<double> target) : spec_(spec), target_(std::move(target)) {
  spec_.dim = target_.size();
  spec_.validate();
}

std::optional<double> StaticFunction::score_genotype(std::span<const double> genotype) const {
  if (genotype.size() != target_.size()) {
    throw InvalidInput("static_function genotype has length " + std::to_string(genotype.size()) +
                       ", expected " + std::to_string(target_.size()));
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < genotype.size(); ++i) {
    const double d = genotype[i] - target_[i];
    sq += d * d;
  }
  return -sq;
}

std::vector<double> StaticFunction::do_reset(Rng& /*rng*/, double /*sigma_init*/) { return {0.0}; }

Environment::Tick StaticFunction::do_step(std::span<const double> /*a*/, Rng& /*rng*/) { return {{0.0}, 0.0, false}; }

std::unique_ptr<Environment> make_environment(const EnvSpec& spec) {
  switch (spec.id) {
    case EnvId::kLinearMover: return std::make_unique<LinearMover>(spec);
    case EnvId::kCartWalker: return std::make_unique<CartWalker>(spec);
    case EnvId::kNoiseOnly: return std::make_unique<NoiseOnly>(spec);
    case EnvId::kStaticFunction: return std::make_unique<StaticFunction>(spec);
  }
  throw InvalidInput("unknown environment");
}

void write_trajectory_csv(std::ostream& out, const std::vector<std::string>& state_names,
                          const std::vector<std::vector<double>>& states, const Trajectory& trajectory) {
  if (states.size() != trajectory.size()) throw InvalidInput("one state per step is required");
  std::vector<std::string> header{"step"};
  header.insert(header.end(), state_names.begin(), state_names.end());
  const auto act_dim = trajectory.empty() ? 0 : trajectory.front().effective_action.size();
  for (std::size_t i = 0; i < act_dim; ++i) header.push_back("action_" + std::to_string(i));
  header.insert(header.end(), {"progress_reward", "alive_bonus"});
  out << csv::join(header) << '\n';
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const auto& r = trajectory[k];
    std::vector<std::string> row{std::to_string(r.step_index)};
    for (double v : states[k]) row.push_back(csv::format_double(v));
    for (double v : r.effective_action) row.push_back(csv::format_double(v));
    row.push_back(csv::format_double(r.progress_reward));
    row.push_back(csv::format_double(r.alive_bonus));
    out << csv::join(row) << '\n';
  }
}

}  // namespace ievlab::envs
