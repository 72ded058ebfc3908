#include "ievlab/policy.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "ievlab/csv.hpp"
#include "ievlab/error.hpp"

namespace ievlab::policy {

void MlpSpec::validate() const {
  if (obs_dim == 0 || hidden_dim == 0 || action_dim == 0) throw InvalidInput("MLP dimensions must be positive");
}

std::size_t param_count(const MlpSpec& spec) {
  return spec.obs_dim * spec.hidden_dim + spec.hidden_dim + spec.hidden_dim * spec.action_dim + spec.action_dim;
}

void ParameterVector::validate() const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw InvalidInput("non-finite parameter at index " + std::to_string(i));
  }
}

ObsNormalizer ObsNormalizer::identity(std::size_t obs_dim) {
  return {std::vector<double>(obs_dim, 0.0), std::vector<double>(obs_dim, 1.0), 0};
}

Controller::Controller(const MlpSpec& spec, std::span<const double> params, const ObsNormalizer& normalizer)
    : spec_(spec), params_(params), normalizer_(normalizer), input_(spec.obs_dim), hidden_(spec.hidden_dim), action_(spec.action_dim) {
  spec.validate();
  if (params.size() != param_count(spec)) {
    throw InvalidInput("parameter vector has length " + std::to_string(params.size()) + ", network needs " +
                       std::to_string(param_count(spec)));
  }
  if (normalizer.mean.size() != spec.obs_dim || normalizer.std.size() != spec.obs_dim) {
    throw InvalidInput("normalizer dimension does not match obs_dim");
  }
}

std::span<const double> Controller::act(std::span<const double> obs) {
  const auto n_in = spec_.obs_dim;
  const auto n_hid = spec_.hidden_dim;
  const auto n_out = spec_.action_dim;
  if (obs.size() != n_in) {
    throw InvalidInput("observation has " + std::to_string(obs.size()) + " components, expected " +
                       std::to_string(n_in));
  }
  const double* w1 = params_.data();
  const double* b1 = w1 + n_hid * n_in;
  const double* w2 = b1 + n_hid;
  const double* b2 = w2 + n_out * n_hid;

  for (std::size_t i = 0; i < n_in; ++i) input_[i] = (obs[i] - normalizer_.mean[i]) / normalizer_.std[i];
  for (std::size_t h = 0; h < n_hid; ++h) {
    double acc = b1[h];
    for (std::size_t i = 0; i < n_in; ++i) acc += w1[h * n_in + i] * input_[i];
    hidden_[h] = std::tanh(acc);
  }
  for (std::size_t o = 0; o < n_out; ++o) {
    double acc = b2[o];
    for (std::size_t h = 0; h < n_hid; ++h) acc += w2[o * n_hid + h] * hidden_[h];
    action_[o] = std::tanh(acc);
  }
  return action_;
}

std::vector<double> forward(const MlpSpec& spec, const ParameterVector& params, const ObsNormalizer& normalizer,
                            std::span<const double> obs) {
  Controller c(spec, params.values, normalizer);
  const auto a = c.act(obs);
  return {a.begin(), a.end()};
}

ObsNormalizer build_normalizer(envs::Environment& env, int episodes, std::uint64_t rng_seed, double sigma_init) {
  if (episodes < 1) throw InvalidInput("normalizer needs at least one episode");
  const auto dim = env.obs_dim();
  Rng rng(rng_seed);
  std::vector<std::vector<double>> seen;
  std::vector<double> action(env.action_dim());
  for (int e = 0; e < episodes; ++e) {
    seen.push_back(env.reset(rng, sigma_init));
    bool done = false;
    while (!done) {
      for (auto& a : action) a = rng.uniform(-1.0, 1.0);
      auto r = env.step(action, rng, 0.0);
      done = r.done;
      seen.push_back(std::move(r.observation));
    }
  }
  const auto n = static_cast<double>(seen.size());
  ObsNormalizer out{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0), seen.size()};
  for (const auto& o : seen)
    for (std::size_t i = 0; i < dim; ++i) out.mean[i] += o[i];
  for (auto& m : out.mean) m /= n;
  for (const auto& o : seen)
    for (std::size_t i = 0; i < dim; ++i) out.std[i] += (o[i] - out.mean[i]) * (o[i] - out.mean[i]);
  for (auto& s : out.std) s = std::max(std::sqrt(s / n), kStdFloor);
  return out;
}

namespace {

template <typename T>
std::array<char, 8> to_le_bytes(T value) {
  static_assert(sizeof(T) == 8);
  std::array<char, 8> b{};
  std::memcpy(b.data(), &value, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  return b;
}

template <typename T>
T from_le_bytes(const char* p) {
  std::array<char, 8> b{};
  std::memcpy(b.data(), p, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
  T value;
  std::memcpy(&value, b.data(), 8);
  return value;
}

}  // namespace

void write_parameters(const std::filesystem::path& path, const ParameterVector& params) {
  std::string blob;
  blob.reserve(8 * (params.size() + 1));
  const auto n = to_le_bytes<std::uint64_t>(params.size());
  blob.append(n.data(), n.size());
  for (double v : params.values) {
    const auto b = to_le_bytes<double>(v);
    blob.append(b.data(), b.size());
  }
  csv::write_file_atomic(path, blob);
}

ParameterVector read_parameters(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw NotFound("parameter file not found: " + path.string());
  const auto blob = csv::read_file(path);
  if (blob.size() < 8) throw FormatError(path.string() + ": truncated length header");
  const auto n = from_le_bytes<std::uint64_t>(blob.data());
  if (blob.size() != 8 + 8 * n) {
    throw FormatError(path.string() + ": header declares " + std::to_string(n) + " values but file holds " +
                      std::to_string((blob.size() - 8) / 8));
  }
  ParameterVector p;
  p.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.values[i] = from_le_bytes<double>(blob.data() + 8 + 8 * i);
  return p;
}

}  // namespace ievlab::policy
