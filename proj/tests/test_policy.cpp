#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "ievlab/error.hpp"
#include "ievlab/policy.hpp"

using namespace ievlab;
using namespace ievlab::policy;

namespace {

// Emits a fixed per-episode observation pattern for normalizer tests.
class ScriptedEnv final : public envs::Environment {
 public:
  ScriptedEnv(std::vector<std::vector<double>> pattern) : pattern_(std::move(pattern)) {
    spec_.max_steps = static_cast<int>(pattern_.size()) - 1;
  }
  const envs::EnvSpec& spec() const override { return spec_; }
  std::size_t obs_dim() const override { return pattern_.front().size(); }
  std::size_t action_dim() const override { return 1; }
  std::vector<std::string> state_names() const override { return {}; }
  std::vector<double> state() const override { return {}; }

 protected:
  std::vector<double> do_reset(Rng&, double) override {
    k_ = 0;
    return pattern_[0];
  }
  Tick do_step(std::span<const double>, Rng&) override { return {pattern_[++k_], 0.0, false}; }

 private:
  envs::EnvSpec spec_;
  std::vector<std::vector<double>> pattern_;
  std::size_t k_ = 0;
};

}  // namespace

TEST_CASE("param_count") {
  CHECK(param_count({4, 50, 1}) == 301);
  CHECK(param_count({1, 1, 1}) == 4);
  CHECK(param_count({4, 50, 2}) == 352);
}

TEST_CASE("forward: zero parameters give zero action") {
  const MlpSpec spec{4, 50, 2};
  const ParameterVector params{std::vector<double>(param_count(spec), 0.0)};
  const auto a = forward(spec, params, ObsNormalizer::identity(4), std::vector<double>{1.0, -3.0, 0.5, 9.0});
  CHECK(a == std::vector<double>{0.0, 0.0});
}

TEST_CASE("forward: 1-1-1 network hand evaluation") {
  // Layout W1, b1, W2, b2.
  const MlpSpec spec{1, 1, 1};
  const ParameterVector params{{1.0, 0.0, 1.0, 0.0}};
  const auto a = forward(spec, params, ObsNormalizer::identity(1), std::vector<double>{0.5});
  REQUIRE(a.size() == 1);
  CHECK(a[0] == doctest::Approx(0.4318081805950961).epsilon(1e-14));
}

TEST_CASE("forward: normalization is applied before the first layer") {
  const MlpSpec spec{1, 1, 1};
  const ParameterVector params{{1.0, 0.0, 1.0, 0.0}};
  const ObsNormalizer norm{{2.0}, {4.0}, 10};
  // (4 - 2) / 4 = 0.5
  CHECK(forward(spec, params, norm, std::vector<double>{4.0})[0] ==
        forward(spec, params, ObsNormalizer::identity(1), std::vector<double>{0.5})[0]);
}

TEST_CASE("forward: output bounded and deterministic for arbitrary inputs") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> wide(0.0, 5.0);
  const MlpSpec spec{4, 50, 3};
  for (int trial = 0; trial < 200; ++trial) {
    ParameterVector p{std::vector<double>(param_count(spec))};
    for (auto& x : p.values) x = wide(gen);
    std::vector<double> obs(4);
    for (auto& x : obs) x = wide(gen);
    const auto a = forward(spec, p, ObsNormalizer::identity(4), obs);
    REQUIRE(a.size() == 3);
    for (double v : a) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
    CHECK(forward(spec, p, ObsNormalizer::identity(4), obs) == a);
  }
}

TEST_CASE("forward: dimension mismatches are rejected") {
  const MlpSpec spec{2, 3, 1};
  const ParameterVector ok{std::vector<double>(param_count(spec), 0.1)};
  const ParameterVector short_params{std::vector<double>(param_count(spec) - 1, 0.1)};
  CHECK_THROWS_AS(forward(spec, short_params, ObsNormalizer::identity(2), std::vector<double>{0, 0}), InvalidInput);
  CHECK_THROWS_AS(forward(spec, ok, ObsNormalizer::identity(2), std::vector<double>{0}), InvalidInput);
  CHECK_THROWS_AS(forward(spec, ok, ObsNormalizer::identity(3), std::vector<double>{0, 0}), InvalidInput);
}

TEST_CASE("build_normalizer statistics") {
  SUBCASE("constant observation hits the std floor") {
    ScriptedEnv env({{3.0, -1.0}, {3.0, -1.0}, {3.0, -1.0}});
    const auto n = build_normalizer(env, 4, 9);
    CHECK(n.mean == std::vector<double>{3.0, -1.0});
    CHECK(n.std == std::vector<double>{kStdFloor, kStdFloor});
    CHECK(n.reference_count == 12);
  }
  SUBCASE("values {0, 2} equally often give mean 1 std 1") {
    ScriptedEnv env({{0.0}, {2.0}, {0.0}, {2.0}});
    const auto n = build_normalizer(env, 3, 9);
    CHECK(n.mean[0] == 1.0);
    CHECK(n.std[0] == 1.0);
  }
  SUBCASE("same seed gives a bit-identical normalizer") {
    auto env = envs::make_environment(envs::EnvSpec::defaults_for(envs::EnvId::kCartWalker));
    const auto a = build_normalizer(*env, 3, 1234, 0.05);
    const auto b = build_normalizer(*env, 3, 1234, 0.05);
    CHECK(a == b);
    const auto c = build_normalizer(*env, 3, 1235, 0.05);
    CHECK_FALSE(a == c);
    for (double s : a.std) CHECK(s >= kStdFloor);
  }
  SUBCASE("episodes must be positive") {
    ScriptedEnv env({{0.0}, {1.0}});
    CHECK_THROWS_AS(build_normalizer(env, 0, 1), InvalidInput);
  }
}

TEST_CASE("parameter files round-trip bit-exactly and validate their header") {
  const auto dir = std::filesystem::temp_directory_path() / "ievlab_policy_test";
  std::filesystem::create_directories(dir);
  std::mt19937_64 gen(2);
  std::normal_distribution<double> n01;
  ParameterVector p{std::vector<double>(301)};
  for (auto& x : p.values) x = n01(gen);
  p.values[0] = -0.0;
  p.values[1] = 1e-310;
  write_parameters(dir / "p.bin", p);
  const auto q = read_parameters(dir / "p.bin");
  REQUIRE(q.size() == p.size());
  CHECK(std::memcmp(q.values.data(), p.values.data(), 8 * p.size()) == 0);
  CHECK(std::filesystem::file_size(dir / "p.bin") == 8 + 8 * 301);

  {
    std::ofstream bad(dir / "bad.bin", std::ios::binary);
    const char header[8] = {5, 0, 0, 0, 0, 0, 0, 0};
    bad.write(header, 8);
    bad.write("0123456789abcdef", 16);
  }
  CHECK_THROWS_AS(read_parameters(dir / "bad.bin"), FormatError);
  CHECK_THROWS_AS(read_parameters(dir / "missing.bin"), NotFound);
  std::filesystem::remove_all(dir);
}

TEST_CASE("ParameterVector rejects non-finite entries") {
  CHECK_NOTHROW((ParameterVector{{1.0, 2.0}}.validate()));
  CHECK_THROWS_AS((ParameterVector{{1.0, NAN}}.validate()), InvalidInput);
}
