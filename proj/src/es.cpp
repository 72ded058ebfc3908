#include "ievlab/es.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>

#include "ievlab/parallel.hpp"

namespace ievlab::es {

void EsConfig::validate() const {
  if (population_size < 2 || population_size % 2 != 0) {
    throw InvalidInput("population_size must be a positive even number >= 2");
  }
  auto positive = [](double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0) throw InvalidInput(std::string(name) + " must be finite and > 0");
  };
  positive(noise_std, "noise_std");
  positive(learning_rate, "learning_rate");
  positive(epsilon, "epsilon");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidInput("adam betas must lie in [0, 1)");
  }
  if (!std::isfinite(weight_decay) || weight_decay < 0.0) throw InvalidInput("weight_decay must be >= 0");
  if (!std::isfinite(init_std) || init_std < 0.0) throw InvalidInput("init_std must be >= 0");
  if (generations < 1) throw InvalidInput("generations must be >= 1");
}

Perturbations sample_perturbations(std::size_t dim, int s, Rng& rng) {
  if (s < 2 || s % 2 != 0) throw InvalidInput("population size must be even, got " + std::to_string(s));
  Perturbations out;
  out.reserve(static_cast<std::size_t>(s));
  for (int k = 0; k < s / 2; ++k) {
    std::vector<double> e(dim);
    for (auto& x : e) x = rng.normal();
    std::vector<double> neg(dim);
    std::transform(e.begin(), e.end(), neg.begin(), [](double x) { return -x; });
    out.push_back(std::move(e));
    out.push_back(std::move(neg));
  }
  return out;
}

std::vector<double> centered_ranks(std::span<const double> fitness) {
  const auto s = fitness.size();
  if (s < 2) throw InvalidInput("centered_ranks needs at least 2 values");
  for (double f : fitness) {
    if (!std::isfinite(f)) throw InvalidInput("non-finite fitness");
  }
  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });

  // u(rank) = (2 * rank - (s - 1)) / (2 * (s - 1)); a tie group spanning
  // ranks [lo, hi] uses rank (lo + hi) / 2. Integer numerators keep
  // u(r) == -u(s - 1 - r) bit-exactly.
  const auto s1 = static_cast<long long>(s) - 1;
  const double denom = 2.0 * static_cast<double>(s1);
  std::vector<double> u(s);
  std::size_t lo = 0;
  while (lo < s) {
    std::size_t hi = lo;
    while (hi + 1 < s && fitness[order[hi + 1]] == fitness[order[lo]]) ++hi;
    const auto numer = static_cast<long long>(lo + hi) - s1;
    const double value = static_cast<double>(numer) / denom;
    for (std::size_t r = lo; r <= hi; ++r) u[order[r]] = value;
    lo = hi + 1;
  }
  return u;
}

std::vector<double> gradient_estimate(std::span<const double> utilities, const Perturbations& perturbations,
                                      double sigma) {
  if (utilities.size() != perturbations.size() || perturbations.empty()) {
    throw InvalidInput("utilities and perturbations differ in count");
  }
  const auto dim = perturbations.front().size();
  std::vector<double> g(dim, 0.0);
  for (std::size_t i = 0; i < perturbations.size(); ++i) {
    if (perturbations[i].size() != dim) throw InvalidInput("perturbations differ in length");
    const double u = utilities[i];
    for (std::size_t j = 0; j < dim; ++j) g[j] += u * perturbations[i][j];
  }
  const double scale = 1.0 / (static_cast<double>(perturbations.size()) * sigma);
  for (auto& x : g) x *= scale;
  return g;
}

std::vector<double> apply_weight_decay(std::span<const double> g, std::span<const double> theta, double wd) {
  if (g.size() != theta.size()) throw InvalidInput("gradient and parameters differ in length");
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i] - wd * theta[i];
  return out;
}

void adam_ascend(std::vector<double>& theta, std::span<const double> g_total, AdamState& state,
                 const EsConfig& config) {
  if (g_total.size() != theta.size() || state.m.size() != theta.size() || state.v.size() != theta.size()) {
    throw InvalidInput("adam shapes do not match the parameter vector");
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g_total[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g_total[i] * g_total[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    theta[i] += config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void update_center(std::vector<double>& theta, AdamState& state, const Perturbations& perturbations,
                   std::span<const double> fitness, const EsConfig& config) {
  const auto utilities = centered_ranks(fitness);
  const auto g = gradient_estimate(utilities, perturbations, config.noise_std);
  const auto g_total = apply_weight_decay(g, theta, config.weight_decay);
  adam_ascend(theta, g_total, state, config);
}

std::size_t genotype_dim(const Problem& problem) {
  const auto env = envs::make_environment(problem.env);
  if (const auto d = env->genotype_dim()) return *d;
  return policy::param_count(problem.mlp);
}

EvolveResult evolve(const Problem& problem, const EsConfig& config, const variation::VariationPlan& plan,
                    std::uint64_t master_seed, int workers, const GenerationCallback& on_generation) {
  config.validate();
  plan.validate();
  const auto dim = genotype_dim(problem);
  const auto s = static_cast<std::size_t>(config.population_size);
  const int n_workers = std::max(1, workers);

  std::vector<std::unique_ptr<envs::Environment>> envs_per_worker;
  for (int w = 0; w < n_workers; ++w) envs_per_worker.push_back(envs::make_environment(problem.env));
  const int horizon = envs_per_worker.front()->max_steps();

  std::vector<double> theta(dim, 0.0);
  {
    Rng init(derive_seed(master_seed, Stream::kInit));
    for (auto& x : theta) x = init.normal(config.init_std);
  }
  AdamState adam(dim);

  EvolveResult result;
  result.best_fitness = -std::numeric_limits<double>::infinity();
  std::vector<double> fit1(s), fit2(s);
  const std::size_t passes = config.iev_instrumentation ? 2 : 1;

  auto evaluate_one = [&](envs::Environment& env, std::span<const double> genotype, Stream stream, int g,
                          std::uint64_t key) {
    policy::Policy pol{problem.mlp, {{genotype.begin(), genotype.end()}}, problem.normalizer};
    Rng rng(derive_seed(master_seed, stream, {static_cast<std::uint64_t>(g), key}));
    return variation::evaluate(pol, env, plan, problem.reward, g, rng).fitness;
  };

  for (int g = 0; g < config.generations; ++g) {
    try {
      Rng sampling(derive_seed(master_seed, Stream::kSampling, {static_cast<std::uint64_t>(g)}));
      const auto eps = sample_perturbations(dim, config.population_size, sampling);

      parallel_for(s * passes, n_workers, [&](std::size_t worker, std::size_t item) {
        const auto i = item % s;
        const bool second = item >= s;
        std::vector<double> candidate(dim);
        for (std::size_t j = 0; j < dim; ++j) candidate[j] = theta[j] + config.noise_std * eps[i][j];
        const double f = evaluate_one(*envs_per_worker[worker], candidate, second ? Stream::kPass2 : Stream::kPass1,
                                      g, i);
        (second ? fit2 : fit1)[i] = f;
      });

      GenerationLog row;
      row.generation = g;
      row.best_fitness = *std::max_element(fit1.begin(), fit1.end());
      row.mean_fitness = std::accumulate(fit1.begin(), fit1.end(), 0.0) / static_cast<double>(s);
      if (config.iev_instrumentation) {
        const auto sample = metrics::iev_from_double_eval(fit1, fit2, g);
        row.iev = sample.iev;
        row.snr = sample.snr;
      }
      row.sigma_act_effective = variation::sigma_act_effective(plan, horizon, g);

      update_center(theta, adam, eps, fit1, config);

      row.center_eval_fitness = evaluate_one(*envs_per_worker.front(), theta, Stream::kCenter, g, 0);
      if (row.center_eval_fitness > result.best_fitness) {
        result.best_fitness = row.center_eval_fitness;
        result.best.values = theta;
      }
      result.log.push_back(row);
      if (on_generation) on_generation(row, theta);
    } catch (const Error& e) {
      throw RunAborted("generation " + std::to_string(g) + ": " + e.what(), result.log);
    }
  }
  result.final_center.values = theta;
  return result;
}

}  // namespace ievlab::es
