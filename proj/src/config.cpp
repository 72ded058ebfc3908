#include "ievlab/config.hpp"

#include <set>
#include <string>

#include "ievlab/csv.hpp"
#include "ievlab/error.hpp"

namespace ievlab::harness {

using nlohmann::json;

namespace {

// Reads fields of one JSON object and remembers which keys were consumed so
// leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(where() + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ParseError(field(key) + ": expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw ParseError(field(key) + ": expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (it->is_number_unsigned() == false && it->template get<long long>() < 0) {
            throw ParseError(field(key) + ": expected a non-negative integer");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ParseError(field(key) + ": expected a number");
      } else {
        if (!it->is_string()) throw ParseError(field(key) + ": expected a string");
      }
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ParseError(field(key) + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ParseError("unknown field '" + (path_.empty() ? key : path_ + "." + key) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
auto with_field(const std::string& field, Fn fn) {
  try {
    return fn();
  } catch (const InvalidInput& e) {
    throw ParseError(field + ": " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  env.validate();
  es.validate();
  variation.validate();
  if (hidden_dim == 0) throw InvalidInput("policy.hidden_dim must be >= 1");
  if (normalizer_episodes < 1) throw InvalidInput("policy.normalizer_episodes must be >= 1");
  if (noise_family != "gaussian") throw InvalidInput("only the gaussian noise family is implemented");
  if (replication_count < 1) throw InvalidInput("replication_count must be >= 1");
  if (checkpoint_every < 0) throw InvalidInput("checkpoint_every must be >= 0");
  if (workers < 1) throw InvalidInput("workers must be >= 1");
}

json to_json(const RunConfig& c) {
  return json{
      {"env",
       {{"id", envs::to_string(c.env.id)},
        {"theta_max", c.env.theta_max},
        {"max_steps", c.env.max_steps},
        {"dim", c.env.dim},
        {"target_seed", c.env.target_seed}}},
      {"reward", envs::to_string(c.reward)},
      {"policy", {{"hidden_dim", c.hidden_dim}, {"normalizer_episodes", c.normalizer_episodes}}},
      {"es",
       {{"population_size", c.es.population_size},
        {"noise_std", c.es.noise_std},
        {"learning_rate", c.es.learning_rate},
        {"beta1", c.es.beta1},
        {"beta2", c.es.beta2},
        {"epsilon", c.es.epsilon},
        {"weight_decay", c.es.weight_decay},
        {"generations", c.es.generations},
        {"iev_instrumentation", c.es.iev_instrumentation},
        {"init_std", c.es.init_std}}},
      {"variation",
       {{"sigma_init", c.variation.sigma_init},
        {"action_modality", variation::to_string(c.variation.action_modality)},
        {"sigma_act", c.variation.sigma_act},
        {"sigma_act_max", c.variation.sigma_act_max},
        {"ramp_generations", c.variation.ramp_generations},
        {"episodes_per_eval", c.variation.episodes_per_eval},
        {"noise_family", c.noise_family}}},
      {"master_seed", c.master_seed},
      {"replication_count", c.replication_count},
      {"output_dir", c.output_dir},
      {"checkpoint_every", c.checkpoint_every},
      {"workers", c.workers},
  };
}

RunConfig from_json(const json& j) {
  RunConfig c;
  ObjectReader root(j, "");

  if (const auto* e = root.child("env")) {
    ObjectReader r(*e, "env");
    std::string id(envs::to_string(c.env.id));
    r.read("id", id);
    const auto parsed = with_field("env.id", [&] { return envs::parse_env_id(id); });
    c.env = envs::EnvSpec::defaults_for(parsed);
    r.read("theta_max", c.env.theta_max);
    r.read("max_steps", c.env.max_steps);
    r.read("dim", c.env.dim);
    r.read("target_seed", c.env.target_seed);
    r.finish();
  }
  {
    std::string reward(envs::to_string(c.reward));
    root.read("reward", reward);
    c.reward = with_field("reward", [&] { return envs::parse_reward_variant(reward); });
  }
  if (const auto* p = root.child("policy")) {
    ObjectReader r(*p, "policy");
    r.read("hidden_dim", c.hidden_dim);
    r.read("normalizer_episodes", c.normalizer_episodes);
    r.finish();
  }
  if (const auto* e = root.child("es")) {
    ObjectReader r(*e, "es");
    r.read("population_size", c.es.population_size);
    r.read("noise_std", c.es.noise_std);
    r.read("learning_rate", c.es.learning_rate);
    r.read("beta1", c.es.beta1);
    r.read("beta2", c.es.beta2);
    r.read("epsilon", c.es.epsilon);
    r.read("weight_decay", c.es.weight_decay);
    r.read("generations", c.es.generations);
    r.read("iev_instrumentation", c.es.iev_instrumentation);
    r.read("init_std", c.es.init_std);
    r.finish();
  }
  c.variation.ramp_generations = 0;
  if (const auto* v = root.child("variation")) {
    ObjectReader r(*v, "variation");
    r.read("sigma_init", c.variation.sigma_init);
    std::string modality(variation::to_string(c.variation.action_modality));
    r.read("action_modality", modality);
    c.variation.action_modality =
        with_field("variation.action_modality", [&] { return variation::parse_modality(modality); });
    if (c.variation.action_modality != variation::Modality::kFixed && !v->contains("sigma_act")) {
      c.variation.sigma_act = 0.0;
    }
    r.read("sigma_act", c.variation.sigma_act);
    r.read("sigma_act_max", c.variation.sigma_act_max);
    r.read("ramp_generations", c.variation.ramp_generations);
    r.read("episodes_per_eval", c.variation.episodes_per_eval);
    r.read("noise_family", c.noise_family);
    r.finish();
  }
  if (c.variation.ramp_generations == 0) c.variation.ramp_generations = c.es.generations;

  root.read("master_seed", c.master_seed);
  root.read("replication_count", c.replication_count);
  root.read("output_dir", c.output_dir);
  root.read("checkpoint_every", c.checkpoint_every);
  root.read("workers", c.workers);
  root.finish();

  try {
    c.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(std::string("invalid config: ") + e.what());
  }
  return c;
}

json parse_json(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line:column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                     ": JSON syntax error");
  }
}

RunConfig parse_run_config(std::string_view text, std::string_view source) {
  const auto j = parse_json(text, source);
  try {
    return from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(std::string(source) + ": " + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw NotFound("config file not found: " + path.string());
  return parse_run_config(csv::read_file(path), path.string());
}

std::string dump_run_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

void set_dotted(json& j, std::string_view dotted_key, const json& value) {
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted_key.find('.', start);
    const std::string part(dotted_key.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (part.empty()) throw ParseError("malformed key '" + std::string(dotted_key) + "'");
    if (dot == std::string_view::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part)) (*node)[part] = json::object();
    node = &(*node)[part];
    if (!node->is_object()) throw ParseError("key '" + std::string(dotted_key) + "' crosses a non-object");
    start = dot + 1;
  }
}

std::uint64_t replication_seed(std::uint64_t master_seed, int replication) {
  return derive_seed(master_seed, Stream::kReplication, {static_cast<std::uint64_t>(replication)});
}

policy::MlpSpec mlp_for(const RunConfig& config) {
  const auto env = envs::make_environment(config.env);
  return {env->obs_dim(), config.hidden_dim, env->action_dim()};
}

es::Problem make_problem(const RunConfig& config, std::uint64_t rep_seed) {
  es::Problem p;
  p.env = config.env;
  p.reward = config.reward;
  auto env = envs::make_environment(config.env);
  p.mlp = {env->obs_dim(), config.hidden_dim, env->action_dim()};
  p.normalizer = policy::build_normalizer(*env, config.normalizer_episodes,
                                          derive_seed(rep_seed, Stream::kNormalizer), config.variation.sigma_init);
  return p;
}

}  // namespace ievlab::harness
