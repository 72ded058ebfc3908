#include "ievlab/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include "ievlab/csv.hpp"
#include "ievlab/error.hpp"
#include "ievlab/metrics.hpp"

namespace ievlab::harness {

using nlohmann::json;

namespace {

std::string fmt(double v) { return csv::format_double(v); }

std::string opt_fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

void write_json(const fs::path& path, const json& j) { csv::write_file_atomic(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  if (!fs::exists(path)) throw NotFound("file not found: " + path.string());
  return parse_json(csv::read_file(path), path.string());
}

std::optional<double> mean_of_ievs(const std::vector<es::GenerationLog>& log) {
  if (log.empty() || !log.front().iev) return std::nullopt;
  double sum = 0.0;
  for (const auto& row : log) sum += row.iev.value_or(0.0);
  return sum / static_cast<double>(log.size());
}

}  // namespace

std::string format_log_csv(const std::vector<es::GenerationLog>& log) {
  std::string out = std::string(kLogHeader) + "\n";
  for (const auto& r : log) {
    out += csv::join({std::to_string(r.generation), fmt(r.best_fitness), fmt(r.mean_fitness), opt_fmt(r.iev),
                      opt_fmt(r.snr), fmt(r.sigma_act_effective), fmt(r.center_eval_fitness)});
    out += '\n';
  }
  return out;
}

std::vector<es::GenerationLog> parse_log_csv(const fs::path& path) {
  if (!fs::exists(path)) throw NotFound("log not found: " + path.string());
  const auto table = csv::read(path);
  if (csv::join(table.header) != kLogHeader) throw FormatError(path.string() + ": unexpected log header");
  std::vector<es::GenerationLog> log;
  for (const auto& row : table.rows) {
    es::GenerationLog r;
    r.generation = static_cast<int>(csv::parse_double(row[0]));
    r.best_fitness = csv::parse_double(row[1]);
    r.mean_fitness = csv::parse_double(row[2]);
    if (!row[3].empty()) r.iev = csv::parse_double(row[3]);
    if (!row[4].empty()) r.snr = csv::parse_double(row[4]);
    r.sigma_act_effective = csv::parse_double(row[5]);
    r.center_eval_fitness = csv::parse_double(row[6]);
    log.push_back(r);
  }
  return log;
}

fs::path replication_dir(const fs::path& run_dir, int replication) {
  char name[32];
  std::snprintf(name, sizeof name, "rep_%03d", replication);
  return run_dir / name;
}

RunSummary run_experiment(const RunConfig& config, const fs::path& run_dir, int workers) {
  config.validate();
  fs::create_directories(run_dir);
  csv::write_file_atomic(run_dir / "config.json", dump_run_config(config));

  RunSummary summary;
  json reps = json::array();
  for (int r = 0; r < config.replication_count; ++r) {
    const auto seed = replication_seed(config.master_seed, r);
    const auto dir = replication_dir(run_dir, r);
    fs::create_directories(dir);
    const auto problem = make_problem(config, seed);
    write_json(dir / "policy_meta.json",
               {{"env", envs::to_string(config.env.id)},
                {"obs_dim", problem.mlp.obs_dim},
                {"hidden_dim", problem.mlp.hidden_dim},
                {"action_dim", problem.mlp.action_dim},
                {"genotype_dim", es::genotype_dim(problem)},
                {"normalizer",
                 {{"mean", problem.normalizer.mean},
                  {"std", problem.normalizer.std},
                  {"reference_count", problem.normalizer.reference_count}}}});

    auto on_generation = [&](const es::GenerationLog& row, std::span<const double> center) {
      if (config.checkpoint_every > 0 && (row.generation + 1) % config.checkpoint_every == 0) {
        char name[32];
        std::snprintf(name, sizeof name, "ckpt_%06d.bin", row.generation + 1);
        policy::write_parameters(dir / name, {{center.begin(), center.end()}});
      }
    };

    es::EvolveResult result;
    try {
      result = es::evolve(problem, config.es, config.variation, seed, workers, on_generation);
    } catch (const es::RunAborted& e) {
      csv::write_file_atomic(dir / "log.csv", format_log_csv(e.partial_log()));
      throw;
    }
    csv::write_file_atomic(dir / "log.csv", format_log_csv(result.log));
    policy::write_parameters(dir / "best.bin", result.best);
    policy::write_parameters(dir / "final.bin", result.final_center);

    ReplicationOutcome out{r, seed, result.best_fitness, mean_of_ievs(result.log),
                           static_cast<int>(result.log.size())};
    summary.replications.push_back(out);
    json rj{{"replication", r}, {"seed", seed}, {"best_fitness", out.best_fitness}, {"generations", out.generations}};
    rj["mean_iev"] = out.mean_iev ? json(*out.mean_iev) : json(nullptr);
    reps.push_back(rj);
  }

  std::vector<double> best;
  for (const auto& r : summary.replications) best.push_back(r.best_fitness);
  summary.best_fitness = stats::summarize(best);
  write_json(run_dir / "summary.json",
             {{"replications", reps},
              {"best_fitness",
               {{"median", summary.best_fitness.median},
                {"iqr", summary.best_fitness.iqr},
                {"mean", summary.best_fitness.mean},
                {"std", summary.best_fitness.std}}}});
  return summary;
}

fs::path cmd_evolve(const fs::path& config_path, const RunOptions& options) {
  auto config = load_run_config(config_path);
  if (options.seed) config.master_seed = *options.seed;
  if (options.workers) config.workers = *options.workers;
  const fs::path run_dir = options.run_dir ? *options.run_dir : fs::path(config.output_dir);
  run_experiment(config, run_dir, config.workers);
  return run_dir;
}

// Post-evaluation.

Protocol parse_protocol(std::string_view text) {
  if (text == "A" || text == "a") return Protocol::kA;
  if (text == "B" || text == "b") return Protocol::kB;
  throw InvalidInput("unknown protocol '" + std::string(text) + "' (expected A or B)");
}

std::vector<PostEvalLevel> post_evaluate(const policy::Policy& policy, const envs::EnvSpec& env_spec,
                                         envs::RewardVariant reward, Protocol protocol,
                                         std::optional<double> sigma_init_override, std::uint64_t seed) {
  auto env = envs::make_environment(env_spec);
  std::vector<PostEvalLevel> out;
  const auto proto_key = static_cast<std::uint64_t>(protocol);
  if (protocol == Protocol::kA) {
    const double sigma_init = sigma_init_override.value_or(kProtocolASigmaInit);
    Rng rng(derive_seed(seed, Stream::kPostEval, {proto_key, 0}));
    out.push_back({sigma_init, kProtocolASigmaAct,
                   variation::evaluate_fixed(policy, *env, sigma_init, kProtocolASigmaAct, kProtocolAEpisodes, reward,
                                             rng)});
    return out;
  }
  const double sigma_init = sigma_init_override.value_or(kProtocolBDefaultSigmaInit);
  for (std::size_t level = 0; level < kProtocolBLevels.size(); ++level) {
    Rng rng(derive_seed(seed, Stream::kPostEval, {proto_key, level}));
    const double sigma_act = kProtocolBLevels[level];
    out.push_back({sigma_init, sigma_act,
                   variation::evaluate_fixed(policy, *env, sigma_init, sigma_act, kProtocolBEpisodesPerLevel, reward,
                                             rng)});
  }
  return out;
}

policy::Policy load_policy(const fs::path& rep_dir) {
  const auto params_path = rep_dir / "best.bin";
  if (!fs::exists(params_path)) throw NotFound("checkpoint not found: " + params_path.string());
  const auto meta = read_json(rep_dir / "policy_meta.json");
  policy::Policy p;
  try {
    p.spec = {meta.at("obs_dim").get<std::size_t>(), meta.at("hidden_dim").get<std::size_t>(),
              meta.at("action_dim").get<std::size_t>()};
    const auto& n = meta.at("normalizer");
    p.normalizer.mean = n.at("mean").get<std::vector<double>>();
    p.normalizer.std = n.at("std").get<std::vector<double>>();
    p.normalizer.reference_count = n.at("reference_count").get<std::size_t>();
    p.params = policy::read_parameters(params_path);
    if (p.params.size() != meta.at("genotype_dim").get<std::size_t>()) {
      throw FormatError(params_path.string() + ": parameter count does not match policy_meta.json");
    }
  } catch (const json::exception& e) {
    throw FormatError((rep_dir / "policy_meta.json").string() + ": " + e.what());
  }
  return p;
}

fs::path cmd_posteval(const fs::path& run_dir, Protocol protocol, const PostEvalOptions& options) {
  const auto config = load_run_config(run_dir / "config.json");
  const auto base_seed = options.seed.value_or(config.master_seed);

  std::string detail, summary;
  if (protocol == Protocol::kA) {
    detail = "replication,episode,sigma_init,sigma_act,return,progress,steps\n";
    summary = "replication,sigma_init,sigma_act,mean_return,mean_progress\n";
  } else {
    detail = "replication,sigma_init,sigma_act,mean_return,mean_progress\n";
  }
  for (int r = 0; r < config.replication_count; ++r) {
    const auto pol = load_policy(replication_dir(run_dir, r));
    const auto levels = post_evaluate(pol, config.env, config.reward, protocol, options.sigma_init_override,
                                      replication_seed(base_seed, r));
    for (const auto& level : levels) {
      const auto& rec = level.record;
      const double mean_progress = std::accumulate(rec.episode_progress.begin(), rec.episode_progress.end(), 0.0) /
                                   static_cast<double>(rec.episode_progress.size());
      const auto row_head = std::vector<std::string>{std::to_string(r)};
      if (protocol == Protocol::kA) {
        for (std::size_t e = 0; e < rec.episode_returns.size(); ++e) {
          detail += csv::join({std::to_string(r), std::to_string(e), fmt(level.sigma_init), fmt(level.sigma_act),
                               fmt(rec.episode_returns[e]), fmt(rec.episode_progress[e]),
                               std::to_string(rec.episode_steps[e])}) +
                    "\n";
        }
        summary += csv::join({std::to_string(r), fmt(level.sigma_init), fmt(level.sigma_act), fmt(rec.fitness),
                              fmt(mean_progress)}) +
                   "\n";
      } else {
        detail += csv::join({std::to_string(r), fmt(level.sigma_init), fmt(level.sigma_act), fmt(rec.fitness),
                             fmt(mean_progress)}) +
                  "\n";
      }
    }
  }
  const auto tag = protocol == Protocol::kA ? std::string("A") : std::string("B");
  const auto path = run_dir / ("posteval_" + tag + ".csv");
  csv::write_file_atomic(path, detail);
  if (protocol == Protocol::kA) csv::write_file_atomic(run_dir / "posteval_A_summary.csv", summary);
  return path;
}

// IEV reporting.

namespace {

void finish_report(IevReport& report) {
  std::map<std::string, std::pair<double, int>> acc;
  std::vector<std::string> order;
  for (const auto& row : report.rows) {
    auto [it, inserted] = acc.try_emplace(row.source, 0.0, 0);
    if (inserted) order.push_back(row.source);
    it->second.first += row.iev;
    it->second.second += 1;
  }
  for (const auto& s : order) report.means.emplace_back(s, acc[s].first / acc[s].second);
}

}  // namespace

IevReport iev_report_from_run(const fs::path& run_dir) {
  const auto config = load_run_config(run_dir / "config.json");
  IevReport report;
  for (int r = 0; r < config.replication_count; ++r) {
    const auto dir = replication_dir(run_dir, r);
    const auto log = parse_log_csv(dir / "log.csv");
    for (const auto& row : log) {
      if (!row.iev || !row.snr) {
        throw FormatError((dir / "log.csv").string() + ": run was not instrumented, IEV column is empty");
      }
      report.rows.push_back({dir.filename().string(), row.generation, *row.iev, *row.snr});
    }
  }
  finish_report(report);
  return report;
}

IevReport iev_report_from_pairs(const fs::path& csv_path) {
  if (!fs::exists(csv_path)) throw NotFound("fitness file not found: " + csv_path.string());
  const auto table = csv::read(csv_path);
  const auto cols = table.header.size();
  if (cols < 2 || cols % 2 != 0) {
    throw FormatError(csv_path.string() + ": expected two fitness columns per generation, found " +
                      std::to_string(cols) + " columns");
  }
  if (table.rows.size() < 2) throw FormatError(csv_path.string() + ": need at least two individuals");
  IevReport report;
  const auto source = csv_path.stem().string();
  for (std::size_t g = 0; g < cols / 2; ++g) {
    std::vector<double> f1, f2;
    for (const auto& row : table.rows) {
      f1.push_back(csv::parse_double(row[2 * g]));
      f2.push_back(csv::parse_double(row[2 * g + 1]));
    }
    const auto sample = metrics::iev_from_double_eval(f1, f2, static_cast<int>(g));
    report.rows.push_back({source, sample.generation, sample.iev, sample.snr});
  }
  finish_report(report);
  return report;
}

fs::path cmd_iev_report(const fs::path& input, const std::optional<fs::path>& out) {
  const bool is_run = fs::is_directory(input);
  const auto report = is_run ? iev_report_from_run(input) : iev_report_from_pairs(input);
  fs::path base;
  if (out) {
    base = *out;
  } else if (is_run) {
    base = input / "iev_report";
  } else {
    base = input.parent_path() / (input.stem().string() + "_iev_report");
  }
  std::string body = "source,generation,iev,snr\n";
  for (const auto& r : report.rows) {
    body += csv::join({r.source, std::to_string(r.generation), fmt(r.iev), fmt(r.snr)}) + "\n";
  }
  auto csv_path = base;
  csv_path += ".csv";
  csv::write_file_atomic(csv_path, body);

  json means = json::array();
  for (const auto& [source, m] : report.means) {
    means.push_back({{"source", source}, {"mean_iev", m}, {"mean_snr", metrics::snr(m)}});
  }
  auto summary_path = base;
  summary_path += "_summary.json";
  write_json(summary_path, {{"sources", means}});
  return csv_path;
}

// Sweeps.

SweepPlan parse_sweep(std::string_view text, const fs::path& base_dir, std::string_view source) {
  const auto j = parse_json(text, source);
  const auto fail = [&](const std::string& msg) { return ParseError(std::string(source) + ": " + msg); };
  if (!j.is_object()) throw fail("expected an object");
  static const std::set<std::string> known{"base", "base_config", "replications", "output_dir", "conditions", "grid"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw fail("unknown field '" + key + "'");
  }

  json base = json::object();
  if (j.contains("base") && j.contains("base_config")) throw fail("give either 'base' or 'base_config', not both");
  if (j.contains("base")) base = j["base"];
  if (j.contains("base_config")) {
    if (!j["base_config"].is_string()) throw fail("base_config: expected a string");
    const auto path = base_dir / j["base_config"].get<std::string>();
    if (!fs::exists(path)) throw NotFound("base config not found: " + path.string());
    base = parse_json(csv::read_file(path), path.string());
  }
  if (!base.is_object()) throw fail("base: expected an object");

  SweepPlan plan;
  if (j.contains("replications")) {
    if (!j["replications"].is_number_integer()) throw fail("replications: expected an integer");
    plan.replications = j["replications"].get<int>();
  } else if (base.contains("replication_count") && base["replication_count"].is_number_integer()) {
    plan.replications = base["replication_count"].get<int>();
  }
  if (plan.replications < 1) throw fail("replications must be >= 1");
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw fail("output_dir: expected a string");
    plan.output_dir = j["output_dir"].get<std::string>();
  } else {
    plan.output_dir = "runs/sweep";
  }

  std::vector<std::pair<std::string, json>> overrides;  // (name, {dotted: value})
  if (j.contains("conditions")) {
    if (!j["conditions"].is_array()) throw fail("conditions: expected an array");
    for (std::size_t i = 0; i < j["conditions"].size(); ++i) {
      const auto& c = j["conditions"][i];
      const auto where = "conditions[" + std::to_string(i) + "]";
      if (!c.is_object() || !c.contains("name") || !c["name"].is_string()) throw fail(where + ": needs a string 'name'");
      for (const auto& [key, _] : c.items()) {
        if (key != "name" && key != "set") throw fail(where + ": unknown field '" + key + "'");
      }
      json set = c.value("set", json::object());
      if (!set.is_object()) throw fail(where + ".set: expected an object");
      overrides.emplace_back(c["name"].get<std::string>(), set);
    }
  }
  if (j.contains("grid")) {
    const auto& grid = j["grid"];
    if (!grid.is_object() || grid.empty()) throw fail("grid: expected a non-empty object of arrays");
    std::vector<std::pair<std::string, json>> combos{{"", json::object()}};
    for (const auto& [key, values] : grid.items()) {
      if (!values.is_array() || values.empty()) throw fail("grid." + key + ": expected a non-empty array");
      const auto short_key = key.substr(key.rfind('.') == std::string::npos ? 0 : key.rfind('.') + 1);
      std::vector<std::pair<std::string, json>> next;
      for (const auto& [name, set] : combos) {
        for (const auto& v : values) {
          auto s = set;
          s[key] = v;
          const auto label = short_key + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
          next.emplace_back(name.empty() ? label : name + "+" + label, s);
        }
      }
      combos = std::move(next);
    }
    overrides.insert(overrides.end(), combos.begin(), combos.end());
  }
  if (overrides.empty()) throw fail("sweep defines no conditions");

  std::set<std::string> names;
  for (const auto& [name, set] : overrides) {
    if (name.empty() || name.find_first_of("/\\,") != std::string::npos) {
      throw fail("condition name '" + name + "' must be non-empty without '/', '\\' or ','");
    }
    if (!names.insert(name).second) throw fail("duplicate condition name '" + name + "'");
    auto cj = base;
    for (const auto& [key, value] : set.items()) set_dotted(cj, key, value);
    RunConfig cfg;
    try {
      cfg = from_json(cj);
    } catch (const ParseError& e) {
      throw fail("condition '" + name + "': " + e.what());
    }
    cfg.replication_count = plan.replications;
    cfg.output_dir = (plan.output_dir / name).string();
    plan.conditions.push_back({name, cfg});
  }
  return plan;
}

SweepResult run_sweep(const SweepPlan& plan, int workers) {
  fs::create_directories(plan.output_dir);
  SweepResult result;
  std::string rows = "condition,replication,final_fitness,mean_iev\n";
  for (const auto& cond : plan.conditions) {
    const auto summary = run_experiment(cond.config, plan.output_dir / cond.name, workers);
    std::vector<double> finals;
    for (const auto& r : summary.replications) {
      finals.push_back(r.best_fitness);
      rows += csv::join({cond.name, std::to_string(r.replication), fmt(r.best_fitness), opt_fmt(r.mean_iev)}) + "\n";
    }
    result.conditions.push_back(cond.name);
    result.final_fitness.push_back(std::move(finals));
  }
  csv::write_file_atomic(plan.output_dir / "sweep_results.csv", rows);

  std::string kw = "conditions,group_sizes,h,df,p,p_report\n";
  std::vector<std::string> sizes;
  for (const auto& g : result.final_fitness) sizes.push_back(std::to_string(g.size()));
  std::string names;
  for (std::size_t i = 0; i < result.conditions.size(); ++i) names += (i ? ";" : "") + result.conditions[i];
  std::string size_list;
  for (std::size_t i = 0; i < sizes.size(); ++i) size_list += (i ? ";" : "") + sizes[i];
  if (result.conditions.size() >= 2) {
    try {
      result.kruskal_wallis = stats::kruskal_wallis(result.final_fitness);
      const auto& k = *result.kruskal_wallis;
      kw += csv::join({names, size_list, fmt(k.h), std::to_string(k.df), fmt(k.p), stats::format_p(k.p)}) + "\n";
    } catch (const DegenerateData&) {
      kw += csv::join({names, size_list, "", std::to_string(result.conditions.size() - 1), "", "degenerate"}) + "\n";
    }
  }
  csv::write_file_atomic(plan.output_dir / "sweep_kruskal_wallis.csv", kw);
  return result;
}

fs::path cmd_sweep(const fs::path& sweep_path, const RunOptions& options) {
  if (!fs::exists(sweep_path)) throw NotFound("sweep file not found: " + sweep_path.string());
  auto plan = parse_sweep(csv::read_file(sweep_path), sweep_path.parent_path(), sweep_path.string());
  if (options.run_dir) {
    plan.output_dir = *options.run_dir;
    for (auto& c : plan.conditions) c.config.output_dir = (plan.output_dir / c.name).string();
  }
  int workers = 1;
  for (auto& c : plan.conditions) {
    if (options.seed) c.config.master_seed = *options.seed;
    workers = std::max(workers, c.config.workers);
  }
  if (options.workers) workers = *options.workers;
  run_sweep(plan, workers);
  return plan.output_dir;
}

// Plot data.

fs::path cmd_plotdata(const std::vector<fs::path>& run_dirs, const fs::path& out_dir) {
  std::vector<std::pair<std::string, fs::path>> conditions;
  for (const auto& dir : run_dirs) {
    if (!fs::is_directory(dir)) throw NotFound("run directory not found: " + dir.string());
    if (fs::exists(dir / "config.json")) {
      conditions.emplace_back(fs::weakly_canonical(dir).filename().string(), dir);
      continue;
    }
    std::vector<fs::path> subs;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "config.json")) subs.push_back(entry.path());
    }
    if (subs.empty()) throw NotFound(dir.string() + " holds no run directories");
    std::sort(subs.begin(), subs.end());
    for (const auto& s : subs) conditions.emplace_back(s.filename().string(), s);
  }

  std::string bar = "condition,mean_iev\n";
  std::string series = "condition,generation,iev\n";
  std::string box = "condition,replication,fitness\n";
  std::string curve = "condition,sigma_act,mean_return\n";
  for (const auto& [name, dir] : conditions) {
    const auto config = load_run_config(dir / "config.json");
    std::vector<std::vector<es::GenerationLog>> logs;
    for (int r = 0; r < config.replication_count; ++r) {
      logs.push_back(parse_log_csv(replication_dir(dir, r) / "log.csv"));
      const auto& log = logs.back();
      if (log.empty()) throw FormatError("empty log in " + replication_dir(dir, r).string());
      double best = log.front().center_eval_fitness;
      for (const auto& row : log) best = std::max(best, row.center_eval_fitness);
      box += csv::join({name, std::to_string(r), fmt(best)}) + "\n";
    }

    const bool instrumented =
        std::all_of(logs.begin(), logs.end(), [](const auto& l) { return !l.empty() && l.front().iev.has_value(); });
    if (instrumented) {
      std::size_t generations = logs.front().size();
      for (const auto& l : logs) generations = std::min(generations, l.size());
      double overall = 0.0;
      for (std::size_t g = 0; g < generations; ++g) {
        double sum = 0.0;
        for (const auto& l : logs) sum += l[g].iev.value_or(0.0);
        const double mean = sum / static_cast<double>(logs.size());
        overall += mean;
        series += csv::join({name, std::to_string(g), fmt(mean)}) + "\n";
      }
      bar += csv::join({name, fmt(overall / static_cast<double>(generations))}) + "\n";
    }

    if (fs::exists(dir / "posteval_B.csv")) {
      const auto table = csv::read(dir / "posteval_B.csv");
      const auto c_sigma = table.column("sigma_act");
      const auto c_ret = table.column("mean_return");
      std::map<double, std::pair<double, int>> levels;
      for (const auto& row : table.rows) {
        auto& acc = levels[csv::parse_double(row[c_sigma])];
        acc.first += csv::parse_double(row[c_ret]);
        acc.second += 1;
      }
      for (const auto& [sigma, acc] : levels) {
        curve += csv::join({name, fmt(sigma), fmt(acc.first / acc.second)}) + "\n";
      }
    }
  }
  fs::create_directories(out_dir);
  csv::write_file_atomic(out_dir / "iev_bar.csv", bar);
  csv::write_file_atomic(out_dir / "iev_series.csv", series);
  csv::write_file_atomic(out_dir / "performance_box.csv", box);
  csv::write_file_atomic(out_dir / "robustness_curve.csv", curve);
  return out_dir;
}

}  // namespace ievlab::harness
