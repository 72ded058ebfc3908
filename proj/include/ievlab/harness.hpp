#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ievlab/config.hpp"
#include "ievlab/es.hpp"
#include "ievlab/stats.hpp"

namespace ievlab::harness {

namespace fs = std::filesystem;

// Run directory layout:
//   config.json                 resolved configuration
//   summary.json                per-replication outcome and median/IQR
//   rep_NNN/log.csv             GenerationLog, one row per generation
//   rep_NNN/best.bin            best center (ParameterVector format)
//   rep_NNN/policy_meta.json    network dims and normalizer statistics
//   rep_NNN/ckpt_GGGGGG.bin     optional checkpoints
//   posteval_{A,B}.csv          post-evaluation reports

inline constexpr const char* kLogHeader =
    "generation,best_fitness,mean_fitness,iev,snr,sigma_act_effective,center_eval_fitness";

std::string format_log_csv(const std::vector<es::GenerationLog>& log);
std::vector<es::GenerationLog> parse_log_csv(const fs::path& path);

fs::path replication_dir(const fs::path& run_dir, int replication);

struct ReplicationOutcome {
  int replication = 0;
  std::uint64_t seed = 0;
  double best_fitness = 0.0;
  /// Mean logged IEV over generations; absent without instrumentation.
  std::optional<double> mean_iev;
  int generations = 0;
};

struct RunSummary {
  std::vector<ReplicationOutcome> replications;
  stats::Summary best_fitness;
};

/// Runs every replication of `config` into `run_dir`, writing logs,
/// parameters and the summary. A failing replication still persists its
/// partial log before the error propagates.
RunSummary run_experiment(const RunConfig& config, const fs::path& run_dir, int workers);

struct RunOptions {
  std::optional<fs::path> run_dir;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
};

fs::path cmd_evolve(const fs::path& config_path, const RunOptions& options = {});

// Post-evaluation.

enum class Protocol { kA, kB };

Protocol parse_protocol(std::string_view text);

inline constexpr int kProtocolAEpisodes = 10;
inline constexpr double kProtocolASigmaInit = 0.03;
inline constexpr double kProtocolASigmaAct = 0.01;
inline constexpr double kProtocolBDefaultSigmaInit = 0.03;
inline constexpr int kProtocolBEpisodesPerLevel = 10;
inline constexpr std::array<double, 10> kProtocolBLevels = {0.01, 0.07, 0.13, 0.19, 0.25,
                                                            0.31, 0.37, 0.43, 0.49, 0.55};

struct PostEvalLevel {
  double sigma_init = 0.0;
  double sigma_act = 0.0;
  variation::EvaluationRecord record;
};

/// Protocol A yields one level (10 episodes); protocol B yields 10 levels of 10 episodes.
std::vector<PostEvalLevel> post_evaluate(const policy::Policy& policy, const envs::EnvSpec& env,
                                         envs::RewardVariant reward, Protocol protocol,
                                         std::optional<double> sigma_init_override, std::uint64_t seed);

struct PostEvalOptions {
  std::optional<double> sigma_init_override;
  std::optional<std::uint64_t> seed;
};

/// Loads every replication's best parameters and writes posteval_A.csv
/// (per episode) plus posteval_A_summary.csv, or posteval_B.csv (per level).
fs::path cmd_posteval(const fs::path& run_dir, Protocol protocol, const PostEvalOptions& options = {});

/// Reads a replication's best parameters, network shape and normalizer.
policy::Policy load_policy(const fs::path& rep_dir);

// IEV reporting.

struct IevReportRow {
  std::string source;
  int generation = 0;
  double iev = 0.0;
  double snr = 0.0;
};

struct IevReport {
  std::vector<IevReportRow> rows;
  /// (source, mean IEV over generations)
  std::vector<std::pair<std::string, double>> means;
};

IevReport iev_report_from_run(const fs::path& run_dir);

/// External fitness file: header row, one row per individual, two columns
/// (first and second evaluation) per generation.
IevReport iev_report_from_pairs(const fs::path& csv_path);

/// Writes <out>.csv (source,generation,iev,snr) and <out>_summary.json.
/// Defaults: <run_dir>/iev_report or <input stem>_iev_report next to the file.
fs::path cmd_iev_report(const fs::path& input, const std::optional<fs::path>& out = std::nullopt);

// Sweeps.

struct SweepCondition {
  std::string name;
  RunConfig config;
};

struct SweepPlan {
  std::vector<SweepCondition> conditions;
  int replications = 10;
  fs::path output_dir;
};

/// Sweep file: {"base": {...RunConfig...} | "base_config": path, "replications": n,
/// "output_dir": path, "conditions": [{"name": ..., "set": {"dotted.key": value}}],
/// "grid": {"dotted.key": [values...]}}.
SweepPlan parse_sweep(std::string_view text, const fs::path& base_dir, std::string_view source = "<sweep>");

struct SweepResult {
  std::vector<std::string> conditions;
  std::vector<std::vector<double>> final_fitness;
  std::optional<stats::KwResult> kruskal_wallis;
};

/// Writes sweep_results.csv and sweep_kruskal_wallis.csv, one run directory per condition.
SweepResult run_sweep(const SweepPlan& plan, int workers);

fs::path cmd_sweep(const fs::path& sweep_path, const RunOptions& options = {});

// Plot data.

/// Emits iev_bar.csv, iev_series.csv, performance_box.csv and
/// robustness_curve.csv into `out_dir`. Each input is a run directory or a
/// sweep directory containing one run directory per condition.
fs::path cmd_plotdata(const std::vector<fs::path>& run_dirs, const fs::path& out_dir);

}  // namespace ievlab::harness
