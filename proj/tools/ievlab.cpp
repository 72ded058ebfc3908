// Command-line front end: evolve, posteval, iev-report, sweep, plot-data.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ievlab/error.hpp"
#include "ievlab/harness.hpp"
#include "ievlab/metrics.hpp"

namespace fs = std::filesystem;
using namespace ievlab;

namespace {

int exit_code_for(const std::string& kind) {
  if (kind == "parse_error") return 2;
  if (kind == "not_found") return 3;
  if (kind == "format_error") return 4;
  if (kind == "invalid_input") return 5;
  return 1;
}

void report_error(const std::string& kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neuroevolution lab: evolution strategies under controlled environmental variation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string run_dir;
  std::string protocol = "A";
  std::optional<double> sigma_init_override;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::string input;
  std::string out;
  std::vector<std::string> run_dirs;

  auto* evolve = app.add_subcommand("evolve", "Run every replication of a configuration");
  evolve->add_option("--config", config_path, "Run configuration (JSON)")->required();
  evolve->add_option("--run-dir", run_dir, "Output directory (default: config output_dir)");
  evolve->add_option("--workers", workers, "Evaluation threads");
  evolve->add_option("--seed", seed, "Override master_seed");

  auto* posteval = app.add_subcommand("posteval", "Post-evaluate the best agents of a run");
  posteval->add_option("--run-dir", run_dir, "Run directory")->required();
  posteval->add_option("--protocol", protocol, "A (10 episodes) or B (10 action-noise levels)")
      ->check(CLI::IsMember({"A", "B"}));
  posteval->add_option("--sigma-init-override", sigma_init_override, "Initial-state perturbation amplitude");
  posteval->add_option("--seed", seed, "Post-evaluation seed (default: run master_seed)");

  auto* iev = app.add_subcommand("iev-report", "IEV/SNR per generation and averaged over generations");
  auto* iev_run = iev->add_option("--run-dir", run_dir, "Instrumented run directory");
  auto* iev_in = iev->add_option("--input", input, "CSV with two fitness columns per generation");
  iev_run->excludes(iev_in);
  iev->add_option("--out", out, "Output path prefix");

  auto* sweep = app.add_subcommand("sweep", "Run a grid of conditions and compare them");
  sweep->add_option("--config", config_path, "Sweep file (JSON)")->required();
  sweep->add_option("--run-dir", run_dir, "Output directory (default: sweep output_dir)");
  sweep->add_option("--workers", workers, "Evaluation threads");
  sweep->add_option("--seed", seed, "Override every condition's master_seed");

  auto* plot = app.add_subcommand("plot-data", "Emit plot-ready CSVs from run or sweep directories");
  plot->add_option("--run-dir", run_dirs, "Run or sweep directory (repeatable)")->required();
  plot->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report_error("usage_error", e.what());
    return 64;
  }

  try {
    if (*evolve) {
      harness::RunOptions opts{run_dir.empty() ? std::nullopt : std::optional<fs::path>(run_dir), workers, seed};
      const auto dir = harness::cmd_evolve(config_path, opts);
      std::cout << dir.string() << "\n";
    } else if (*posteval) {
      const auto path = harness::cmd_posteval(run_dir, harness::parse_protocol(protocol),
                                              {sigma_init_override, seed});
      std::cout << path.string() << "\n";
    } else if (*iev) {
      if (run_dir.empty() && input.empty()) throw InvalidInput("iev-report needs --run-dir or --input");
      const fs::path source = run_dir.empty() ? fs::path(input) : fs::path(run_dir);
      const auto path = harness::cmd_iev_report(source, out.empty() ? std::nullopt : std::optional<fs::path>(out));
      const auto report = fs::is_directory(source) ? harness::iev_report_from_run(source)
                                                   : harness::iev_report_from_pairs(source);
      for (const auto& [name, mean] : report.means) {
        std::printf("%s mean_iev=%.6f snr=%.6f\n", name.c_str(), mean, metrics::snr(mean));
      }
      std::cout << path.string() << "\n";
    } else if (*sweep) {
      harness::RunOptions opts{run_dir.empty() ? std::nullopt : std::optional<fs::path>(run_dir), workers, seed};
      std::cout << harness::cmd_sweep(config_path, opts).string() << "\n";
    } else if (*plot) {
      std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
      std::cout << harness::cmd_plotdata(dirs, out).string() << "\n";
    }
  } catch (const Error& e) {
    report_error(e.kind(), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    report_error("internal_error", e.what());
    return 1;
  }
  return 0;
}
