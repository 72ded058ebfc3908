#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ievlab/error.hpp"
#include "ievlab/es.hpp"
#include "ievlab/harness.hpp"
#include "ievlab/metrics.hpp"
#include "ievlab/policy.hpp"
#include "ievlab/stats.hpp"
#include "ievlab/variation.hpp"

namespace py = pybind11;
using namespace ievlab;

namespace {

py::dict log_row(const es::GenerationLog& r) {
  py::dict d;
  d["generation"] = r.generation;
  d["best_fitness"] = r.best_fitness;
  d["mean_fitness"] = r.mean_fitness;
  d["iev"] = r.iev ? py::cast(*r.iev) : py::none();
  d["snr"] = r.snr ? py::cast(*r.snr) : py::none();
  d["sigma_act_effective"] = r.sigma_act_effective;
  d["center_eval_fitness"] = r.center_eval_fitness;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ievlab, m) {
  m.doc() = "Evolution strategies under controlled environmental variation";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (e.kind() + ": " + e.what()).c_str());
    }
  });

  // metrics
  m.def("rank_fitness", [](const std::vector<double>& f) { return metrics::rank_fitness(f).positions(); },
        py::arg("fitness"), "Rank positions, 0 = lowest fitness, ties by index");
  m.def("iev",
        [](std::vector<int> r1, std::vector<int> r2) {
          return metrics::iev(metrics::Ranking(std::move(r1)), metrics::Ranking(std::move(r2)));
        },
        py::arg("r1"), py::arg("r2"));
  m.def("snr", &metrics::snr, py::arg("iev"));
  m.def("snr_exact", &metrics::snr_exact, py::arg("iev"), py::arg("s"));
  m.def("noise_baseline", &metrics::noise_baseline, py::arg("s"));
  m.def("iev_from_double_eval",
        [](const std::vector<double>& f1, const std::vector<double>& f2) {
          const auto s = metrics::iev_from_double_eval(f1, f2);
          return py::make_tuple(s.iev, s.snr);
        },
        py::arg("fitness1"), py::arg("fitness2"), "Returns (iev, snr)");
  m.def("mean_iev",
        [](const std::vector<double>& values) {
          std::vector<metrics::IevSample> samples;
          for (double v : values) samples.push_back({v, metrics::snr(v), 0});
          return metrics::mean_iev(samples);
        },
        py::arg("iev_values"));

  // policy
  m.def("param_count",
        [](std::size_t obs, std::size_t hidden, std::size_t act) { return policy::param_count({obs, hidden, act}); },
        py::arg("obs_dim"), py::arg("hidden_dim"), py::arg("action_dim"));
  m.def("forward",
        [](std::size_t obs_dim, std::size_t hidden_dim, std::size_t action_dim, const std::vector<double>& params,
           const std::vector<double>& obs) {
          const policy::MlpSpec spec{obs_dim, hidden_dim, action_dim};
          return policy::forward(spec, {params}, policy::ObsNormalizer::identity(obs_dim), obs);
        },
        py::arg("obs_dim"), py::arg("hidden_dim"), py::arg("action_dim"), py::arg("params"), py::arg("obs"),
        "Network output with an identity normalizer");

  // es
  m.def("centered_ranks", [](const std::vector<double>& f) { return es::centered_ranks(f); }, py::arg("fitness"));
  m.def("sample_perturbations",
        [](std::size_t dim, int s, std::uint64_t seed) {
          Rng rng(seed);
          return es::sample_perturbations(dim, s, rng);
        },
        py::arg("dim"), py::arg("s"), py::arg("seed"));

  // variation
  m.def("sigma_act_at",
        [](const std::string& modality, double sigma_act, double sigma_act_max, int ramp_generations, int t,
           int episode_length, int generation) {
          variation::VariationPlan plan;
          plan.action_modality = variation::parse_modality(modality);
          plan.sigma_act = sigma_act;
          plan.sigma_act_max = sigma_act_max;
          plan.ramp_generations = ramp_generations;
          plan.validate();
          return variation::sigma_act_at(plan, t, episode_length, generation);
        },
        py::arg("modality"), py::arg("sigma_act") = 0.0, py::arg("sigma_act_max") = 0.0,
        py::arg("ramp_generations") = 1, py::arg("t") = 0, py::arg("episode_length") = 1000,
        py::arg("generation") = 0);

  // stats
  py::class_<stats::KwResult>(m, "KwResult")
      .def_readonly("h", &stats::KwResult::h)
      .def_readonly("df", &stats::KwResult::df)
      .def_readonly("p", &stats::KwResult::p)
      .def_readonly("tie_correction", &stats::KwResult::tie_correction);
  m.def("kruskal_wallis", &stats::kruskal_wallis, py::arg("groups"));
  m.def("chi2_sf", &stats::chi2_sf, py::arg("x"), py::arg("df"));
  m.def("summarize",
        [](const std::vector<double>& v) {
          const auto s = stats::summarize(v);
          py::dict d;
          d["mean"] = s.mean;
          d["std"] = s.std;
          d["median"] = s.median;
          d["iqr"] = s.iqr;
          return d;
        },
        py::arg("values"));

  // pipeline
  m.def("evolve",
        [](const std::string& config_json, int replication, int workers) {
          const auto config = harness::parse_run_config(config_json, "<python>");
          const auto seed = harness::replication_seed(config.master_seed, replication);
          const auto problem = harness::make_problem(config, seed);
          es::EvolveResult result;
          {
            py::gil_scoped_release release;
            result = es::evolve(problem, config.es, config.variation, seed, workers);
          }
          py::list log;
          for (const auto& r : result.log) log.append(log_row(r));
          return py::make_tuple(result.best.values, result.best_fitness, log);
        },
        py::arg("config_json"), py::arg("replication") = 0, py::arg("workers") = 1,
        "Runs one replication; returns (best_params, best_fitness, log_rows)");
  m.def("cmd_evolve",
        [](const std::filesystem::path& config, std::optional<std::filesystem::path> run_dir,
           std::optional<int> workers, std::optional<std::uint64_t> seed) {
          py::gil_scoped_release release;
          return harness::cmd_evolve(config, {run_dir, workers, seed});
        },
        py::arg("config"), py::arg("run_dir") = py::none(), py::arg("workers") = py::none(),
        py::arg("seed") = py::none());
  m.def("cmd_posteval",
        [](const std::filesystem::path& run_dir, const std::string& protocol, std::optional<double> sigma_init,
           std::optional<std::uint64_t> seed) {
          py::gil_scoped_release release;
          return harness::cmd_posteval(run_dir, harness::parse_protocol(protocol), {sigma_init, seed});
        },
        py::arg("run_dir"), py::arg("protocol") = "A", py::arg("sigma_init_override") = py::none(),
        py::arg("seed") = py::none());
  m.def("cmd_iev_report",
        [](const std::filesystem::path& input, std::optional<std::filesystem::path> out) {
          return harness::cmd_iev_report(input, out);
        },
        py::arg("input"), py::arg("out") = py::none());
  m.def("cmd_sweep",
        [](const std::filesystem::path& sweep, std::optional<std::filesystem::path> run_dir,
           std::optional<int> workers) {
          py::gil_scoped_release release;
          return harness::cmd_sweep(sweep, {run_dir, workers, std::nullopt});
        },
        py::arg("sweep"), py::arg("run_dir") = py::none(), py::arg("workers") = py::none());
  m.def("cmd_plotdata", &harness::cmd_plotdata, py::arg("run_dirs"), py::arg("out_dir"));
}
