// nmrsq-cli: command-line front end over the C API.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 numerical or
// validation failure.

#include <CLI11.hpp>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nmrsq/nmrsq.h"

namespace {

struct ConfigDeleter {
  void operator()(nmrsq_config* c) const { nmrsq_config_free(c); }
};
struct ResultDeleter {
  void operator()(nmrsq_result* r) const { nmrsq_result_free(r); }
};
using ConfigPtr = std::unique_ptr<nmrsq_config, ConfigDeleter>;
using ResultPtr = std::unique_ptr<nmrsq_result, ResultDeleter>;

int report_error(nmrsq_status status) {
  std::cerr << "error: " << nmrsq_last_error() << '\n';
  return nmrsq_exit_code(status);
}

std::string json_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string json_list(const std::vector<double>& values) {
  std::string s = "[";
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + json_number(values[i]);
  return s + "]";
}

template <class Run>
int finish(Run&& run) {
  nmrsq_result* raw = nullptr;
  const nmrsq_status status = run(&raw);
  ResultPtr result(raw);
  if (status != NMRSQ_OK) return report_error(status);
  for (std::size_t i = 0; i < nmrsq_result_file_count(result.get()); ++i) {
    std::cout << "wrote " << nmrsq_result_file(result.get(), i) << '\n';
  }
  const int code = nmrsq_result_exit_code(result.get());
  if (code != 0) std::cerr << "validation failed (see report)\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Squeezing a nanomechanical resonator through a Cooper-pair box and a transmission-line resonator"};
  app.set_version_flag("--version", std::string(nmrsq_version()));
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool strict = false;
  app.add_option("--config", config_path, "Run configuration (JSON, must declare units)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Master seed for Monte Carlo runs");
  app.add_flag("--strict", strict, "Treat regime-validation failures as errors (exit 2)");

  auto* params = app.add_subcommand("params", "Derived couplings and regime report -> params.json");

  auto* verify = app.add_subcommand("verify", "Run a verification suite -> report.json");
  std::string suite;
  std::string overlay;
  verify->add_option("suite", suite, "frohlich | rwa | bogoliubov | squeeze-law")
      ->required()
      ->check(CLI::IsMember({"frohlich", "rwa", "bogoliubov", "squeeze-law"}));
  verify->add_option("--overlay", overlay, "Earlier output whose embedded config digest must match");

  auto* fig2 = app.add_subcommand("fig2", "Squeezing-efficiency curves -> fig2.csv, fig2_minima.json");
  std::vector<double> ratios;
  std::optional<double> xi_max;
  std::optional<int> points;
  bool mc = false;
  std::optional<int> trajectories;
  fig2->add_option("--ratios", ratios, "Comma-separated D/(2 kappa beta) values")->delimiter(',');
  fig2->add_option("--xi-max", xi_max, "Largest xi on the grid");
  fig2->add_option("--points", points, "Grid points");
  fig2->add_flag("--mc", mc, "Add Monte Carlo columns for xi up to fig2.mc_xi_max");
  fig2->add_option("--trajectories", trajectories, "Monte Carlo trajectories per ratio");

  auto* evolve = app.add_subcommand("evolve", "Time series of the requested models -> timeseries.csv");

  auto* sweep = app.add_subcommand("sweep", "Sweep one device field -> sweep.csv");
  std::string param;
  double from = 0.0, to = 0.0;
  int steps = 0;
  std::vector<std::string> emit;
  std::string compensate;
  sweep->add_option("--param", param, "Device field to sweep")->required();
  sweep->add_option("--from", from, "First value")->required();
  sweep->add_option("--to", to, "Last value")->required();
  sweep->add_option("--steps", steps, "Number of points including both ends")->required();
  sweep->add_option("--emit", emit, "Comma-separated derived quantities (default kappa_over_2pi_hz)")->delimiter(',');
  sweep->add_option("--compensate", compensate, "Field rescaled so that param * field stays constant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  nmrsq_config* raw = nullptr;
  nmrsq_status st;
  if (!config_path.empty()) {
    st = nmrsq_config_load(config_path.c_str(), &raw);
  } else {
    // Without a config, device-level commands use the reference device and the rest the scaled benchmark.
    const bool physical = params->parsed() || sweep->parsed();
    st = nmrsq_config_default(physical ? "physical" : "scaled", &raw);
  }
  ConfigPtr config(raw);
  if (st != NMRSQ_OK) return report_error(st);
  if (seed) nmrsq_config_set_seed(config.get(), *seed);

  if (params->parsed()) {
    return finish([&](nmrsq_result** r) { return nmrsq_run_params(config.get(), out_dir.c_str(), strict, r); });
  }

  if (verify->parsed()) {
    const char* overlay_arg = overlay.empty() ? nullptr : overlay.c_str();
    return finish([&](nmrsq_result** r) {
      return nmrsq_run_verify(config.get(), suite.c_str(), out_dir.c_str(), overlay_arg, r);
    });
  }

  if (fig2->parsed()) {
    auto set = [&](const char* key, const std::string& value) {
      const nmrsq_status s = nmrsq_config_set(config.get(), key, value.c_str());
      return s == NMRSQ_OK ? 0 : report_error(s);
    };
    int rc = 0;
    if (!ratios.empty() && (rc = set("fig2.ratios", json_list(ratios)))) return rc;
    if (xi_max && (rc = set("fig2.xi_max", json_number(*xi_max)))) return rc;
    if (points && (rc = set("fig2.points", std::to_string(*points)))) return rc;
    if (mc && (rc = set("fig2.mc", "true"))) return rc;
    if (trajectories && (rc = set("fig2.trajectories", std::to_string(*trajectories)))) return rc;
    return finish([&](nmrsq_result** r) { return nmrsq_run_fig2(config.get(), out_dir.c_str(), r); });
  }

  if (evolve->parsed()) {
    return finish([&](nmrsq_result** r) { return nmrsq_run_evolve(config.get(), out_dir.c_str(), strict, r); });
  }

  std::vector<const char*> emit_ptrs;
  for (const auto& e : emit) emit_ptrs.push_back(e.c_str());
  nmrsq_sweep_spec spec{param.c_str(), from, to, steps, emit_ptrs.empty() ? nullptr : emit_ptrs.data(),
                        emit_ptrs.size(), compensate.empty() ? nullptr : compensate.c_str()};
  return finish([&](nmrsq_result** r) { return nmrsq_run_sweep(config.get(), &spec, out_dir.c_str(), r); });
}
