#pragma once

// The five CLI commands as library calls. Each writes its files under the
// output directory and returns the exit code it maps to (0 or 2); configuration
// problems are thrown as Error and mapped to 1 by the caller.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nmrsq/config.hpp"
#include "nmrsq/evolution.hpp"

namespace nmrsq {

struct OutputOptions {
  std::string out_dir = ".";
  bool strict = false;
};

struct CommandResult {
  int exit_code = 0;
  std::vector<std::string> files;
  nlohmann::json report;  // summary of what was computed
};

/// Metadata block embedded in every output: digest, version, seed, units, command
/// and, only when SOURCE_DATE_EPOCH is set, a timestamp.
nlohmann::json output_metadata(const RunConfig& config, const std::string& command);

CommandResult cmd_params(const RunConfig& config, const OutputOptions& out);

/// suite: frohlich | rwa | bogoliubov | squeeze-law. With an overlay, the
/// digest embedded in that earlier output must match this config's digest.
CommandResult cmd_verify(const RunConfig& config, const std::string& suite, const OutputOptions& out,
                         const std::optional<std::string>& overlay = std::nullopt);

CommandResult cmd_fig2(const RunConfig& config, const OutputOptions& out);

CommandResult cmd_evolve(const RunConfig& config, const OutputOptions& out);

struct SweepOptions {
  std::string param;
  double from = 0.0;
  double to = 0.0;
  int steps = 2;
  std::vector<std::string> emit = {"kappa_over_2pi_hz"};
  std::optional<std::string> compensate;  // field rescaled to keep param * field constant
};

CommandResult cmd_sweep(const RunConfig& config, const SweepOptions& sweep, const OutputOptions& out);

/// Names accepted by cmd_sweep's emit list.
std::vector<std::string> sweep_quantities();

/// Full RWA vs. the effective models over one conversion period pi / (sqrt(2) |kappa|).
struct RwaBenchmark {
  double period = 0.0;
  DeviationReport pdc;     // against the parametric down-conversion Hamiltonian
  DeviationReport ground;  // against the ground-projected effective Hamiltonian
  double eps2 = 0.0;       // (g_a / Delta_a)^2 + (g_b / Delta_b)^2
  double max_nb = 0.0;     // max <b^dag b> of the PDC evolution
  double min_ground_population = 1.0;
  double population_bound = 0.0;  // 1 - 4 max(g_a / Delta_a, g_b / Delta_b)^2
};

RwaBenchmark run_rwa_benchmark(const DerivedCouplings& c, int n_stlr, int n_nmr, int q, int n_a, int n_b,
                               int points);

}  // namespace nmrsq
