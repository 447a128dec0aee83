#pragma once

// Run configuration: strict JSON ingestion with an explicit unit system.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nmrsq/device.hpp"
#include "nmrsq/noise.hpp"

namespace nmrsq {

enum class Units { Physical, Scaled };

std::string_view to_string(Units units);

struct SpacesConfig {
  int N_a = 10;
  int N_b = 20;
};

struct ParametricConfig {
  std::optional<double> kappa;  // rad per time unit; defaults to the derived kappa
  double beta = 1.0;
  double phi = 1.5707963267948966;
  int N_b = 80;
};

struct EvolveConfig {
  std::vector<std::string> models = {"full-rwa", "pdc"};
  std::optional<double> t_max;  // default: one conversion period (or xi = 1 for parametric alone)
  int points = 401;
  int initial_q = 0;
  int initial_n_a = 1;
  int initial_n_b = 0;
  ParametricConfig parametric;
};

struct VerifyConfig {
  std::vector<double> squeeze_xi = {0.2, 0.5, 0.8};
  int squeeze_N_b = 80;
  double bogoliubov_xi = 0.5;
  int bogoliubov_dim = 60;
  int frohlich_N = 6;       // scaling study
  int frohlich_terms_N = 8;  // term-by-term report
  double frohlich_ratio_lo = 6.8;
  double frohlich_ratio_hi = 9.2;
  /// Regression bound on max |<n_b>_full - <n_b>_pdc| for the scaled benchmark.
  double rwa_deviation_bound = 0.0218;
};

struct Fig2Config {
  std::vector<double> ratios = {0.0, 0.001, 0.01, 0.05};
  double xi_max = 3.0;
  int points = 301;
  bool mc = false;
  int trajectories = 2000;
  double mc_xi_max = 1.0;  // Monte Carlo only on grid points up to here
  int mc_dim = 60;
  double kappa_beta = 1.0;
  double dt = 1e-3;
};

struct RunConfig {
  Units units = Units::Scaled;
  std::optional<DeviceParams> device;  // physical
  std::optional<ScaledModel> scaled;   // scaled
  SpacesConfig spaces;
  NoiseModel noise;
  EvolveConfig evolve;
  VerifyConfig verify;
  Fig2Config fig2;
  bool allow_degenerate_mixing = false;
  double regime_threshold = 10.0;
  std::uint64_t seed = 0;

  /// The input document as parsed; digest() hashes its canonical form plus the seed.
  nlohmann::json source;

  std::string digest() const;
};

/// Throws Config on any structural problem, naming the offending key.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Scaled benchmark used when no config is given.
RunConfig default_config(Units units);

/// Physical or scaled couplings according to the unit system.
DerivedCouplings couplings_of(const RunConfig& config);

}  // namespace nmrsq
