#pragma once

// Circuit parameters -> derived couplings of the CPB / STLR / NMR model,
// Josephson-energy Taylor expansion and regime diagnostics.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nmrsq/noise.hpp"

namespace nmrsq {

namespace constants {
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kHbar = 1.054571817e-34;               // J s
inline constexpr double kPlanck = 2.0 * kPi * kHbar;
inline constexpr double kFluxQuantum = kPlanck / (2.0 * kElementaryCharge);  // Wb
}  // namespace constants

struct DeviceParams {
  double EJ_over_h = 0.0;                  // Hz
  std::optional<double> Omega_over_2pi;    // Hz, exclusive with Ec_over_h
  std::optional<double> Ec_over_h;         // Hz
  double n_g = 0.0;
  int m = 0;                               // flux bias Phi_e^0 = m Phi_0
  double Cg_over_CSigma = 0.0;
  double V0 = 0.0;                         // V
  double B = 0.0;                          // T
  double W = 0.0;                          // m, SQUID width
  double omega_a_over_2pi = 0.0;           // Hz
  double omega_b_over_2pi = 0.0;           // Hz
  std::optional<double> x0;                // m, exclusive with M
  std::optional<double> M;                 // kg
  double beta = 0.0;
  double phi = 0.0;

  void validate() const;
};

/// Field names accepted in the JSON device block (strict).
const std::vector<std::string>& device_field_names();
DeviceParams device_from_json(const nlohmann::json& j);
nlohmann::json device_to_json(const DeviceParams& p);

/// Paper's Section III parameter set; n_g = 0.6 (> 1/2) unless overridden.
DeviceParams reference_device(double n_g = 0.6);

/// All angular quantities in rad/s. charge_term and josephson_term are the
/// qubit Hamiltonian's E_c(1-2n_g)/hbar and (-1)^m E_J/hbar.
struct DerivedCouplings {
  double omega_a = 0.0;
  double omega_b = 0.0;
  double charge_term = 0.0;
  double josephson_term = 0.0;
  double lambda_a = 0.0;
  double lambda_b = 0.0;
  double theta = 0.0;
  double sin_theta = 0.0;
  double cos_theta = 0.0;
  double Omega = 0.0;
  double g_a = 0.0;
  double g_b = 0.0;
  double Delta_a = 0.0;
  double Delta_b = 0.0;
  double delta = 0.0;
  double kappa = 0.0;
  double x0 = 0.0;  // m; 1 in scaled units
  double p0 = 0.0;  // kg m/s; 1 in scaled units
};

struct DeriveOptions {
  bool allow_degenerate = false;  // permit n_g = 1/2 (cos theta = 0)
};

DerivedCouplings derive_couplings(const DeviceParams& params, const DeriveOptions& options = {});

/// Dimensionless model used for desk-scale dynamics: frequencies, couplings
/// and mixing angle given directly (any consistent angular unit).
struct ScaledModel {
  double Omega = 0.0;
  double omega_a = 0.0;
  double omega_b = 0.0;
  double g_a = 0.0;
  double g_b = 0.0;
  double theta = 2.214297435588181;  // atan2(0.8, -0.6), the reference-set angle
};

DerivedCouplings scaled_couplings(const ScaledModel& model);

nlohmann::json couplings_to_json(const DerivedCouplings& c, bool physical);

/// Taylor coefficients c_0..c_order (J / m^n) of
/// E_J(x) = -E_J cos(pi (Phi_e^0 + B W x) / Phi_0) about x = 0.
std::vector<double> josephson_expansion(const DeviceParams& params, double flux_bias_phi0_units, int order);

/// Closed form of the same function, for convergence checks.
double josephson_energy(const DeviceParams& params, double flux_bias_phi0_units, double x);

struct RegimeEntry {
  std::string name;
  double left = 0.0;
  double right = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

struct RegimeReport {
  std::vector<RegimeEntry> entries;
  double threshold = 10.0;

  bool pass() const;
  const RegimeEntry* find(const std::string& name) const;
};

struct RegimeNoise {
  NoiseModel noise;
  double tau = 0.0;
};

RegimeReport validate_regimes(const DerivedCouplings& c, const std::optional<RegimeNoise>& noise = std::nullopt,
                              double threshold = 10.0);

nlohmann::json regime_to_json(const RegimeReport& report);

}  // namespace nmrsq
