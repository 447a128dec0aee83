#include "nmrsq/device.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmrsq/error.hpp"

namespace nmrsq {

using namespace constants;

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::Config, message);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

double parity(int m) { return (m % 2 == 0) ? 1.0 : -1.0; }

// cos(pi b) and sin(pi b), exact at integer and half-integer b.
std::pair<double, double> cos_sin_pi(double b) {
  const double twice = 2.0 * b;
  if (std::nearbyint(twice) == twice && std::abs(twice) < 1e15) {
    const long long k = static_cast<long long>(twice);
    switch (((k % 4) + 4) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return {std::cos(kPi * b), std::sin(kPi * b)};
}

}  // namespace

void NoiseModel::validate() const {
  require(std::isfinite(D) && D >= 0.0, "noise.D must be >= 0");
  require(positive_finite(diffusion_factor), "noise.c_D must be > 0");
  require(std::isfinite(beta) && beta >= 0.0, "noise.beta must be >= 0");
  require(std::isfinite(phi0), "noise.phi0 must be finite");
  require(n_traj >= 1, "noise.n_traj must be >= 1");
  require(positive_finite(dt), "noise.dt must be > 0");
}

void DeviceParams::validate() const {
  require(positive_finite(EJ_over_h), "device.EJ_over_h must be > 0");
  require(Omega_over_2pi.has_value() != Ec_over_h.has_value(),
          "device: exactly one of Omega_over_2pi and Ec_over_h must be given");
  if (Omega_over_2pi) require(positive_finite(*Omega_over_2pi), "device.Omega_over_2pi must be > 0");
  if (Ec_over_h) require(positive_finite(*Ec_over_h), "device.Ec_over_h must be > 0");
  require(std::isfinite(n_g) && n_g >= 0.0 && n_g <= 1.0, "device.n_g must lie in [0, 1]");
  require(positive_finite(Cg_over_CSigma), "device.Cg_over_CSigma must be > 0");
  require(positive_finite(V0), "device.V0 must be > 0");
  require(positive_finite(B), "device.B must be > 0");
  require(positive_finite(W), "device.W must be > 0");
  require(positive_finite(omega_a_over_2pi), "device.omega_a_over_2pi must be > 0");
  require(positive_finite(omega_b_over_2pi), "device.omega_b_over_2pi must be > 0");
  require(x0.has_value() != M.has_value(), "device: exactly one of x0 and M must be given");
  if (x0) require(positive_finite(*x0), "device.x0 must be > 0");
  if (M) require(positive_finite(*M), "device.M must be > 0");
  require(std::isfinite(beta) && beta >= 0.0, "device.beta must be >= 0");
  require(std::isfinite(phi), "device.phi must be finite");
}

const std::vector<std::string>& device_field_names() {
  static const std::vector<std::string> names = {
      "EJ_over_h", "Omega_over_2pi", "Ec_over_h",        "n_g",   "m", "Cg_over_CSigma", "V0", "B",
      "W",         "omega_a_over_2pi", "omega_b_over_2pi", "x0", "M", "beta",           "phi"};
  return names;
}

DeviceParams device_from_json(const nlohmann::json& j) {
  require(j.is_object(), "device block must be a JSON object");
  const auto& names = device_field_names();
  for (const auto& [key, value] : j.items()) {
    require(std::find(names.begin(), names.end(), key) != names.end(), "device: unknown field '" + key + "'");
  }
  auto number = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    require(j.at(key).is_number(), std::string("device.") + key + " must be a number");
    return j.at(key).get<double>();
  };
  auto required = [&](const char* key) {
    auto v = number(key);
    require(v.has_value(), std::string("device: missing required field '") + key + "'");
    return *v;
  };

  DeviceParams p;
  p.EJ_over_h = required("EJ_over_h");
  p.Omega_over_2pi = number("Omega_over_2pi");
  p.Ec_over_h = number("Ec_over_h");
  p.n_g = required("n_g");
  require(j.contains("m") && j.at("m").is_number_integer(), "device: missing required integer field 'm'");
  p.m = j.at("m").get<int>();
  p.Cg_over_CSigma = required("Cg_over_CSigma");
  p.V0 = required("V0");
  p.B = required("B");
  p.W = required("W");
  p.omega_a_over_2pi = required("omega_a_over_2pi");
  p.omega_b_over_2pi = required("omega_b_over_2pi");
  p.x0 = number("x0");
  p.M = number("M");
  p.beta = number("beta").value_or(0.0);
  p.phi = number("phi").value_or(0.0);
  p.validate();
  return p;
}

nlohmann::json device_to_json(const DeviceParams& p) {
  nlohmann::json j;
  j["EJ_over_h"] = p.EJ_over_h;
  if (p.Omega_over_2pi) j["Omega_over_2pi"] = *p.Omega_over_2pi;
  if (p.Ec_over_h) j["Ec_over_h"] = *p.Ec_over_h;
  j["n_g"] = p.n_g;
  j["m"] = p.m;
  j["Cg_over_CSigma"] = p.Cg_over_CSigma;
  j["V0"] = p.V0;
  j["B"] = p.B;
  j["W"] = p.W;
  j["omega_a_over_2pi"] = p.omega_a_over_2pi;
  j["omega_b_over_2pi"] = p.omega_b_over_2pi;
  if (p.x0) j["x0"] = *p.x0;
  if (p.M) j["M"] = *p.M;
  j["beta"] = p.beta;
  j["phi"] = p.phi;
  return j;
}

DeviceParams reference_device(double n_g) {
  DeviceParams p;
  p.EJ_over_h = 4e9;
  p.Omega_over_2pi = 10e9;
  p.n_g = n_g;
  p.m = 0;
  p.Cg_over_CSigma = 0.1;
  p.V0 = 2e-6;
  p.B = 0.2;
  p.W = 1e-6;
  p.omega_a_over_2pi = 3e9;
  p.omega_b_over_2pi = 1.5e9;
  p.x0 = 1e-12;
  return p;
}

namespace {

void finish(DerivedCouplings& c) {
  c.Delta_a = c.Omega - c.omega_a;
  c.Delta_b = c.Omega - 2.0 * c.omega_b;
  c.delta = 2.0 * c.omega_b - c.omega_a;
  if (c.Delta_a == 0.0) throw Error(ErrorKind::ZeroDetuning, "Delta_a = Omega - omega_a is zero");
  if (c.Delta_b == 0.0) throw Error(ErrorKind::ZeroDetuning, "Delta_b = Omega - 2 omega_b is zero");
  c.kappa = -0.5 * c.g_a * c.g_b * (1.0 / c.Delta_a + 1.0 / c.Delta_b);
}

}  // namespace

DerivedCouplings derive_couplings(const DeviceParams& params, const DeriveOptions& options) {
  params.validate();
  const bool degenerate = params.n_g == 0.5;
  if (degenerate && !options.allow_degenerate) {
    throw Error(ErrorKind::DegenerateMixingAngle,
                "n_g = 1/2 gives cos(theta) = 0 and g_b = 0; pass the degenerate override to allow it");
  }

  DerivedCouplings c;
  const double two_pi = 2.0 * kPi;
  c.omega_a = two_pi * params.omega_a_over_2pi;
  c.omega_b = two_pi * params.omega_b_over_2pi;
  c.josephson_term = parity(params.m) * two_pi * params.EJ_over_h;

  if (params.Ec_over_h) {
    c.charge_term = two_pi * (*params.Ec_over_h) * (1.0 - 2.0 * params.n_g);
  } else {
    // Back-solve E_c(1-2n_g) from Omega; its sign follows n_g relative to 1/2.
    const double omega_hz = *params.Omega_over_2pi;
    const double split = 2.0 * params.EJ_over_h;
    if (!(omega_hz > split)) {
      throw Error(ErrorKind::Config, "device: Omega_over_2pi must exceed 2 EJ_over_h to back-solve E_c");
    }
    const double magnitude = two_pi * std::sqrt(omega_hz * omega_hz - split * split);
    c.charge_term = degenerate ? 0.0 : (params.n_g < 0.5 ? magnitude : -magnitude);
  }

  c.Omega = std::hypot(c.charge_term, 2.0 * c.josephson_term);
  c.theta = std::atan2(2.0 * c.josephson_term, c.charge_term);
  c.sin_theta = std::sin(c.theta);
  c.cos_theta = degenerate ? 0.0 : std::cos(c.theta);
  if (degenerate) c.sin_theta = c.josephson_term > 0 ? 1.0 : -1.0;

  c.x0 = params.x0 ? *params.x0 : std::sqrt(kHbar / (2.0 * (*params.M) * c.omega_b));
  c.p0 = kHbar / (2.0 * c.x0);

  const double EJ = kPlanck * params.EJ_over_h;
  c.lambda_a = kElementaryCharge * params.Cg_over_CSigma * params.V0 / kHbar;
  const double bw = kPi * params.B * params.W;
  c.lambda_b = parity(params.m) * EJ * bw * bw * c.x0 * c.x0 / (2.0 * kHbar * kFluxQuantum * kFluxQuantum);

  c.g_a = -c.lambda_a * c.sin_theta;
  c.g_b = c.lambda_b * c.cos_theta;
  finish(c);
  return c;
}

DerivedCouplings scaled_couplings(const ScaledModel& model) {
  if (!(model.Omega > 0.0 && model.omega_a > 0.0 && model.omega_b > 0.0)) {
    throw Error(ErrorKind::Config, "scaled model frequencies must be > 0");
  }
  DerivedCouplings c;
  c.omega_a = model.omega_a;
  c.omega_b = model.omega_b;
  c.Omega = model.Omega;
  c.theta = model.theta;
  c.sin_theta = std::sin(model.theta);
  c.cos_theta = std::cos(model.theta);
  c.charge_term = model.Omega * c.cos_theta;
  c.josephson_term = 0.5 * model.Omega * c.sin_theta;
  c.g_a = model.g_a;
  c.g_b = model.g_b;
  c.lambda_a = c.sin_theta != 0.0 ? -model.g_a / c.sin_theta : 0.0;
  c.lambda_b = c.cos_theta != 0.0 ? model.g_b / c.cos_theta : 0.0;
  c.x0 = 1.0;
  c.p0 = 1.0;
  finish(c);
  return c;
}

nlohmann::json couplings_to_json(const DerivedCouplings& c, bool physical) {
  const double inv2pi = 1.0 / (2.0 * kPi);
  nlohmann::json j;
  j["omega_a"] = c.omega_a;
  j["omega_b"] = c.omega_b;
  j["charge_term"] = c.charge_term;
  j["josephson_term"] = c.josephson_term;
  j["lambda_a"] = c.lambda_a;
  j["lambda_b"] = c.lambda_b;
  j["theta"] = c.theta;
  j["sin_theta"] = c.sin_theta;
  j["cos_theta"] = c.cos_theta;
  j["Omega"] = c.Omega;
  j["g_a"] = c.g_a;
  j["g_b"] = c.g_b;
  j["Delta_a"] = c.Delta_a;
  j["Delta_b"] = c.Delta_b;
  j["delta"] = c.delta;
  j["kappa"] = c.kappa;
  j["x0"] = c.x0;
  j["p0"] = c.p0;
  const std::string suffix = physical ? "_over_2pi_hz" : "_over_2pi";
  for (const char* key : {"lambda_a", "lambda_b", "Omega", "g_a", "g_b", "Delta_a", "Delta_b", "delta", "kappa"}) {
    j[std::string(key) + suffix] = j[key].get<double>() * inv2pi;
  }
  return j;
}

std::vector<double> josephson_expansion(const DeviceParams& params, double flux_bias_phi0_units, int order) {
  if (order < 0 || order > 6) throw Error(ErrorKind::Domain, "josephson_expansion order must be in [0, 6]");
  if (!(params.EJ_over_h > 0.0 && params.B > 0.0 && params.W > 0.0)) {
    throw Error(ErrorKind::Config, "josephson_expansion needs EJ_over_h, B and W > 0");
  }
  const double EJ = kPlanck * params.EJ_over_h;
  const double k = kPi * params.B * params.W / kFluxQuantum;
  const auto [c0, s0] = cos_sin_pi(flux_bias_phi0_units);
  std::vector<double> coeffs;
  double kn = 1.0;
  double factorial = 1.0;
  for (int n = 0; n <= order; ++n) {
    if (n > 0) {
      kn *= k;
      factorial *= n;
    }
    // n-th derivative of cos(phi0 + k x) at 0 is k^n cos(phi0 + n pi/2).
    double trig = 0.0;
    switch (n % 4) {
      case 0: trig = c0; break;
      case 1: trig = -s0; break;
      case 2: trig = -c0; break;
      default: trig = s0; break;
    }
    coeffs.push_back(-EJ * kn * trig / factorial);
  }
  return coeffs;
}

double josephson_energy(const DeviceParams& params, double flux_bias_phi0_units, double x) {
  const double EJ = kPlanck * params.EJ_over_h;
  return -EJ * std::cos(kPi * (flux_bias_phi0_units + params.B * params.W * x / kFluxQuantum));
}

bool RegimeReport::pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const RegimeEntry& e) { return e.pass; });
}

const RegimeEntry* RegimeReport::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

RegimeReport validate_regimes(const DerivedCouplings& c, const std::optional<RegimeNoise>& noise, double threshold) {
  RegimeReport report;
  report.threshold = threshold;
  auto ratio_of = [](double left, double right) {
    return right == 0.0 ? std::numeric_limits<double>::infinity() : std::abs(left / right);
  };
  auto much_greater = [&](std::string name, double left, double right) {
    const double r = ratio_of(left, right);
    report.entries.push_back({std::move(name), left, right, r, r >= threshold});
  };

  much_greater("large_detuning_a", std::abs(c.Delta_a), std::abs(c.g_a));
  much_greater("large_detuning_b", std::abs(c.Delta_b), std::abs(c.g_b));
  {
    const double r = ratio_of(c.delta, c.omega_b);
    report.entries.push_back({"resonance", std::abs(c.delta), c.omega_b, r, r <= 1e-9});
  }
  much_greater("stark_shift_a", c.omega_a, c.g_a * c.g_a / std::abs(c.Delta_a));
  much_greater("stark_shift_b", c.omega_b, c.g_b * c.g_b / std::abs(c.Delta_b));
  if (noise) {
    const double inv_tau = noise->tau > 0.0 ? 1.0 / noise->tau : std::numeric_limits<double>::infinity();
    much_greater("noise_linewidth_vs_duration", inv_tau, noise->noise.D);
    much_greater("noise_duration_vs_drive", 2.0 * std::abs(c.kappa) * noise->noise.beta, inv_tau);
  }
  return report;
}

nlohmann::json regime_to_json(const RegimeReport& report) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json entry;
    entry["name"] = e.name;
    entry["left"] = e.left;
    entry["right"] = e.right;
    entry["ratio"] = std::isfinite(e.ratio) ? nlohmann::json(e.ratio) : nlohmann::json("inf");
    entry["pass"] = e.pass;
    arr.push_back(std::move(entry));
  }
  nlohmann::json j;
  j["threshold"] = report.threshold;
  j["entries"] = std::move(arr);
  j["pass"] = report.pass();
  return j;
}

}  // namespace nmrsq
