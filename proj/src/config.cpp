#include "nmrsq/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nmrsq/error.hpp"
#include "nmrsq/result_table.hpp"

namespace nmrsq {

std::string_view to_string(Units units) { return units == Units::Physical ? "physical" : "scaled"; }

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * constants::kPi;

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::Config, what); }

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where + " must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) fail(where + ": unknown field '" + key + "'");
  }
}

double number(const json& j, const std::string& where, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(where + "." + key + " must be a number");
  return j.at(key).get<double>();
}

double required_number(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) fail(where + ": missing required field '" + key + "'");
  return number(j, where, key, 0.0);
}

int integer(const json& j, const std::string& where, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) fail(where + "." + key + " must be an integer");
  return j.at(key).get<int>();
}

bool boolean(const json& j, const std::string& where, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) fail(where + "." + key + " must be true or false");
  return j.at(key).get<bool>();
}

std::vector<double> number_list(const json& j, const std::string& where, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array()) fail(where + "." + key + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(where + "." + key + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

void positive_dim(int n, const std::string& what) {
  if (n < 1) fail(what + " must be a positive dimension");
}

ScaledModel parse_scaled(const json& j) {
  only_keys(j, "scaled", {"Omega_over_2pi", "omega_a_over_2pi", "omega_b_over_2pi", "g_a_over_2pi", "g_b_over_2pi", "theta"});
  ScaledModel m;
  m.Omega = kTwoPi * required_number(j, "scaled", "Omega_over_2pi");
  m.omega_a = kTwoPi * required_number(j, "scaled", "omega_a_over_2pi");
  m.omega_b = kTwoPi * required_number(j, "scaled", "omega_b_over_2pi");
  m.g_a = kTwoPi * required_number(j, "scaled", "g_a_over_2pi");
  m.g_b = kTwoPi * required_number(j, "scaled", "g_b_over_2pi");
  m.theta = number(j, "scaled", "theta", m.theta);
  for (double f : {m.Omega, m.omega_a, m.omega_b}) {
    if (!(f > 0.0)) fail("scaled: frequencies must be positive");
    // Physical-looking magnitudes in a scaled config are almost always a unit mix-up.
    if (f / kTwoPi >= 1e3) fail("scaled: frequency " + format_double(f / kTwoPi) + " looks physical (>= 1e3); set units to physical");
  }
  return m;
}

void check_physical_magnitudes(const DeviceParams& p) {
  auto need = [](double v, const char* name) {
    if (!(v > 1e3)) fail(std::string("physical units need ") + name + " > 1e3 Hz, got " + format_double(v));
  };
  need(p.EJ_over_h, "EJ_over_h");
  need(p.omega_a_over_2pi, "omega_a_over_2pi");
  need(p.omega_b_over_2pi, "omega_b_over_2pi");
  if (p.Omega_over_2pi) need(*p.Omega_over_2pi, "Omega_over_2pi");
  if (p.Ec_over_h) need(*p.Ec_over_h, "Ec_over_h");
}

NoiseModel parse_noise(const json& j) {
  only_keys(j, "noise", {"D", "diffusion_factor", "beta", "phi0", "n_traj", "dt"});
  NoiseModel n;
  n.D = number(j, "noise", "D", n.D);
  n.diffusion_factor = number(j, "noise", "diffusion_factor", n.diffusion_factor);
  n.beta = number(j, "noise", "beta", n.beta);
  n.phi0 = number(j, "noise", "phi0", n.phi0);
  n.n_traj = integer(j, "noise", "n_traj", n.n_traj);
  n.dt = number(j, "noise", "dt", n.dt);
  return n;
}

EvolveConfig parse_evolve(const json& j) {
  only_keys(j, "evolve", {"models", "t_max", "points", "initial", "parametric"});
  EvolveConfig e;
  if (j.contains("models")) {
    if (!j.at("models").is_array() || j.at("models").empty()) fail("evolve.models must be a non-empty array");
    e.models.clear();
    for (const auto& m : j.at("models")) {
      if (!m.is_string()) fail("evolve.models entries must be strings");
      const auto name = m.get<std::string>();
      if (name != "full-rwa" && name != "pdc" && name != "parametric") {
        fail("evolve.models: unknown model '" + name + "' (expected full-rwa, pdc, parametric)");
      }
      e.models.push_back(name);
    }
  }
  if (j.contains("t_max")) {
    e.t_max = number(j, "evolve", "t_max", 0.0);
    if (!(*e.t_max > 0.0)) fail("evolve.t_max must be positive");
  }
  e.points = integer(j, "evolve", "points", e.points);
  if (e.points < 2) fail("evolve.points must be at least 2");
  if (j.contains("initial")) {
    const json& i = j.at("initial");
    only_keys(i, "evolve.initial", {"q", "n_a", "n_b"});
    e.initial_q = integer(i, "evolve.initial", "q", e.initial_q);
    e.initial_n_a = integer(i, "evolve.initial", "n_a", e.initial_n_a);
    e.initial_n_b = integer(i, "evolve.initial", "n_b", e.initial_n_b);
    if (e.initial_q < 0 || e.initial_q > 1 || e.initial_n_a < 0 || e.initial_n_b < 0) {
      fail("evolve.initial levels out of range");
    }
  }
  if (j.contains("parametric")) {
    const json& p = j.at("parametric");
    only_keys(p, "evolve.parametric", {"kappa", "beta", "phi", "N_b"});
    if (p.contains("kappa")) e.parametric.kappa = number(p, "evolve.parametric", "kappa", 0.0);
    e.parametric.beta = number(p, "evolve.parametric", "beta", e.parametric.beta);
    e.parametric.phi = number(p, "evolve.parametric", "phi", e.parametric.phi);
    e.parametric.N_b = integer(p, "evolve.parametric", "N_b", e.parametric.N_b);
    positive_dim(e.parametric.N_b, "evolve.parametric.N_b");
  }
  return e;
}

VerifyConfig parse_verify(const json& j) {
  only_keys(j, "verify", {"squeeze_xi", "squeeze_N_b", "bogoliubov_xi", "bogoliubov_dim", "frohlich_N",
                          "frohlich_terms_N", "rwa_deviation_bound"});
  VerifyConfig v;
  v.squeeze_xi = number_list(j, "verify", "squeeze_xi", v.squeeze_xi);
  v.squeeze_N_b = integer(j, "verify", "squeeze_N_b", v.squeeze_N_b);
  v.bogoliubov_xi = number(j, "verify", "bogoliubov_xi", v.bogoliubov_xi);
  v.bogoliubov_dim = integer(j, "verify", "bogoliubov_dim", v.bogoliubov_dim);
  v.frohlich_N = integer(j, "verify", "frohlich_N", v.frohlich_N);
  v.frohlich_terms_N = integer(j, "verify", "frohlich_terms_N", v.frohlich_terms_N);
  v.rwa_deviation_bound = number(j, "verify", "rwa_deviation_bound", v.rwa_deviation_bound);
  positive_dim(v.squeeze_N_b, "verify.squeeze_N_b");
  positive_dim(v.bogoliubov_dim, "verify.bogoliubov_dim");
  positive_dim(v.frohlich_N, "verify.frohlich_N");
  positive_dim(v.frohlich_terms_N, "verify.frohlich_terms_N");
  return v;
}

Fig2Config parse_fig2(const json& j) {
  only_keys(j, "fig2", {"ratios", "xi_max", "points", "mc", "trajectories", "mc_xi_max", "mc_dim", "kappa_beta", "dt"});
  Fig2Config f;
  f.ratios = number_list(j, "fig2", "ratios", f.ratios);
  f.xi_max = number(j, "fig2", "xi_max", f.xi_max);
  f.points = integer(j, "fig2", "points", f.points);
  f.mc = boolean(j, "fig2", "mc", f.mc);
  f.trajectories = integer(j, "fig2", "trajectories", f.trajectories);
  f.mc_xi_max = number(j, "fig2", "mc_xi_max", f.mc_xi_max);
  f.mc_dim = integer(j, "fig2", "mc_dim", f.mc_dim);
  f.kappa_beta = number(j, "fig2", "kappa_beta", f.kappa_beta);
  f.dt = number(j, "fig2", "dt", f.dt);
  positive_dim(f.mc_dim, "fig2.mc_dim");
  return f;
}

}  // namespace

std::string RunConfig::digest() const { return sha256_hex(canonical_json(source)); }

RunConfig parse_config(const json& j) {
  only_keys(j, "config", {"units", "device", "scaled", "spaces", "noise", "evolve", "verify", "fig2",
                          "allow_degenerate_mixing", "regime_threshold", "seed"});
  if (!j.contains("units")) fail("config: missing required field 'units' (physical or scaled)");
  if (!j.at("units").is_string()) fail("config.units must be \"physical\" or \"scaled\"");
  const auto units = j.at("units").get<std::string>();

  RunConfig c;
  c.source = j;
  if (units == "physical") {
    c.units = Units::Physical;
    if (!j.contains("device")) fail("config: physical units need a 'device' block");
    if (j.contains("scaled")) fail("config: a physical config must not carry a 'scaled' block");
    try {
      c.device = device_from_json(j.at("device"));
    } catch (const Error& e) {
      fail(e.what());
    }
    check_physical_magnitudes(*c.device);
  } else if (units == "scaled") {
    c.units = Units::Scaled;
    if (!j.contains("scaled")) fail("config: scaled units need a 'scaled' block");
    if (j.contains("device")) fail("config: a scaled config must not carry a 'device' block");
    c.scaled = parse_scaled(j.at("scaled"));
  } else {
    fail("config.units must be \"physical\" or \"scaled\", got \"" + units + "\"");
  }

  if (j.contains("spaces")) {
    const json& s = j.at("spaces");
    only_keys(s, "spaces", {"N_a", "N_b"});
    c.spaces.N_a = integer(s, "spaces", "N_a", c.spaces.N_a);
    c.spaces.N_b = integer(s, "spaces", "N_b", c.spaces.N_b);
    positive_dim(c.spaces.N_a, "spaces.N_a");
    positive_dim(c.spaces.N_b, "spaces.N_b");
  }
  if (j.contains("noise")) c.noise = parse_noise(j.at("noise"));
  if (j.contains("evolve")) c.evolve = parse_evolve(j.at("evolve"));
  if (j.contains("verify")) c.verify = parse_verify(j.at("verify"));
  if (j.contains("fig2")) c.fig2 = parse_fig2(j.at("fig2"));
  c.allow_degenerate_mixing = boolean(j, "config", "allow_degenerate_mixing", false);
  c.regime_threshold = number(j, "config", "regime_threshold", c.regime_threshold);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail("config.seed must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  c.noise.master_seed = c.seed;
  try {
    c.noise.validate();
  } catch (const Error& e) {
    fail(std::string("noise: ") + e.what());
  }
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Config, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

RunConfig default_config(Units units) {
  json j;
  if (units == Units::Physical) {
    j["units"] = "physical";
    j["device"] = device_to_json(reference_device());
  } else {
    j["units"] = "scaled";
    j["scaled"] = {{"Omega_over_2pi", 10.0}, {"omega_a_over_2pi", 3.0}, {"omega_b_over_2pi", 1.5},
                   {"g_a_over_2pi", 0.3},    {"g_b_over_2pi", 0.2}};
  }
  return parse_config(j);
}

DerivedCouplings couplings_of(const RunConfig& config) {
  if (config.units == Units::Physical) {
    DeriveOptions opts;
    opts.allow_degenerate = config.allow_degenerate_mixing;
    return derive_couplings(*config.device, opts);
  }
  return scaled_couplings(*config.scaled);
}

}  // namespace nmrsq
