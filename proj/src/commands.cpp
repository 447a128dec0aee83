#include "nmrsq/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "nmrsq/error.hpp"
#include "nmrsq/hamiltonian.hpp"
#include "nmrsq/result_table.hpp"
#include "nmrsq/squeezing.hpp"

#ifndef NMRSQ_VERSION_STRING
#define NMRSQ_VERSION_STRING "0.0.0"
#endif

namespace nmrsq {

using nlohmann::json;

namespace {

constexpr double kPi = constants::kPi;

std::optional<std::string> source_date() {
  const char* env = std::getenv("SOURCE_DATE_EPOCH");
  if (!env || !*env) return std::nullopt;
  char* end = nullptr;
  const long long secs = std::strtoll(env, &end, 10);
  if (*end != '\0' || secs < 0) return std::nullopt;
  const std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

std::string path_in(const OutputOptions& out, const std::string& name) {
  return (std::filesystem::path(out.out_dir) / name).string();
}

void write_json(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

void attach_metadata(ResultTable& table, const json& meta) {
  for (const auto& [key, value] : meta.items()) {
    table.metadata.emplace_back(key, value.is_string() ? value.get<std::string>() : value.dump());
  }
}

void require_scaled(const RunConfig& config, const std::string& what) {
  if (config.units != Units::Scaled) {
    throw Error(ErrorKind::Config,
                what + " needs units: scaled. Physical couplings (kappa ~ 1 Hz against GHz frequencies) put the "
                       "dynamics nine orders of magnitude apart; use a scaled config with the same ratios.");
  }
}

json check(const std::string& name, bool pass, double measured, const std::string& relation, double bound) {
  return {{"name", name}, {"pass", pass}, {"measured", measured}, {"relation", relation}, {"bound", bound}};
}

std::optional<std::string> embedded_digest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot read overlay '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  const std::string text = ss.str();
  const auto j = json::parse(text, nullptr, false);
  if (!j.is_discarded() && j.is_object()) {
    if (j.contains("meta") && j["meta"].contains("config_digest")) return j["meta"]["config_digest"].get<std::string>();
    return std::nullopt;
  }
  std::istringstream lines(text);
  std::string line;
  const std::string key = "# config_digest: ";
  while (std::getline(lines, line) && line.rfind("#", 0) == 0) {
    if (line.rfind(key, 0) == 0) return line.substr(key.size());
  }
  return std::nullopt;
}

}  // namespace

json output_metadata(const RunConfig& config, const std::string& command) {
  json meta;
  meta["command"] = command;
  meta["config_digest"] = config.digest();
  meta["code_version"] = NMRSQ_VERSION_STRING;
  meta["seed"] = config.seed;
  meta["units"] = std::string(to_string(config.units));
  if (auto ts = source_date()) meta["timestamp"] = *ts;
  return meta;
}

// ---------------------------------------------------------------------------

CommandResult cmd_params(const RunConfig& config, const OutputOptions& out) {
  const DerivedCouplings c = couplings_of(config);
  const bool physical = config.units == Units::Physical;
  const RegimeReport regimes = validate_regimes(c, std::nullopt, config.regime_threshold);

  json j;
  j["meta"] = output_metadata(config, "params");
  if (physical) j["device"] = device_to_json(*config.device);
  j["couplings"] = couplings_to_json(c, physical);
  const std::string kappa_key = physical ? "kappa_over_2pi_hz" : "kappa_over_2pi";
  j[kappa_key] = j["couplings"][kappa_key];
  j["regimes"] = regime_to_json(regimes);

  CommandResult result;
  const std::string path = path_in(out, "params.json");
  write_json(path, j);
  result.files.push_back(path);
  result.report = j;
  result.exit_code = out.strict && !regimes.pass() ? 2 : 0;
  return result;
}

// ---------------------------------------------------------------------------

RwaBenchmark run_rwa_benchmark(const DerivedCouplings& c, int n_stlr, int n_nmr, int q, int n_a, int n_b,
                               int points) {
  if (c.kappa == 0.0) throw Error(ErrorKind::Domain, "conversion coupling is zero; no conversion period");
  RwaBenchmark bench;
  bench.period = kPi / (std::sqrt(2.0) * std::abs(c.kappa));
  const auto times = uniform_grid(0.0, bench.period, points);

  const Space full = full_space(n_stlr, n_nmr);
  const Space eff = stlr_nmr_space(n_stlr, n_nmr);
  const Operator H_full = build_rwa(c, full);
  const Operator S = frohlich_generator(c, full);
  const State full0 = basis_state(full, {q, n_a, n_b});
  const State eff0 = basis_state(eff, {n_a, n_b});
  const std::vector<ObservableSpec> obs = {
      {"exp_nb", embed_operator(number_op(n_nmr, kNmr), kNmr, eff)},
      {"exp_na", embed_operator(number_op(n_stlr, kStlr), kStlr, eff)},
  };
  const EmbedMap embed = qubit_embedding(full);
  bench.pdc = compare_dynamics(H_full, build_effective(c, eff, HamiltonianKind::PDC), embed, full0, eff0, obs, times, S);
  bench.ground =
      compare_dynamics(H_full, build_effective(c, eff, HamiltonianKind::EffectiveGround), embed, full0, eff0, obs, times, S);

  const double ea = c.g_a / c.Delta_a;
  const double eb = c.g_b / c.Delta_b;
  bench.eps2 = ea * ea + eb * eb;
  const double emax = std::max(std::abs(ea), std::abs(eb));
  bench.population_bound = 1.0 - 4.0 * emax * emax;
  const auto& nb = bench.pdc.effective_values[0];
  bench.max_nb = *std::max_element(nb.begin(), nb.end());
  const auto& pop = bench.pdc.qubit_ground_population;
  bench.min_ground_population = *std::min_element(pop.begin(), pop.end());
  return bench;
}

namespace {

json verify_frohlich(const RunConfig& config, bool& pass) {
  require_scaled(config, "verify frohlich");
  const DerivedCouplings c = couplings_of(config);
  const auto& v = config.verify;
  json checks = json::array();

  const ScalingResult scaling = frohlich_scaling(c, v.frohlich_N, v.frohlich_N);
  checks.push_back(check("exact_vs_bch2_halving_ratio", scaling.ratio >= v.frohlich_ratio_lo && scaling.ratio <= v.frohlich_ratio_hi,
                         scaling.ratio, "in", v.frohlich_ratio_lo));
  checks.back()["bound_hi"] = v.frohlich_ratio_hi;
  checks.back()["residual_full"] = scaling.residual_full;
  checks.back()["residual_half"] = scaling.residual_half;

  const FrohlichReport rep = frohlich_report(c, v.frohlich_terms_N, v.frohlich_terms_N);
  checks.push_back(check("conversion_coefficient_rel_error", rep.max_conversion_rel_error <= 1e-10,
                         rep.max_conversion_rel_error, "<=", 1e-10));
  checks.push_back(check("ground_block_vs_pdc_plus_stark", rep.pdc_residual <= 1e-10, rep.pdc_residual, "<=", 1e-10));
  checks.push_back(check("ground_block_fit_residual", rep.ground_fit_residual <= 1e-10, rep.ground_fit_residual, "<=", 1e-10));

  const double scale = std::max({std::abs(c.Omega), std::abs(c.omega_a), std::abs(c.omega_b)});
  auto terms_json = [&](const std::vector<TermCoefficient>& terms, const std::string& prefix) {
    json arr = json::array();
    for (const auto& t : terms) {
      const bool ok = t.expected != 0.0 ? t.rel_error <= 1e-10 : t.abs_error <= 1e-10 * scale;
      arr.push_back({{"term", t.name},
                     {"expected", t.expected},
                     {"measured_re", t.measured.real()},
                     {"measured_im", t.measured.imag()},
                     {"rel_error", t.rel_error},
                     {"abs_error", t.abs_error},
                     {"in_closed_form", t.in_closed_form},
                     {"pass", ok}});
      if (!ok) checks.push_back(check(prefix + ":" + t.name, false, t.abs_error, "<=", 1e-10));
    }
    return arr;
  };

  json j;
  j["ground_terms"] = terms_json(rep.ground_terms, "ground");
  j["full_terms"] = terms_json(rep.full_terms, "full");
  j["checks"] = checks;
  j["beyond_closed_form"] = {{"third_order_qubit_offdiagonal_norm", rep.offdiagonal_norm},
                             {"truncation_artifact_norm", rep.truncation_artifact_norm},
                             {"bulk_fit_residual", rep.full_fit_residual},
                             {"normalization", "relative to ||H_RWA||_F"}};
  j["conversion_coefficient"] = rep.conversion_coefficient;
  for (const auto& ch : checks) pass = pass && ch["pass"].get<bool>();
  return j;
}

json verify_rwa(const RunConfig& config, bool& pass) {
  require_scaled(config, "verify rwa");
  const DerivedCouplings c = couplings_of(config);
  const auto& e = config.evolve;
  const RwaBenchmark b = run_rwa_benchmark(c, config.spaces.N_a, config.spaces.N_b, e.initial_q, e.initial_n_a,
                                           e.initial_n_b, e.points);
  json checks = json::array();
  const double dev = b.pdc.max_naive[0];
  checks.push_back(check("max_dev_exp_nb_full_vs_pdc", dev <= config.verify.rwa_deviation_bound, dev, "<=",
                         config.verify.rwa_deviation_bound));
  checks.push_back(check("min_qubit_ground_population", b.min_ground_population >= b.population_bound,
                         b.min_ground_population, ">=", b.population_bound));
  json j;
  j["checks"] = checks;
  j["period"] = b.period;
  j["eps2"] = b.eps2;
  j["max_exp_nb"] = b.max_nb;
  j["dev_over_eps2_nbmax"] = b.max_nb > 0 ? dev / (b.eps2 * b.max_nb) : 0.0;
  j["max_dev_exp_nb_full_vs_ground_effective"] = b.ground.max_naive[0];
  j["max_dev_exp_nb_frame_corrected"] = b.pdc.max_frame_corrected[0];
  j["max_dev_exp_na_full_vs_pdc"] = b.pdc.max_naive[1];
  j["predicted_scale"] = b.pdc.predicted_scale;
  for (const auto& ch : checks) pass = pass && ch["pass"].get<bool>();
  return j;
}

json verify_bogoliubov(const RunConfig& config, bool& pass) {
  const auto& v = config.verify;
  const Space space = nmr_space(v.bogoliubov_dim);
  json checks = json::array();
  const double r0 = bogoliubov_check(0.0, space);
  checks.push_back(check("residual_xi_0", r0 == 0.0, r0, "==", 0.0));
  const double r = bogoliubov_check(v.bogoliubov_xi, space);
  checks.push_back(check("residual_lower_two_thirds", r <= 1e-8, r, "<=", 1e-8));
  json j;
  j["checks"] = checks;
  j["xi"] = v.bogoliubov_xi;
  j["dim"] = v.bogoliubov_dim;
  j["levels_checked"] = (2 * v.bogoliubov_dim) / 3;
  for (const auto& ch : checks) pass = pass && ch["pass"].get<bool>();
  return j;
}

json verify_squeeze_law(const RunConfig& config, bool& pass) {
  const auto& v = config.verify;
  const Space space = nmr_space(v.squeeze_N_b);
  json checks = json::array();
  for (double xi : v.squeeze_xi) {
    const Operator S = squeeze_operator({xi}, space);
    const State vac = basis_state(space, {0});
    const State sq = State::normalized(space, S.apply(vac.amplitudes()));
    const VariancePair got = quadrature_variances(sq);
    const VariancePair want = predicted_variances(xi, 0.0, VarianceMode::Ideal);
    const double ex = std::abs(got.dx / want.dx - 1.0);
    const double ep = std::abs(got.dp / want.dp - 1.0);
    const double eu = std::abs(got.dx * got.dp - 1.0);
    const std::string tag = "xi=" + format_double(xi);
    checks.push_back(check(tag + ":dx_rel_error", ex <= 1e-6, ex, "<=", 1e-6));
    checks.push_back(check(tag + ":dp_rel_error", ep <= 1e-6, ep, "<=", 1e-6));
    checks.push_back(check(tag + ":uncertainty_product_error", eu <= 1e-6, eu, "<=", 1e-6));
  }
  json j;
  j["checks"] = checks;
  j["N_b"] = v.squeeze_N_b;
  for (const auto& ch : checks) pass = pass && ch["pass"].get<bool>();
  return j;
}

}  // namespace

CommandResult cmd_verify(const RunConfig& config, const std::string& suite, const OutputOptions& out,
                         const std::optional<std::string>& overlay) {
  bool pass = true;
  json body;
  if (suite == "frohlich") {
    body = verify_frohlich(config, pass);
  } else if (suite == "rwa") {
    body = verify_rwa(config, pass);
  } else if (suite == "bogoliubov") {
    body = verify_bogoliubov(config, pass);
  } else if (suite == "squeeze-law") {
    body = verify_squeeze_law(config, pass);
  } else {
    throw Error(ErrorKind::Config, "unknown verify suite '" + suite + "' (frohlich, rwa, bogoliubov, squeeze-law)");
  }
  if (overlay) {
    const auto found = embedded_digest(*overlay);
    const bool match = found && *found == config.digest();
    body["checks"].push_back({{"name", "overlay_config_digest"},
                              {"pass", match},
                              {"overlay", *overlay},
                              {"found", found ? *found : std::string("none")},
                              {"expected", config.digest()}});
    pass = pass && match;
  }

  json j;
  j["meta"] = output_metadata(config, "verify");
  j["suite"] = suite;
  j["pass"] = pass;
  for (const auto& [key, value] : body.items()) j[key] = value;

  CommandResult result;
  const std::string path = path_in(out, "report.json");
  write_json(path, j);
  result.files.push_back(path);
  result.report = j;
  result.exit_code = pass ? 0 : 2;
  return result;
}

// ---------------------------------------------------------------------------

CommandResult cmd_fig2(const RunConfig& config, const OutputOptions& out) {
  const Fig2Config& f = config.fig2;
  if (f.points < 2) throw Error(ErrorKind::Config, "fig2: --points must be at least 2");
  if (!(f.xi_max > 0.0)) throw Error(ErrorKind::Config, "fig2: --xi-max must be positive");
  for (double r : f.ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorKind::Config, "fig2: ratios must be finite and >= 0");
  }
  if (f.ratios.empty()) throw Error(ErrorKind::Config, "fig2: at least one ratio is needed");
  if (f.mc && f.trajectories < 1) throw Error(ErrorKind::Config, "fig2: --trajectories must be positive");

  const auto grid = uniform_grid(0.0, f.xi_max, f.points);
  const Fig2Table table = fig2_table(f.ratios, grid);

  // Monte Carlo on the leading grid points (xi <= mc_xi_max), one ensemble per ratio.
  std::vector<std::vector<std::optional<std::pair<double, double>>>> mc(f.ratios.size(),
                                                                          std::vector<std::optional<std::pair<double, double>>>(grid.size()));
  if (f.mc) {
    std::size_t last = 0;
    while (last + 1 < grid.size() && grid[last + 1] <= f.mc_xi_max + 1e-12) ++last;
    if (last >= 1) {
      const Space space_b = nmr_space(f.mc_dim);
      const State vac = basis_state(space_b, {0});
      for (std::size_t ri = 0; ri < f.ratios.size(); ++ri) {
        NoiseModel noise = config.noise;
        noise.beta = 1.0;
        noise.phi0 = kPi / 2.0;
        // r = D / (2 kappa beta) fixes D for the curve.
        noise.D = 2.0 * f.kappa_beta * f.ratios[ri];
        noise.n_traj = f.trajectories;
        noise.dt = f.dt;
        noise.master_seed = trajectory_seed(config.seed, 0xF1620000ULL + ri);
        const double tau = grid[last] / (2.0 * f.kappa_beta);
        const EnsembleStats stats =
            phase_noise_ensemble(noise, f.kappa_beta, space_b, vac, tau, static_cast<int>(last + 1));
        for (std::size_t k = 0; k <= last; ++k) mc[ri][k] = std::make_pair(stats.dx(k), stats.dx_stderr(k));
      }
    }
  }

  ResultTable csv;
  csv.columns = {"xi", "r", "dx_over_x0_analytic", "dx_over_x0_mc", "mc_stderr"};
  const json meta = output_metadata(config, "fig2");
  attach_metadata(csv, meta);
  for (std::size_t ri = 0; ri < f.ratios.size(); ++ri) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::vector<Cell> row = {grid[k], f.ratios[ri], table.dx[ri][k], std::monostate{}, std::monostate{}};
      if (mc[ri][k]) {
        row[3] = mc[ri][k]->first;
        row[4] = mc[ri][k]->second;
      }
      csv.add_row(std::move(row));
    }
  }

  json minima = json::array();
  for (const auto& m : table.minima) {
    minima.push_back({{"r", m.r}, {"interior", m.interior}, {"xi_star", m.xi_star}, {"dx_over_x0", m.value}});
  }
  // Across the interior minima: the location moves left and the value rises as r grows.
  std::vector<CurveMinimum> interior;
  for (const auto& m : table.minima) {
    if (m.interior) interior.push_back(m);
  }
  std::sort(interior.begin(), interior.end(), [](const auto& a, const auto& b) { return a.r < b.r; });
  bool loc_dec = true, val_inc = true;
  for (std::size_t i = 1; i < interior.size(); ++i) {
    loc_dec = loc_dec && interior[i].xi_star < interior[i - 1].xi_star;
    val_inc = val_inc && interior[i].value > interior[i - 1].value;
  }
  json side;
  side["meta"] = meta;
  side["minima"] = minima;
  side["xi_star_decreases_with_r"] = loc_dec;
  side["min_value_increases_with_r"] = val_inc;

  CommandResult result;
  const std::string csv_path = path_in(out, "fig2.csv");
  const std::string json_path = path_in(out, "fig2_minima.json");
  write_text_file(csv_path, csv.to_csv());
  write_json(json_path, side);
  result.files = {csv_path, json_path};
  result.report = side;
  return result;
}

// ---------------------------------------------------------------------------

namespace {

struct ModeObservables {
  Operator n, x, x2, p, p2;
};

ModeObservables mode_observables(const Space& space, const std::string& label) {
  const std::size_t pos = space.index_of(label);
  const auto l = ladder_ops(space[pos].dim, label);
  const Operator x = l.raise + l.lower;
  const Operator p = (l.raise - l.lower).scaled(Complex(0.0, 1.0));
  auto lift = [&](const Operator& op) {
    return Operator(space, embed_operator(op, label, space).matrix(), true);
  };
  return {lift(l.raise * l.lower), lift(x), lift(x * x), lift(p), lift(p * p)};
}

double variance_sd(const Operator& a, const Operator& a2, const State& s) {
  const double m = expectation(a, s).real();
  return std::sqrt(std::max(0.0, expectation(a2, s).real() - m * m));
}

}  // namespace

CommandResult cmd_evolve(const RunConfig& config, const OutputOptions& out) {
  require_scaled(config, "evolve");
  const DerivedCouplings c = couplings_of(config);
  const EvolveConfig& e = config.evolve;
  const int Na = config.spaces.N_a;
  const int Nb = config.spaces.N_b;
  const double kappa_p = e.parametric.kappa.value_or(c.kappa);

  bool coupled = false;
  for (const auto& m : e.models) coupled = coupled || m != "parametric";
  double t_max;
  if (e.t_max) {
    t_max = *e.t_max;
  } else if (coupled) {
    if (c.kappa == 0.0) throw Error(ErrorKind::Config, "evolve: kappa is zero, give evolve.t_max explicitly");
    t_max = kPi / (std::sqrt(2.0) * std::abs(c.kappa));
  } else {
    if (kappa_p * e.parametric.beta == 0.0) throw Error(ErrorKind::Config, "evolve: kappa*beta is zero, give evolve.t_max");
    t_max = 1.0 / (2.0 * std::abs(kappa_p * e.parametric.beta));
  }
  const auto times = uniform_grid(0.0, t_max, e.points);

  ResultTable csv;
  csv.columns = {"t", "model", "exp_nb", "exp_na", "dx_over_x0", "dp_over_p0", "qubit_ground_pop", "leakage"};
  const json meta = output_metadata(config, "evolve");
  attach_metadata(csv, meta);
  csv.metadata.emplace_back("t_max", format_double(t_max));

  json summary = json::object();
  for (const auto& model : e.models) {
    std::vector<State> states;
    std::optional<Space> space;
    std::optional<Operator> na;
    std::optional<Operator> qpop;
    if (model == "full-rwa") {
      space = full_space(Na, Nb);
      states = evolve_on_grid(build_rwa(c, *space), basis_state(*space, {e.initial_q, e.initial_n_a, e.initial_n_b}), times);
      qpop = embed_operator(projector(0, kQubit), kQubit, *space);
    } else if (model == "pdc") {
      space = stlr_nmr_space(Na, Nb);
      states = evolve_on_grid(build_effective(c, *space, HamiltonianKind::PDC),
                              basis_state(*space, {e.initial_n_a, e.initial_n_b}), times);
    } else {
      space = nmr_space(e.parametric.N_b);
      states = evolve_on_grid(build_parametric(kappa_p, e.parametric.beta, e.parametric.phi, *space),
                              basis_state(*space, {e.initial_n_b}), times);
    }
    if (space->has(kStlr)) na = mode_observables(*space, kStlr).n;
    const ModeObservables b = mode_observables(*space, kNmr);
    double max_leak = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const State& s = states[k];
      const double leak = max_leakage(s.amplitudes(), *space);
      max_leak = std::max(max_leak, leak);
      csv.add_row({times[k], model, expectation(b.n, s).real(),
                   na ? Cell(expectation(*na, s).real()) : Cell(std::monostate{}), variance_sd(b.x, b.x2, s),
                   variance_sd(b.p, b.p2, s), qpop ? Cell(expectation(*qpop, s).real()) : Cell(std::monostate{}),
                   leak});
    }
    summary[model] = {{"max_leakage", max_leak}, {"dim", space->dim()}};
  }

  const RegimeReport regimes = validate_regimes(c, std::nullopt, config.regime_threshold);

  CommandResult result;
  const std::string path = path_in(out, "timeseries.csv");
  write_text_file(path, csv.to_csv());
  result.files.push_back(path);
  result.report = {{"meta", meta}, {"t_max", t_max}, {"models", summary}, {"regimes", regime_to_json(regimes)}};
  result.exit_code = out.strict && !regimes.pass() ? 2 : 0;
  return result;
}

// ---------------------------------------------------------------------------

std::vector<std::string> sweep_quantities() {
  const json j = couplings_to_json(DerivedCouplings{}, true);
  std::vector<std::string> names;
  for (const auto& [key, value] : j.items()) names.push_back(key);
  return names;
}

namespace {

double* device_field(DeviceParams& p, const std::string& name) {
  static const std::map<std::string, double DeviceParams::*> plain = {
      {"EJ_over_h", &DeviceParams::EJ_over_h},           {"n_g", &DeviceParams::n_g},
      {"Cg_over_CSigma", &DeviceParams::Cg_over_CSigma}, {"V0", &DeviceParams::V0},
      {"B", &DeviceParams::B},                           {"W", &DeviceParams::W},
      {"omega_a_over_2pi", &DeviceParams::omega_a_over_2pi}, {"omega_b_over_2pi", &DeviceParams::omega_b_over_2pi},
      {"beta", &DeviceParams::beta},                     {"phi", &DeviceParams::phi}};
  if (auto it = plain.find(name); it != plain.end()) return &(p.*(it->second));
  auto optional_field = [&](std::optional<double>& f) -> double* {
    if (!f) throw Error(ErrorKind::Config, "sweep: device field '" + name + "' is not set in this config");
    return &*f;
  };
  if (name == "Omega_over_2pi") return optional_field(p.Omega_over_2pi);
  if (name == "Ec_over_h") return optional_field(p.Ec_over_h);
  if (name == "x0") return optional_field(p.x0);
  if (name == "M") return optional_field(p.M);
  if (name == "m") throw Error(ErrorKind::Config, "sweep: 'm' is an integer flux index and cannot be swept");
  throw Error(ErrorKind::Config, "sweep: unknown device field '" + name + "'");
}

}  // namespace

CommandResult cmd_sweep(const RunConfig& config, const SweepOptions& sweep, const OutputOptions& out) {
  if (config.units != Units::Physical) throw Error(ErrorKind::Config, "sweep targets device fields and needs units: physical");
  if (sweep.steps < 2) throw Error(ErrorKind::Config, "sweep: --steps must be at least 2");
  if (!std::isfinite(sweep.from) || !std::isfinite(sweep.to)) throw Error(ErrorKind::Config, "sweep: bounds must be finite");
  if (sweep.emit.empty()) throw Error(ErrorKind::Config, "sweep: --emit needs at least one quantity");
  const auto known = sweep_quantities();
  for (const auto& q : sweep.emit) {
    if (std::find(known.begin(), known.end(), q) == known.end()) {
      throw Error(ErrorKind::Config, "sweep: unknown quantity '" + q + "'");
    }
  }
  DeviceParams base = *config.device;
  device_field(base, sweep.param);  // validates the name
  double product = 0.0;
  if (sweep.compensate) {
    if (*sweep.compensate == sweep.param) throw Error(ErrorKind::Config, "sweep: cannot compensate a field with itself");
    product = *device_field(base, sweep.param) * *device_field(base, *sweep.compensate);
  }

  ResultTable csv;
  csv.columns.push_back(sweep.param);
  for (const auto& q : sweep.emit) csv.columns.push_back(q);
  const json meta = output_metadata(config, "sweep");
  attach_metadata(csv, meta);

  DeriveOptions opts;
  opts.allow_degenerate = config.allow_degenerate_mixing;
  std::vector<double> skipped;
  const int n = sweep.steps - 1;
  for (int i = 0; i <= n; ++i) {
    // Symmetric interpolation keeps midpoints such as n_g = 1/2 exact.
    const double v = (sweep.from * (n - i) + sweep.to * i) / n;
    DeviceParams p = base;
    *device_field(p, sweep.param) = v;
    if (sweep.compensate) *device_field(p, *sweep.compensate) = product / v;
    DerivedCouplings c;
    try {
      c = derive_couplings(p, opts);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::DegenerateMixingAngle) {
        skipped.push_back(v);
        continue;
      }
      throw Error(ErrorKind::Config, "sweep: " + sweep.param + " = " + format_double(v) + ": " + err.what());
    }
    const json j = couplings_to_json(c, true);
    std::vector<Cell> row = {v};
    for (const auto& q : sweep.emit) row.push_back(j.at(q).get<double>());
    csv.add_row(std::move(row));
  }
  if (!skipped.empty()) {
    std::string s;
    for (double v : skipped) s += (s.empty() ? "" : " ") + format_double(v);
    csv.metadata.emplace_back("skipped_degenerate", s);
  }

  CommandResult result;
  const std::string path = path_in(out, "sweep.csv");
  write_text_file(path, csv.to_csv());
  result.files.push_back(path);
  result.report = {{"meta", meta}, {"rows", csv.rows.size()}, {"skipped", skipped}};
  return result;
}

}  // namespace nmrsq
