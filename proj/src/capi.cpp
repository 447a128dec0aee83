#include "nmrsq/nmrsq.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "nmrsq/commands.hpp"
#include "nmrsq/config.hpp"
#include "nmrsq/error.hpp"
#include "nmrsq/hamiltonian.hpp"
#include "nmrsq/squeezing.hpp"

struct nmrsq_config {
  nmrsq::RunConfig config;
  std::string digest;
  std::string units;

  void refresh() {
    digest = config.digest();
    units = std::string(nmrsq::to_string(config.units));
  }
};

struct nmrsq_result {
  nmrsq::CommandResult result;
  std::string report;
};

namespace {

thread_local std::string last_error;

nmrsq_status status_of(nmrsq::ErrorKind kind) {
  using nmrsq::ErrorKind;
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::DegenerateMixingAngle:
    case ErrorKind::UnknownSlot:
      return NMRSQ_ERR_CONFIG;
    case ErrorKind::Io:
      return NMRSQ_ERR_IO;
    default:
      return NMRSQ_ERR_NUMERICAL;
  }
}

template <class F>
nmrsq_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return NMRSQ_OK;
  } catch (const nmrsq::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return NMRSQ_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return NMRSQ_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return NMRSQ_ERR_INTERNAL;
  }
}

nmrsq_status invalid(const char* what) {
  last_error = what;
  return NMRSQ_ERR_INVALID_ARGUMENT;
}

nmrsq_status make_config(nmrsq::RunConfig cfg, nmrsq_config** out) {
  auto* handle = new nmrsq_config{std::move(cfg), {}, {}};
  handle->refresh();
  *out = handle;
  return NMRSQ_OK;
}

nmrsq_status finish(nmrsq::CommandResult r, nmrsq_result** out) {
  auto* handle = new nmrsq_result{std::move(r), {}};
  handle->report = handle->result.report.dump();
  *out = handle;
  return NMRSQ_OK;
}

nmrsq::OutputOptions output_options(const char* out_dir, int strict) {
  nmrsq::OutputOptions o;
  if (out_dir && *out_dir) o.out_dir = out_dir;
  o.strict = strict != 0;
  return o;
}

}  // namespace

extern "C" {

const char* nmrsq_version(void) { return NMRSQ_VERSION_STRING; }

const char* nmrsq_last_error(void) { return last_error.c_str(); }

int nmrsq_exit_code(nmrsq_status status) {
  switch (status) {
    case NMRSQ_OK:
      return 0;
    case NMRSQ_ERR_CONFIG:
    case NMRSQ_ERR_IO:
    case NMRSQ_ERR_INVALID_ARGUMENT:
      return 1;
    default:
      return 2;
  }
}

nmrsq_status nmrsq_config_load(const char* path, nmrsq_config** out) {
  if (!path || !out) return invalid("nmrsq_config_load: null argument");
  *out = nullptr;
  return guarded([&] { make_config(nmrsq::load_config(path), out); });
}

nmrsq_status nmrsq_config_parse(const char* json_text, nmrsq_config** out) {
  if (!json_text || !out) return invalid("nmrsq_config_parse: null argument");
  *out = nullptr;
  return guarded([&] { make_config(nmrsq::parse_config_text(json_text), out); });
}

nmrsq_status nmrsq_config_default(const char* units, nmrsq_config** out) {
  if (!units || !out) return invalid("nmrsq_config_default: null argument");
  *out = nullptr;
  const std::string u = units;
  if (u != "physical" && u != "scaled") return invalid("units must be \"physical\" or \"scaled\"");
  return guarded([&] {
    make_config(nmrsq::default_config(u == "physical" ? nmrsq::Units::Physical : nmrsq::Units::Scaled), out);
  });
}

void nmrsq_config_free(nmrsq_config* config) { delete config; }

nmrsq_status nmrsq_config_set(nmrsq_config* config, const char* path, const char* json_value) {
  if (!config || !path || !json_value) return invalid("nmrsq_config_set: null argument");
  return guarded([&] {
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(json_value);
    } catch (const nlohmann::json::parse_error&) {
      throw nmrsq::Error(nmrsq::ErrorKind::Config, std::string("value for '") + path + "' is not valid JSON");
    }
    nlohmann::json doc = config->config.source;
    nlohmann::json* node = &doc;
    std::string p = path;
    std::size_t start = 0;
    while (true) {
      const std::size_t dot = p.find('.', start);
      const std::string key = p.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (key.empty()) throw nmrsq::Error(nmrsq::ErrorKind::Config, "empty component in path '" + p + "'");
      if (node->is_null()) *node = nlohmann::json::object();
      if (!node->is_object()) throw nmrsq::Error(nmrsq::ErrorKind::Config, "'" + p + "' does not name an object field");
      node = &(*node)[key];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    *node = value;
    // The seed is controlled separately (nmrsq_config_set_seed) unless this call targets it.
    const std::uint64_t seed = config->config.seed;
    config->config = nmrsq::parse_config(doc);
    if (p != "seed") {
      config->config.seed = seed;
      config->config.noise.master_seed = seed;
    }
    config->refresh();
  });
}

nmrsq_status nmrsq_config_set_seed(nmrsq_config* config, uint64_t seed) {
  if (!config) return invalid("nmrsq_config_set_seed: null config");
  config->config.seed = seed;
  config->config.noise.master_seed = seed;
  return NMRSQ_OK;
}

nmrsq_status nmrsq_config_digest(const nmrsq_config* config, const char** out) {
  if (!config || !out) return invalid("nmrsq_config_digest: null argument");
  *out = config->digest.c_str();
  return NMRSQ_OK;
}

nmrsq_status nmrsq_config_units(const nmrsq_config* config, const char** out) {
  if (!config || !out) return invalid("nmrsq_config_units: null argument");
  *out = config->units.c_str();
  return NMRSQ_OK;
}

nmrsq_status nmrsq_config_couplings(const nmrsq_config* config, nmrsq_couplings* out) {
  if (!config || !out) return invalid("nmrsq_config_couplings: null argument");
  return guarded([&] {
    const nmrsq::DerivedCouplings c = nmrsq::couplings_of(config->config);
    *out = nmrsq_couplings{c.omega_a, c.omega_b, c.lambda_a, c.lambda_b, c.theta, c.sin_theta, c.cos_theta, c.Omega,
                           c.g_a,     c.g_b,     c.Delta_a,  c.Delta_b,  c.delta, c.kappa,     c.x0,        c.p0};
  });
}

nmrsq_status nmrsq_predicted_dx(double xi, double r, double* out) {
  if (!out) return invalid("nmrsq_predicted_dx: null output");
  if (!(r >= 0.0)) return invalid("r must be >= 0");
  *out = nmrsq::noisy_dx(xi, r);
  return NMRSQ_OK;
}

nmrsq_status nmrsq_curve_minimum(double r, double xi_max, int points, double* xi_star, double* value, int* interior) {
  if (!xi_star || !value || !interior) return invalid("nmrsq_curve_minimum: null output");
  if (!(xi_max > 0.0) || points < 2) return invalid("need xi_max > 0 and points >= 2");
  return guarded([&] {
    const auto t = nmrsq::fig2_table({r}, nmrsq::uniform_grid(0.0, xi_max, points));
    *xi_star = t.minima[0].xi_star;
    *value = t.minima[0].value;
    *interior = t.minima[0].interior ? 1 : 0;
  });
}

nmrsq_status nmrsq_squeezed_vacuum_variances(double xi, int dim, double* dx_over_x0, double* dp_over_p0) {
  if (!dx_over_x0 || !dp_over_p0) return invalid("nmrsq_squeezed_vacuum_variances: null output");
  if (dim < 2) return invalid("dim must be at least 2");
  return guarded([&] {
    const nmrsq::Space space = nmrsq::nmr_space(dim);
    const nmrsq::Operator S = nmrsq::squeeze_operator({xi}, space);
    const nmrsq::State vac = nmrsq::basis_state(space, {0});
    const auto v = nmrsq::quadrature_variances(nmrsq::State::normalized(space, S.apply(vac.amplitudes())));
    *dx_over_x0 = v.dx;
    *dp_over_p0 = v.dp;
  });
}

nmrsq_status nmrsq_run_params(const nmrsq_config* config, const char* out_dir, int strict, nmrsq_result** out) {
  if (!config || !out) return invalid("nmrsq_run_params: null argument");
  *out = nullptr;
  return guarded([&] { finish(nmrsq::cmd_params(config->config, output_options(out_dir, strict)), out); });
}

nmrsq_status nmrsq_run_verify(const nmrsq_config* config, const char* suite, const char* out_dir,
                              const char* overlay_or_null, nmrsq_result** out) {
  if (!config || !suite || !out) return invalid("nmrsq_run_verify: null argument");
  *out = nullptr;
  return guarded([&] {
    std::optional<std::string> overlay;
    if (overlay_or_null) overlay = overlay_or_null;
    finish(nmrsq::cmd_verify(config->config, suite, output_options(out_dir, 0), overlay), out);
  });
}

nmrsq_status nmrsq_run_fig2(const nmrsq_config* config, const char* out_dir, nmrsq_result** out) {
  if (!config || !out) return invalid("nmrsq_run_fig2: null argument");
  *out = nullptr;
  return guarded([&] { finish(nmrsq::cmd_fig2(config->config, output_options(out_dir, 0)), out); });
}

nmrsq_status nmrsq_run_evolve(const nmrsq_config* config, const char* out_dir, int strict, nmrsq_result** out) {
  if (!config || !out) return invalid("nmrsq_run_evolve: null argument");
  *out = nullptr;
  return guarded([&] { finish(nmrsq::cmd_evolve(config->config, output_options(out_dir, strict)), out); });
}

nmrsq_status nmrsq_run_sweep(const nmrsq_config* config, const nmrsq_sweep_spec* spec, const char* out_dir,
                             nmrsq_result** out) {
  if (!config || !spec || !spec->param || !out) return invalid("nmrsq_run_sweep: null argument");
  if (spec->n_emit > 0 && !spec->emit) return invalid("nmrsq_run_sweep: emit is null but n_emit > 0");
  *out = nullptr;
  return guarded([&] {
    nmrsq::SweepOptions s;
    s.param = spec->param;
    s.from = spec->from;
    s.to = spec->to;
    s.steps = spec->steps;
    if (spec->emit && spec->n_emit > 0) {
      s.emit.clear();
      for (size_t i = 0; i < spec->n_emit; ++i) {
        if (!spec->emit[i]) throw nmrsq::Error(nmrsq::ErrorKind::Config, "null emit entry");
        s.emit.emplace_back(spec->emit[i]);
      }
    }
    if (spec->compensate) s.compensate = spec->compensate;
    finish(nmrsq::cmd_sweep(config->config, s, output_options(out_dir, 0)), out);
  });
}

int nmrsq_result_exit_code(const nmrsq_result* result) { return result ? result->result.exit_code : 2; }

const char* nmrsq_result_report(const nmrsq_result* result) { return result ? result->report.c_str() : ""; }

size_t nmrsq_result_file_count(const nmrsq_result* result) { return result ? result->result.files.size() : 0; }

const char* nmrsq_result_file(const nmrsq_result* result, size_t index) {
  if (!result || index >= result->result.files.size()) return nullptr;
  return result->result.files[index].c_str();
}

void nmrsq_result_free(nmrsq_result* result) { delete result; }

}  // extern "C"
