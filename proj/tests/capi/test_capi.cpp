// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "nmrsq/nmrsq.h"

namespace fs = std::filesystem;

namespace {

struct Dir {
  fs::path path;
  Dir() {
    path = fs::temp_directory_path() / ("nmrsq-capi-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~Dir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("version and status mapping") {
  CHECK(std::strlen(nmrsq_version()) > 0);
  CHECK(nmrsq_exit_code(NMRSQ_OK) == 0);
  CHECK(nmrsq_exit_code(NMRSQ_ERR_CONFIG) == 1);
  CHECK(nmrsq_exit_code(NMRSQ_ERR_IO) == 1);
  CHECK(nmrsq_exit_code(NMRSQ_ERR_INVALID_ARGUMENT) == 1);
  CHECK(nmrsq_exit_code(NMRSQ_ERR_NUMERICAL) == 2);
  CHECK(nmrsq_exit_code(NMRSQ_ERR_INTERNAL) == 2);
}

TEST_CASE("null arguments are rejected, not dereferenced") {
  nmrsq_config* c = nullptr;
  CHECK(nmrsq_config_load(nullptr, &c) == NMRSQ_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(nmrsq_last_error()) > 0);
  CHECK(nmrsq_config_default("imperial", &c) == NMRSQ_ERR_INVALID_ARGUMENT);
  CHECK(nmrsq_run_params(nullptr, ".", 0, nullptr) == NMRSQ_ERR_INVALID_ARGUMENT);
  nmrsq_config_free(nullptr);
  nmrsq_result_free(nullptr);
  CHECK(nmrsq_result_file(nullptr, 0) == nullptr);
  CHECK(nmrsq_result_exit_code(nullptr) == 2);
}

TEST_CASE("config handles") {
  nmrsq_config* c = nullptr;
  REQUIRE(nmrsq_config_default("physical", &c) == NMRSQ_OK);
  const char* units = nullptr;
  REQUIRE(nmrsq_config_units(c, &units) == NMRSQ_OK);
  CHECK(std::string(units) == "physical");

  nmrsq_couplings k{};
  REQUIRE(nmrsq_config_couplings(c, &k) == NMRSQ_OK);
  CHECK(k.kappa / (2.0 * M_PI) == doctest::Approx(-0.6123306669171228).epsilon(1e-12));

  const char* d = nullptr;
  nmrsq_config_digest(c, &d);
  const std::string before = d;
  REQUIRE(nmrsq_config_set(c, "device.n_g", "0.4") == NMRSQ_OK);
  nmrsq_config_digest(c, &d);
  CHECK(std::string(d) != before);
  nmrsq_config_couplings(c, &k);
  CHECK(k.kappa > 0.0);

  // Intermediate objects absent from the document are created.
  CHECK(nmrsq_config_set(c, "fig2.points", "11") == NMRSQ_OK);
  CHECK(nmrsq_config_set(c, "fig2.bogus", "1") == NMRSQ_ERR_CONFIG);
  CHECK(std::string(nmrsq_last_error()).find("bogus") != std::string::npos);
  CHECK(nmrsq_config_set(c, "device.n_g", "not json") == NMRSQ_ERR_CONFIG);
  CHECK(nmrsq_config_set(c, "device.n_g.x", "1") == NMRSQ_ERR_CONFIG);
  // The degenerate point is a valid document; deriving couplings from it fails.
  REQUIRE(nmrsq_config_set(c, "device.n_g", "0.5") == NMRSQ_OK);
  CHECK(nmrsq_config_couplings(c, &k) != NMRSQ_OK);
  nmrsq_config_free(c);

  CHECK(nmrsq_config_parse("{\"units\": \"scaled\"}", &c) == NMRSQ_ERR_CONFIG);
  CHECK(c == nullptr);
  CHECK(nmrsq_config_load("/no/such/file.json", &c) != NMRSQ_OK);
}

TEST_CASE("squeezing laws") {
  double v = 0.0;
  REQUIRE(nmrsq_predicted_dx(1.0, 0.01, &v) == NMRSQ_OK);
  CHECK(v == doctest::Approx(0.4150669388559705).epsilon(1e-14));
  CHECK(nmrsq_predicted_dx(1.0, -1.0, &v) == NMRSQ_ERR_INVALID_ARGUMENT);

  double xi = 0.0, val = 0.0;
  int interior = -1;
  REQUIRE(nmrsq_curve_minimum(0.01, 3.0, 301, &xi, &val, &interior) == NMRSQ_OK);
  CHECK(interior == 1);
  CHECK(xi == doctest::Approx(1.192959758287372).epsilon(1e-12));

  double dx = 0.0, dp = 0.0;
  REQUIRE(nmrsq_squeezed_vacuum_variances(0.5, 80, &dx, &dp) == NMRSQ_OK);
  CHECK(dx == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(nmrsq_squeezed_vacuum_variances(3.0, 20, &dx, &dp) == NMRSQ_ERR_NUMERICAL);
}

TEST_CASE("commands through the C API") {
  Dir dir;
  const std::string out = dir.path.string();
  nmrsq_config* c = nullptr;
  REQUIRE(nmrsq_config_default("scaled", &c) == NMRSQ_OK);
  nmrsq_config_set_seed(c, 5);

  nmrsq_result* r = nullptr;
  REQUIRE(nmrsq_run_verify(c, "squeeze-law", out.c_str(), nullptr, &r) == NMRSQ_OK);
  CHECK(nmrsq_result_exit_code(r) == 0);
  REQUIRE(nmrsq_result_file_count(r) == 1);
  CHECK(fs::exists(nmrsq_result_file(r, 0)));
  CHECK(std::string(nmrsq_result_report(r)).find("\"pass\":true") != std::string::npos);
  nmrsq_result_free(r);

  REQUIRE(nmrsq_run_verify(c, "bogoliubov", out.c_str(), nullptr, &r) == NMRSQ_OK);
  CHECK(nmrsq_result_exit_code(r) == 2);
  nmrsq_result_free(r);

  CHECK(nmrsq_run_verify(c, "nothing", out.c_str(), nullptr, &r) == NMRSQ_ERR_CONFIG);
  CHECK(r == nullptr);
  CHECK(nmrsq_run_params(c, "/proc/forbidden/dir", 0, &r) == NMRSQ_ERR_IO);

  nmrsq_config_set(c, "fig2.points", "11");
  REQUIRE(nmrsq_run_fig2(c, out.c_str(), &r) == NMRSQ_OK);
  CHECK(nmrsq_result_file_count(r) == 2);
  nmrsq_result_free(r);
  nmrsq_config_free(c);

  REQUIRE(nmrsq_config_default("physical", &c) == NMRSQ_OK);
  const char* emit[] = {"kappa_over_2pi_hz", "Omega_over_2pi_hz"};
  nmrsq_sweep_spec spec{"B", 0.1, 0.3, 3, emit, 2, "W"};
  REQUIRE(nmrsq_run_sweep(c, &spec, out.c_str(), &r) == NMRSQ_OK);
  CHECK(nmrsq_result_exit_code(r) == 0);
  nmrsq_result_free(r);
  spec.n_emit = 1;
  spec.emit = nullptr;
  CHECK(nmrsq_run_sweep(c, &spec, out.c_str(), &r) == NMRSQ_ERR_INVALID_ARGUMENT);
  CHECK(nmrsq_run_evolve(c, out.c_str(), 0, &r) == NMRSQ_ERR_CONFIG);  // evolve needs scaled units
  nmrsq_config_free(c);
}
