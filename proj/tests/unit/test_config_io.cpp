#include <doctest.h>

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nmrsq/commands.hpp"
#include "nmrsq/config.hpp"
#include "nmrsq/error.hpp"
#include "nmrsq/result_table.hpp"

using namespace nmrsq;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  FAIL("config was accepted: " << j.dump());
  return {};
}

json scaled_doc() {
  return json{{"units", "scaled"},
              {"scaled",
               {{"Omega_over_2pi", 10.0},
                {"omega_a_over_2pi", 3.0},
                {"omega_b_over_2pi", 1.5},
                {"g_a_over_2pi", 0.3},
                {"g_b_over_2pi", 0.2}}}};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nmrsq-unit-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string header_of(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '#') return line;
  }
  return {};
}

}  // namespace

TEST_CASE("strict config parsing") {
  CHECK(parse_config(scaled_doc()).units == Units::Scaled);

  CHECK(config_error({{"scaled", scaled_doc()["scaled"]}}).find("units") != std::string::npos);
  CHECK(config_error({{"units", "metric"}}).find("units") != std::string::npos);

  json j = scaled_doc();
  j["fig2"] = {{"ratioz", json::array()}};
  CHECK(config_error(j).find("ratioz") != std::string::npos);

  j = scaled_doc();
  j["scaled"]["g_c_over_2pi"] = 1.0;
  CHECK(config_error(j).find("g_c_over_2pi") != std::string::npos);

  j = scaled_doc();
  j["scaled"]["Omega_over_2pi"] = 1e10;  // physical magnitude in a scaled config
  config_error(j);

  j = scaled_doc();
  j["spaces"] = {{"N_a", 2.5}};
  config_error(j);

  json phys = {{"units", "physical"}, {"device", device_to_json(reference_device())}};
  CHECK(parse_config(phys).device.has_value());
  phys["device"]["omega_b_over_2pi"] = 1.5;  // scaled magnitude in a physical config
  config_error(phys);
  config_error({{"units", "physical"}, {"scaled", scaled_doc()["scaled"]}});
}

TEST_CASE("scaled frequencies are given over 2 pi") {
  const RunConfig c = parse_config(scaled_doc());
  const DerivedCouplings d = couplings_of(c);
  CHECK(d.Omega == doctest::Approx(2.0 * M_PI * 10.0));
  CHECK(d.g_b == doctest::Approx(2.0 * M_PI * 0.2));
  CHECK(d.Delta_b == doctest::Approx(2.0 * M_PI * 7.0));
}

TEST_CASE("config digest follows the document") {
  const RunConfig a = parse_config(scaled_doc());
  const RunConfig b = parse_config_text(scaled_doc().dump(4));
  CHECK(a.digest() == b.digest());
  CHECK(a.digest().size() == 64);
  json j = scaled_doc();
  j["fig2"] = {{"points", 11}};
  CHECK(parse_config(j).digest() != a.digest());
  CHECK_THROWS_AS(parse_config_text("{\"units\": "), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 2.5e-300, -0.6123306669171228, 1e22, 0.0}) {
    const std::string s = format_double(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("hashing and canonical json") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(canonical_json(json::parse(R"({"b": 1, "a": [2, 3]})")) == R"({"a":[2,3],"b":1})");
}

TEST_CASE("result table") {
  ResultTable t;
  t.columns = {"x", "label", "y"};
  t.metadata = {{"seed", "3"}};
  t.add_row({1.5, std::string("pdc"), std::monostate{}});
  CHECK_THROWS_AS(t.add_row({1.0}), Error);
  CHECK(t.to_csv() == "# seed: 3\nx,label,y\n1.5,pdc,\n");
}

TEST_CASE("command outputs keep their column contracts") {
  TempDir dir;
  OutputOptions out;
  out.out_dir = dir.path.string();

  SUBCASE("params") {
    const CommandResult r = cmd_params(default_config(Units::Physical), out);
    CHECK(r.exit_code == 0);
    const json p = json::parse(slurp(dir.path / "params.json"));
    CHECK(p["kappa_over_2pi_hz"].get<double>() == doctest::Approx(-0.6123306669171228).epsilon(1e-12));
    CHECK(p["meta"]["config_digest"] == default_config(Units::Physical).digest());
  }
  SUBCASE("fig2") {
    RunConfig c = default_config(Units::Scaled);
    c.fig2.points = 31;
    const CommandResult r = cmd_fig2(c, out);
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(dir.path / "fig2.csv");
    CHECK(header_of(csv) == "xi,r,dx_over_x0_analytic,dx_over_x0_mc,mc_stderr");
    const json m = json::parse(slurp(dir.path / "fig2_minima.json"));
    CHECK(m["minima"].size() == 4);
    CHECK(m["xi_star_decreases_with_r"] == true);
  }
  SUBCASE("evolve") {
    RunConfig c = default_config(Units::Scaled);
    c.evolve.points = 5;
    c.evolve.models = {"full-rwa", "pdc", "parametric"};
    c.evolve.parametric.N_b = 40;
    c.evolve.t_max = 1.0;
    c.evolve.parametric.kappa = 0.2;
    cmd_evolve(c, out);
    const std::string csv = slurp(dir.path / "timeseries.csv");
    CHECK(header_of(csv) == "t,model,exp_nb,exp_na,dx_over_x0,dp_over_p0,qubit_ground_pop,leakage");
    CHECK(csv.find("1,parametric,") != std::string::npos);
    CHECK_THROWS_AS(cmd_evolve(default_config(Units::Physical), out), Error);
  }
  SUBCASE("sweep") {
    SweepOptions s;
    s.param = "n_g";
    s.from = 0.4;
    s.to = 0.6;
    s.steps = 3;
    s.emit = {"kappa_over_2pi_hz", "g_b_over_2pi_hz"};
    const CommandResult r = cmd_sweep(default_config(Units::Physical), s, out);
    const std::string csv = slurp(dir.path / "sweep.csv");
    CHECK(header_of(csv) == "n_g,kappa_over_2pi_hz,g_b_over_2pi_hz");
    CHECK(csv.find("# skipped_degenerate: 0.5") != std::string::npos);
    CHECK(r.exit_code == 0);

    s.emit = {"nonsense"};
    CHECK_THROWS_AS(cmd_sweep(default_config(Units::Physical), s, out), Error);
    s.emit = {"kappa_over_2pi_hz"};
    s.param = "EJ_over_h";
    s.from = 3e9;
    s.to = 4e9;
    CHECK_NOTHROW(cmd_sweep(default_config(Units::Physical), s, out));
  }
  SUBCASE("verify") {
    const CommandResult r = cmd_verify(default_config(Units::Scaled), "squeeze-law", out);
    CHECK(r.exit_code == 0);
    const json rep = json::parse(slurp(dir.path / "report.json"));
    CHECK(rep["pass"] == true);
    CHECK_THROWS_AS(cmd_verify(default_config(Units::Scaled), "nope", out), Error);
    CHECK_THROWS_AS(cmd_verify(default_config(Units::Physical), "rwa", out), Error);

    // An overlay from another config fails the digest check.
    const std::string other = (dir.path / "other.json").string();
    cmd_params(default_config(Units::Physical), out);
    const CommandResult mismatch =
        cmd_verify(default_config(Units::Scaled), "squeeze-law", out, (dir.path / "params.json").string());
    CHECK(mismatch.exit_code == 2);
  }
}
