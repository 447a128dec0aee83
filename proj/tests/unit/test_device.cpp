#include <doctest.h>

#include <cmath>

#include "nmrsq/device.hpp"
#include "nmrsq/error.hpp"

using namespace nmrsq;
using constants::kPi;

namespace {

double hz(double angular) { return angular / (2.0 * kPi); }

ErrorKind kind_of(const DeviceParams& p, DeriveOptions opts = {}) {
  try {
    derive_couplings(p, opts);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an nmrsq::Error");
  return ErrorKind::Validation;
}

}  // namespace

// Reference values computed with 30-digit arithmetic from the closed-form couplings.
TEST_CASE("reference device couplings") {
  const DerivedCouplings c = derive_couplings(reference_device());
  CHECK(c.theta == doctest::Approx(2.21429743558818100603).epsilon(1e-14));
  CHECK(hz(c.lambda_a) == doctest::Approx(48359784.8713293315).epsilon(1e-12));
  CHECK(hz(c.lambda_b) == doctest::Approx(184.653886480972694).epsilon(1e-12));
  CHECK(hz(c.g_a) == doctest::Approx(-38687827.8970634652).epsilon(1e-12));
  CHECK(hz(c.g_b) == doctest::Approx(-110.792331888583617).epsilon(1e-12));
  CHECK(hz(c.kappa) == doctest::Approx(-0.612330666917122771).epsilon(1e-12));
  CHECK(hz(c.Omega) == doctest::Approx(1e10).epsilon(1e-14));
  CHECK(hz(c.Delta_a) == doctest::Approx(7e9).epsilon(1e-14));
  CHECK(c.delta == 0.0);
  CHECK(c.p0 == doctest::Approx(constants::kHbar / 2e-12));
}

TEST_CASE("kappa changes sign across the charge degeneracy, not with the flux branch") {
  for (int m : {0, 1, 2}) {
    DeviceParams above = reference_device(0.6);
    DeviceParams below = reference_device(0.4);
    above.m = below.m = m;
    const double ka = derive_couplings(above).kappa;
    const double kb = derive_couplings(below).kappa;
    CHECK(ka < 0.0);
    CHECK(kb == doctest::Approx(-ka));
  }
}

TEST_CASE("E_c input and Omega input agree") {
  const DerivedCouplings from_omega = derive_couplings(reference_device(0.7));
  DeviceParams p = reference_device(0.7);
  p.Omega_over_2pi.reset();
  p.Ec_over_h = std::sqrt(1e20 - 64e18) / (1.0 - 2.0 * 0.7);
  p.Ec_over_h = std::abs(*p.Ec_over_h);
  const DerivedCouplings from_ec = derive_couplings(p);
  CHECK(from_ec.Omega == doctest::Approx(from_omega.Omega).epsilon(1e-13));
  CHECK(from_ec.kappa == doctest::Approx(from_omega.kappa).epsilon(1e-12));
}

TEST_CASE("mass input gives the zero-point length") {
  DeviceParams p = reference_device();
  p.x0.reset();
  p.M = 1e-17;
  const DerivedCouplings c = derive_couplings(p);
  CHECK(c.x0 == doctest::Approx(std::sqrt(constants::kHbar / (2.0 * 1e-17 * 2.0 * kPi * 1.5e9))));
  CHECK(c.x0 * c.p0 == doctest::Approx(constants::kHbar / 2.0));
}

TEST_CASE("degenerate mixing angle needs the override") {
  DeviceParams p = reference_device(0.5);
  CHECK(kind_of(p) == ErrorKind::DegenerateMixingAngle);
  DeriveOptions opts;
  opts.allow_degenerate = true;
  const DerivedCouplings c = derive_couplings(p, opts);
  CHECK(c.cos_theta == 0.0);
  CHECK(c.g_b == 0.0);
  CHECK(c.kappa == 0.0);
  CHECK(hz(c.Omega) == doctest::Approx(8e9));
}

TEST_CASE("invalid devices are configuration errors") {
  DeviceParams p = reference_device();
  p.Ec_over_h = 1e9;  // both Omega and E_c
  CHECK(kind_of(p) == ErrorKind::Config);
  p = reference_device();
  p.Omega_over_2pi = 7e9;  // below 2 E_J
  CHECK(kind_of(p) == ErrorKind::Config);
  p = reference_device();
  p.n_g = 1.5;
  CHECK(kind_of(p) == ErrorKind::Config);
  p = reference_device();
  p.omega_a_over_2pi = 1e10;
  CHECK(kind_of(p) == ErrorKind::ZeroDetuning);
}

TEST_CASE("Josephson expansion matches the closed form") {
  const DeviceParams p = reference_device();
  for (double bias : {0.0, 0.25, 1.0}) {
    const auto c = josephson_expansion(p, bias, 6);
    REQUIRE(c.size() == 7);
    // B W x / Phi_0 stays below 1e-2 flux quanta, where order 6 is far below the tolerance.
    for (double x : {1e-11, 5e-11, -2e-11}) {
      double series = 0.0;
      for (int n = 6; n >= 0; --n) series = series * x + c[n];
      const double exact = josephson_energy(p, bias, x);
      CHECK(std::abs(series - exact) <= 1e-12 * constants::kPlanck * p.EJ_over_h);
    }
  }
  const auto c0 = josephson_expansion(p, 0.0, 2);
  CHECK(c0[1] == 0.0);
  CHECK(c0[2] == doctest::Approx(1.22352960454338164e-7).epsilon(1e-12));
}

TEST_CASE("regime report") {
  const DerivedCouplings c = derive_couplings(reference_device());
  const RegimeReport r = validate_regimes(c);
  CHECK(r.pass());
  REQUIRE(r.find("large_detuning_a"));
  CHECK(r.find("large_detuning_a")->ratio == doctest::Approx(c.Delta_a / std::abs(c.g_a)));
  CHECK(r.find("nonexistent") == nullptr);

  DeviceParams near = reference_device();
  near.omega_a_over_2pi = 9.99e9;
  const RegimeReport bad = validate_regimes(derive_couplings(near));
  CHECK_FALSE(bad.pass());
  CHECK_FALSE(bad.find("large_detuning_a")->pass);

  RegimeNoise noise;
  noise.noise.D = 1.0;
  noise.tau = 0.1;
  const RegimeReport with_noise = validate_regimes(c, noise);
  CHECK(with_noise.entries.size() > r.entries.size());
}

TEST_CASE("device json round trip") {
  const DeviceParams p = reference_device(0.3);
  const DeviceParams q = device_from_json(device_to_json(p));
  CHECK(q.n_g == 0.3);
  CHECK(*q.Omega_over_2pi == *p.Omega_over_2pi);
  CHECK_THROWS_AS(device_from_json({{"EJ_over_h", 1.0}, {"bogus", 2.0}}), Error);
}
