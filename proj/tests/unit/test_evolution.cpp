#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>

#include "nmrsq/commands.hpp"
#include "nmrsq/config.hpp"
#include "nmrsq/error.hpp"
#include "nmrsq/evolution.hpp"
#include "nmrsq/hamiltonian.hpp"
#include "nmrsq/squeezing.hpp"

using namespace nmrsq;

namespace {

DerivedCouplings benchmark() { return couplings_of(default_config(Units::Scaled)); }

PropagateOptions with(Backend b) {
  PropagateOptions o;
  o.backend = b;
  return o;
}

}  // namespace

TEST_CASE("dense and Krylov backends agree") {
  const DerivedCouplings c = benchmark();
  const Space s = full_space(8, 12);
  const Operator H = build_rwa(c, s);
  const State psi0 = basis_state(s, {0, 1, 0});
  for (double t : {0.1, 2.0, 25.0}) {
    const State d = propagate(H, psi0, t, with(Backend::Dense));
    const State k = propagate(H, psi0, t, with(Backend::Krylov));
    CHECK((d.amplitudes() - k.amplitudes()).norm() < 1e-9);
  }
  Propagator p(H);
  CHECK(p.backend() == Backend::Dense);
}

TEST_CASE("norm, energy and excitation number are conserved") {
  const DerivedCouplings c = benchmark();
  const Space s = full_space(6, 10);
  const Operator H = build_rwa(c, s);
  const Operator N = excitation_operator(s);
  const State psi0 = basis_state(s, {0, 2, 1});
  const double e0 = expectation(H, psi0).real();
  const auto states = evolve_on_grid(H, psi0, uniform_grid(0.0, 30.0, 7), with(Backend::Krylov));
  for (const auto& st : states) {
    CHECK(st.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(expectation(H, st).real() == doctest::Approx(e0).epsilon(1e-10));
    CHECK(expectation(N, st).real() == doctest::Approx(5.0).epsilon(1e-10));
  }
}

TEST_CASE("propagation refuses to run into the truncation") {
  const Space b = nmr_space(10);
  const Operator H = build_parametric(1.0, 1.0, 0.0, b);
  try {
    propagate(H, basis_state(b, {0}), 2.0);
    FAIL("expected TruncationTooSmall");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TruncationTooSmall);
    CHECK(std::string(e.what()).find("t = ") != std::string::npos);
  }
}

TEST_CASE("scaled benchmark regression") {
  const DerivedCouplings c = benchmark();
  const RwaBenchmark b = run_rwa_benchmark(c, 10, 20, 0, 1, 0, 401);
  CHECK(b.pdc.max_naive[0] == doctest::Approx(0.021733558981809065).epsilon(1e-6));
  CHECK(b.ground.max_naive[0] == doctest::Approx(0.018121).epsilon(1e-3));
  CHECK(b.pdc.max_frame_corrected[0] == doctest::Approx(0.011933).epsilon(1e-3));
  CHECK(b.min_ground_population == doctest::Approx(0.992754).epsilon(1e-5));
  CHECK(b.min_ground_population >= b.population_bound);
  // The PDC model alone converts the photon into a phonon pair.
  CHECK(b.max_nb == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("trajectory seeds are distinct and reproducible") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(trajectory_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(trajectory_seed(42, 7) == trajectory_seed(42, 7));
  CHECK(trajectory_seed(42, 7) != trajectory_seed(43, 7));
}

TEST_CASE("NMR_SQUEEZE_THREADS caps the worker count") {
  ::setenv("NMR_SQUEEZE_THREADS", "2", 1);
  CHECK(worker_threads(8) == 2);
  CHECK(worker_threads(1) == 1);
  ::setenv("NMR_SQUEEZE_THREADS", "junk", 1);
  CHECK(worker_threads(3) == 3);
  ::unsetenv("NMR_SQUEEZE_THREADS");
  CHECK(worker_threads(3) == 3);
}

TEST_CASE("phase-noise ensemble") {
  const Space b = nmr_space(40);
  const State vac = basis_state(b, {0});
  NoiseModel noise;
  noise.D = 0.02;
  noise.n_traj = 64;
  noise.dt = 1e-3;
  noise.master_seed = 9;

  SUBCASE("independent of the thread count") {
    EnsembleOptions one, three;
    one.threads = 1;
    three.threads = 3;
    const EnsembleStats a = phase_noise_ensemble(noise, 1.0, b, vac, 0.4, 5, one);
    const EnsembleStats c = phase_noise_ensemble(noise, 1.0, b, vac, 0.4, 5, three);
    CHECK(a.mean_x2 == c.mean_x2);
    CHECK(a.mean_p2 == c.mean_p2);
  }
  SUBCASE("zero linewidth is the ideal squeezed vacuum") {
    NoiseModel quiet = noise;
    quiet.D = 0.0;
    const Space big = nmr_space(80);  // 40 levels already cost 4e-6 at xi = 0.8
    const EnsembleStats s = phase_noise_ensemble(quiet, 1.0, big, basis_state(big, {0}), 0.4, 5);
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      const double xi = 2.0 * s.times[k];
      CHECK(s.dx(k) == doctest::Approx(std::exp(-xi)).epsilon(1e-9));
      CHECK(s.dp(k) == doctest::Approx(std::exp(xi)).epsilon(1e-9));
      CHECK(s.dx_stderr(k) < 1e-12);
    }
  }
  SUBCASE("quadrature means stay at zero within the error bars") {
    const EnsembleStats s = phase_noise_ensemble(noise, 1.0, b, vac, 0.4, 5);
    for (std::size_t k = 1; k < s.times.size(); ++k) {
      CHECK(std::abs(s.mean_x[k]) <= 3.0 * s.se_x[k] + 1e-12);
      CHECK(std::abs(s.mean_p[k]) <= 3.0 * s.se_p[k] + 1e-12);
    }
  }
  SUBCASE("noise degrades the squeezing") {
    const EnsembleStats s = phase_noise_ensemble(noise, 1.0, b, vac, 0.4, 5);
    CHECK(s.dx(4) > std::exp(-0.8));
  }
  SUBCASE("step guard") {
    NoiseModel coarse = noise;
    coarse.dt = 0.05;
    CHECK_THROWS_AS(phase_noise_ensemble(coarse, 1.0, b, vac, 0.4, 5), Error);
  }
}

TEST_CASE("parametric approximation holds for a strong coherent pump") {
  PropagateOptions opts;
  opts.leakage_limit = 1e-4;
  const ParametricComparison p = compare_parametric_approximation(1.0, 3.0, 1.5707963267948966, 28, 24, {0.1, 0.3}, opts);
  CHECK(p.max_rel_error < 1e-3);
  CHECK(p.rel_error[0] < p.rel_error[1]);
  CHECK(p.pump_depletion[1] > 0.0);
  CHECK(p.dx_classical[1] == doctest::Approx(std::exp(-0.3)).epsilon(1e-9));
}
