#include <doctest.h>

#include <cmath>

#include "nmrsq/config.hpp"
#include "nmrsq/error.hpp"
#include "nmrsq/hamiltonian.hpp"

using namespace nmrsq;

namespace {

DerivedCouplings benchmark() { return couplings_of(default_config(Units::Scaled)); }

int index(int Na, int Nb, int q, int a, int b) { return q * Na * Nb + a * Nb + b; }

}  // namespace

TEST_CASE("total and RWA Hamiltonians are Hermitian; RWA conserves excitations") {
  const DerivedCouplings c = benchmark();
  const Space s = full_space(5, 6);
  const Operator Ht = build_total(c, s);
  const Operator Hr = build_rwa(c, s);
  CHECK(is_hermitian(Ht));
  CHECK(is_hermitian(Hr));
  const Operator N = excitation_operator(s);
  CHECK(commutator(Hr, N).max_abs() < 1e-12);
  CHECK(commutator(Ht, N).max_abs() > 1e-3);  // counter-rotating terms break it
}

TEST_CASE("RWA matrix elements") {
  const DerivedCouplings c = benchmark();
  const int Na = 4, Nb = 5;
  const Operator H = build_rwa(c, full_space(Na, Nb));
  // Qubit excitation swapped for one STLR photon.
  CHECK(std::abs(H.element(index(Na, Nb, 1, 0, 0), index(Na, Nb, 0, 1, 0)) - c.g_a) < 1e-12);
  // ... and for two NMR phonons.
  CHECK(std::abs(H.element(index(Na, Nb, 1, 0, 0), index(Na, Nb, 0, 0, 2)) - c.g_b * std::sqrt(2.0)) < 1e-12);
  CHECK(H.element(index(Na, Nb, 1, 0, 0), index(Na, Nb, 1, 0, 0)).real() ==
        doctest::Approx(0.5 * c.Omega));
}

TEST_CASE("Frohlich generator is anti-Hermitian with the expected elements") {
  const DerivedCouplings c = benchmark();
  const int Na = 4, Nb = 5;
  const Operator S = frohlich_generator(c, full_space(Na, Nb));
  CHECK(is_anti_hermitian(S));
  const double ea = c.g_a / c.Delta_a;
  CHECK(std::abs(S.element(index(Na, Nb, 0, 1, 0), index(Na, Nb, 1, 0, 0)) - ea) < 1e-15);
  CHECK(std::abs(S.element(index(Na, Nb, 1, 0, 0), index(Na, Nb, 0, 1, 0)) + ea) < 1e-15);
  // It removes the first-order coupling: [H0, S] = -H_I.
  DerivedCouplings free = c;
  free.g_a = free.g_b = 0.0;
  const Operator H0 = build_rwa(free, full_space(Na, Nb));
  const Operator HI = build_rwa(c, full_space(Na, Nb)) - H0;
  CHECK((commutator(H0, S) + HI).max_abs() < 1e-12);
}

TEST_CASE("conjugation by a small generator: exact and bch2 differ at third order") {
  const DerivedCouplings c = benchmark();
  const ScalingResult s = frohlich_scaling(c, 5, 5);
  CHECK(s.residual_half < s.residual_full);
  CHECK(s.ratio == doctest::Approx(8.0).epsilon(0.15));
  CHECK_THROWS_AS(conjugate_by_generator(build_rwa(c, full_space(3, 3)), build_rwa(c, full_space(3, 3)),
                                         ConjugationMode::Bch2),
                  Error);
}

TEST_CASE("Frohlich report reproduces the effective couplings") {
  const DerivedCouplings c = benchmark();
  const FrohlichReport r = frohlich_report(c, 8, 8);
  CHECK(r.conversion_coefficient == doctest::Approx(-0.5 * c.g_a * c.g_b * (1.0 / c.Delta_a + 1.0 / c.Delta_b)));
  CHECK(r.conversion_coefficient == doctest::Approx(c.kappa));
  CHECK(r.max_conversion_rel_error <= 1e-10);
  CHECK(r.ground_fit_residual <= 1e-10);
  CHECK(r.pdc_residual <= 1e-10);
  for (const auto& t : r.ground_terms) {
    INFO(t.name);
    if (t.expected != 0.0) CHECK(t.rel_error <= 1e-10);
  }
  // Regression values for what lies beyond the closed form.
  CHECK(r.offdiagonal_norm == doctest::Approx(0.003943).epsilon(1e-3));
  CHECK(r.truncation_artifact_norm == doctest::Approx(0.007517).epsilon(1e-3));
}

TEST_CASE("effective Hamiltonians") {
  const DerivedCouplings c = benchmark();
  const int Na = 4, Nb = 6;
  const Space ab = stlr_nmr_space(Na, Nb);
  const Operator pdc = build_effective(c, ab, HamiltonianKind::PDC);
  CHECK(is_hermitian(pdc));
  CHECK(std::abs(pdc.element(0 * Nb + 2, 1 * Nb + 0) - c.kappa * std::sqrt(2.0)) < 1e-14);
  CHECK(pdc.element(1 * Nb + 3, 1 * Nb + 3).real() == doctest::Approx(c.omega_a + 3.0 * c.omega_b));

  const Operator ground = build_effective(c, ab, HamiltonianKind::EffectiveGround);
  const double sa = c.g_a * c.g_a / c.Delta_a, sb = c.g_b * c.g_b / c.Delta_b;
  CHECK(ground.element(1 * Nb + 2, 1 * Nb + 2).real() ==
        doctest::Approx((c.omega_a - sa) + 2.0 * (c.omega_b + sb) - 4.0 * sb));

  const Operator full = build_effective(c, full_space(Na, Nb), HamiltonianKind::EffectiveFull);
  CHECK(is_hermitian(full));
  CHECK_THROWS_AS(build_effective(c, full_space(Na, Nb), HamiltonianKind::PDC), Error);
  CHECK_THROWS_AS(build_rwa(c, ab), Error);

  const Operator par = build_parametric(0.3, 2.0, 0.0, nmr_space(6));
  CHECK(std::abs(par.element(2, 0) - 0.6 * std::sqrt(2.0)) < 1e-14);
  const Operator bil = build_bilinear_resonant(0.3, ab);
  CHECK(std::abs(bil.element(0 * Nb + 2, 1 * Nb + 0) - 0.3 * std::sqrt(2.0)) < 1e-14);
}

TEST_CASE("scale_couplings scales kappa quadratically") {
  const DerivedCouplings c = benchmark();
  const DerivedCouplings h = scale_couplings(c, 0.5);
  CHECK(h.g_a == doctest::Approx(0.5 * c.g_a));
  CHECK(h.kappa == doctest::Approx(0.25 * c.kappa));
  CHECK(h.Omega == c.Omega);
}
