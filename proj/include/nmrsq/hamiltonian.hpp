#pragma once

// Hamiltonians of the CPB / STLR / NMR system, the Frohlich generator and the
// numerical Frohlich (Schrieffer-Wolff) transformation. Every operator is
// stored as H / hbar, i.e. in angular-frequency units.

#include <string>
#include <vector>

#include "nmrsq/device.hpp"
#include "nmrsq/quantum_core.hpp"

namespace nmrsq {

inline constexpr const char* kQubit = "q";
inline constexpr const char* kStlr = "a";
inline constexpr const char* kNmr = "b";

enum class HamiltonianKind { Total, RWA, EffectiveFull, EffectiveGround, PDC, BilinearResonant, Parametric };

std::string_view to_string(HamiltonianKind kind);

/// Subsystem labels the kind acts on, in space order.
std::vector<std::string> subsystems_of(HamiltonianKind kind);

Space full_space(int n_stlr, int n_nmr);       // (q, a, b)
Space stlr_nmr_space(int n_stlr, int n_nmr);   // (a, b)
Space nmr_space(int n_nmr);                    // (b)

Operator build_total(const DerivedCouplings& c, const Space& space);
Operator build_rwa(const DerivedCouplings& c, const Space& space);
Operator frohlich_generator(const DerivedCouplings& c, const Space& space);

enum class ConjugationMode { Exact, Bch2 };

/// exact: e^{-S} H e^{S}; bch2: H + [H,S] + 1/2 [[H,S],S].
Operator conjugate_by_generator(const Operator& H, const Operator& S, ConjugationMode mode);

/// kind must be EffectiveFull (q,a,b), EffectiveGround or PDC (a,b).
Operator build_effective(const DerivedCouplings& c, const Space& space, HamiltonianKind kind);

/// kappa (b^dag^2 a + a^dag b^2) on (a, b).
Operator build_bilinear_resonant(double kappa, const Space& space);

/// kappa beta (b^dag^2 e^{-i phi} + b^2 e^{i phi}) on (b).
Operator build_parametric(double kappa, double beta, double phi, const Space& space_b);

/// 2 a^dag a + b^dag b + 2 |1><1|_q, conserved by the RWA Hamiltonian.
Operator excitation_operator(const Space& space);

struct TermCoefficient {
  std::string name;
  double expected = 0.0;
  Complex measured;
  double abs_error = 0.0;
  double rel_error = 0.0;
  bool in_closed_form = true;  // false: term the closed form drops (constants)
};

struct FrohlichReport {
  int n_stlr = 0;
  int n_nmr = 0;
  /// Ground-state block of bch2(H_RWA, S) projected on {1, a^dag a, n_b, n_b^2, a^dag b^2, b^dag^2 a}.
  std::vector<TermCoefficient> ground_terms;
  double ground_fit_residual = 0.0;  // relative to ||ground block||
  /// || ground block - Stark terms - constant - (PDC) || / || PDC ||.
  double pdc_residual = 0.0;
  double conversion_coefficient = 0.0;  // -1/2 g_a g_b (1/Delta_a + 1/Delta_b)
  /// Qubit-diagonal part on levels free of truncation artifacts, projected on the
  /// rho_z-dressed operator basis of the full effective Hamiltonian.
  std::vector<TermCoefficient> full_terms;
  double full_fit_residual = 0.0;
  /// Norm of everything in bch2 beyond the closed form, relative to ||H_RWA||.
  double offdiagonal_norm = 0.0;     // qubit-off-diagonal (third-order) part
  double truncation_artifact_norm = 0.0;  // diagonal mismatch confined to top levels
  double max_conversion_rel_error = 0.0;
};

FrohlichReport frohlich_report(const DerivedCouplings& c, int n_stlr, int n_nmr);

struct ScalingResult {
  double residual_full = 0.0;  // || exact - bch2 || at the given couplings
  double residual_half = 0.0;  // same with g_a, g_b halved
  double ratio = 0.0;
};

ScalingResult frohlich_scaling(const DerivedCouplings& c, int n_stlr, int n_nmr);

/// Copy of c with g_a, g_b (and lambda_a, lambda_b, kappa) multiplied by s.
DerivedCouplings scale_couplings(const DerivedCouplings& c, double s);

}  // namespace nmrsq
