#include "nmrsq/hamiltonian.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "nmrsq/error.hpp"
#include "nmrsq/linalg.hpp"

namespace nmrsq {

std::string_view to_string(HamiltonianKind kind) {
  switch (kind) {
    case HamiltonianKind::Total: return "total";
    case HamiltonianKind::RWA: return "rwa";
    case HamiltonianKind::EffectiveFull: return "effective-full";
    case HamiltonianKind::EffectiveGround: return "effective-ground";
    case HamiltonianKind::PDC: return "pdc";
    case HamiltonianKind::BilinearResonant: return "bilinear-resonant";
    case HamiltonianKind::Parametric: return "parametric";
  }
  return "unknown";
}

std::vector<std::string> subsystems_of(HamiltonianKind kind) {
  switch (kind) {
    case HamiltonianKind::Total:
    case HamiltonianKind::RWA:
    case HamiltonianKind::EffectiveFull:
      return {kQubit, kStlr, kNmr};
    case HamiltonianKind::EffectiveGround:
    case HamiltonianKind::PDC:
    case HamiltonianKind::BilinearResonant:
      return {kStlr, kNmr};
    case HamiltonianKind::Parametric:
      return {kNmr};
  }
  return {};
}

Space full_space(int n_stlr, int n_nmr) {
  return Space({{kQubit, 2, SubsystemKind::Qubit}, {kStlr, n_stlr, SubsystemKind::Boson}, {kNmr, n_nmr, SubsystemKind::Boson}});
}

Space stlr_nmr_space(int n_stlr, int n_nmr) {
  return Space({{kStlr, n_stlr, SubsystemKind::Boson}, {kNmr, n_nmr, SubsystemKind::Boson}});
}

Space nmr_space(int n_nmr) { return Space::boson(kNmr, n_nmr); }

namespace {

void require_shape(const Space& space, HamiltonianKind kind) {
  if (kind == HamiltonianKind::Parametric && space.size() == 1 && space[0].kind == SubsystemKind::Boson) return;
  const auto labels = subsystems_of(kind);
  bool ok = space.size() == labels.size();
  for (std::size_t i = 0; ok && i < labels.size(); ++i) {
    ok = space[i].label == labels[i] &&
         (space[i].kind == SubsystemKind::Qubit) == (labels[i] == std::string(kQubit));
  }
  if (!ok) {
    throw Error(ErrorKind::SpaceMismatch,
                std::string(to_string(kind)) + " Hamiltonian needs subsystems in order (" +
                    [&] {
                      std::string s;
                      for (const auto& l : labels) s += (s.empty() ? "" : ", ") + l;
                      return s;
                    }() +
                    "), got " + space.describe());
  }
}

// Embedded single-mode and qubit building blocks on a given space.
struct Blocks {
  Operator a, ad, b, bd;

  explicit Blocks(const Space& space)
      : a(embed_operator(ladder_ops(space[space.index_of(kStlr)].dim, kStlr).lower, kStlr, space)),
        ad(a.adjoint()),
        b(embed_operator(ladder_ops(space[space.index_of(kNmr)].dim, kNmr).lower, kNmr, space)),
        bd(b.adjoint()) {}
};

Operator hermitian(const Operator& op) { return Operator(op.space(), op.matrix(), true); }

Operator qubit(const Operator& local, const Space& space) { return embed_operator(local, kQubit, space); }

}  // namespace

Operator build_total(const DerivedCouplings& c, const Space& space) {
  require_shape(space, HamiltonianKind::Total);
  const Blocks m(space);
  const Operator sz = qubit(sigma_z(kQubit), space);
  const Operator sx = qubit(sigma_x(kQubit), space);
  const Operator xa = m.ad + m.a;
  const Operator xb = m.bd + m.b;
  Operator H = c.omega_a * (m.ad * m.a) + c.omega_b * (m.bd * m.b) - (0.5 * c.charge_term) * sz -
               c.josephson_term * sx + c.lambda_a * (xa * sz) + c.lambda_b * (xb * xb * sx);
  return hermitian(H);
}

Operator build_rwa(const DerivedCouplings& c, const Space& space) {
  require_shape(space, HamiltonianKind::RWA);
  const Blocks m(space);
  const Operator rz = qubit(rho_z(kQubit), space);
  const Operator rp = qubit(rho_plus(kQubit), space);
  const Operator rm = qubit(rho_minus(kQubit), space);
  Operator H = c.omega_a * (m.ad * m.a) + c.omega_b * (m.bd * m.b) - (0.5 * c.Omega) * rz +
               c.g_a * (m.ad * rm + m.a * rp) + c.g_b * (m.bd * m.bd * rm + m.b * m.b * rp);
  return hermitian(H);
}

Operator frohlich_generator(const DerivedCouplings& c, const Space& space) {
  require_shape(space, HamiltonianKind::RWA);
  if (c.Delta_a == 0.0) throw Error(ErrorKind::ZeroDetuning, "Frohlich generator: Delta_a is zero");
  if (c.Delta_b == 0.0) throw Error(ErrorKind::ZeroDetuning, "Frohlich generator: Delta_b is zero");
  const Blocks m(space);
  const Operator rp = qubit(rho_plus(kQubit), space);
  const Operator rm = qubit(rho_minus(kQubit), space);
  return (c.g_a / c.Delta_a) * (m.ad * rm - m.a * rp) + (c.g_b / c.Delta_b) * (m.bd * m.bd * rm - m.b * m.b * rp);
}

Operator conjugate_by_generator(const Operator& H, const Operator& S, ConjugationMode mode) {
  if (!(H.space() == S.space())) throw Error(ErrorKind::SpaceMismatch, "conjugate_by_generator: space mismatch");
  if (!is_anti_hermitian(S)) throw Error(ErrorKind::NotAntiHermitian, "generator S is not anti-Hermitian");

  if (mode == ConjugationMode::Bch2) {
    const Operator HS = commutator(H, S);
    Operator out = H + HS + 0.5 * commutator(HS, S);
    return H.hermitian_hint() ? Operator(out.space(), out.matrix(), is_hermitian(out, 1e-10)) : out;
  }

  // S = i K with K Hermitian, so e^{S} = exp(i K).
  const DenseMatrix K = (Complex(0.0, -1.0) * S.dense());
  const DenseMatrix KH = 0.5 * (K + K.adjoint());
  const DenseMatrix expS = exp_hermitian(KH, Complex(0.0, 1.0));
  DenseMatrix out = expS.adjoint() * H.dense() * expS;
  if (H.hermitian_hint()) out = 0.5 * (out + out.adjoint());
  const double cutoff = 1e-15 * std::max(1.0, out.cwiseAbs().maxCoeff());
  return Operator::from_dense(H.space(), out, H.hermitian_hint(), cutoff);
}

Operator build_effective(const DerivedCouplings& c, const Space& space, HamiltonianKind kind) {
  const double conv = -0.5 * c.g_a * c.g_b * (1.0 / c.Delta_a + 1.0 / c.Delta_b);
  const double stark_a = c.g_a * c.g_a / c.Delta_a;
  const double stark_b = c.g_b * c.g_b / c.Delta_b;

  switch (kind) {
    case HamiltonianKind::EffectiveFull: {
      require_shape(space, kind);
      const Blocks m(space);
      const Operator rz = qubit(rho_z(kQubit), space);
      const Operator na = m.ad * m.a;
      const Operator nb = m.bd * m.b;
      const Operator id = Operator::identity(space);
      Operator H = (c.omega_a * id - stark_a * rz) * na -
                   0.5 * ((c.Omega + 2.0 * stark_b + stark_a) * rz) +
                   (c.omega_b * id + 2.0 * stark_b * id - stark_b * rz - stark_b * (nb * rz)) * nb +
                   conv * ((m.ad * m.b * m.b + m.bd * m.bd * m.a) * rz);
      return hermitian(H);
    }
    case HamiltonianKind::EffectiveGround: {
      require_shape(space, kind);
      const Blocks m(space);
      const Operator na = m.ad * m.a;
      const Operator nb = m.bd * m.b;
      Operator H = (c.omega_a - stark_a) * na + (c.omega_b + stark_b) * nb - stark_b * (nb * nb) +
                   conv * (m.bd * m.bd * m.a + m.ad * m.b * m.b);
      return hermitian(H);
    }
    case HamiltonianKind::PDC: {
      require_shape(space, kind);
      const Blocks m(space);
      Operator H = c.omega_a * (m.ad * m.a) + c.omega_b * (m.bd * m.b) + conv * (m.bd * m.bd * m.a + m.ad * m.b * m.b);
      return hermitian(H);
    }
    default:
      throw Error(ErrorKind::SpaceMismatch,
                  "build_effective supports effective-full, effective-ground and pdc, not " +
                      std::string(to_string(kind)));
  }
}

Operator build_bilinear_resonant(double kappa, const Space& space) {
  require_shape(space, HamiltonianKind::BilinearResonant);
  const Blocks m(space);
  return hermitian(kappa * (m.bd * m.bd * m.a + m.ad * m.b * m.b));
}

Operator build_parametric(double kappa, double beta, double phi, const Space& space_b) {
  require_shape(space_b, HamiltonianKind::Parametric);
  const auto ladder = ladder_ops(space_b.dim(), space_b[0].label);
  const Operator b2 = ladder.lower * ladder.lower;
  const Operator bd2 = ladder.raise * ladder.raise;
  const Complex e = std::polar(1.0, phi);
  const Operator H = (kappa * beta) * (bd2.scaled(std::conj(e)) + b2.scaled(e));
  return Operator(space_b, H.matrix(), true);
}

Operator excitation_operator(const Space& space) {
  require_shape(space, HamiltonianKind::RWA);
  const Blocks m(space);
  return hermitian(2.0 * (m.ad * m.a) + m.bd * m.b + 2.0 * qubit(projector(1, kQubit), space));
}

DerivedCouplings scale_couplings(const DerivedCouplings& c, double s) {
  DerivedCouplings out = c;
  out.g_a *= s;
  out.g_b *= s;
  out.lambda_a *= s;
  out.lambda_b *= s;
  out.kappa *= s * s;
  return out;
}

// ---------------------------------------------------------------------------
// Term-by-term verification of the second-order Frohlich transformation.

namespace {

struct Fit {
  Eigen::VectorXcd coefficients;
  double residual = 0.0;  // ||X - sum c_k B_k|| / ||X||
};

// Least-squares projection of X onto span{B_k} restricted to the index set.
Fit project(const DenseMatrix& X, const std::vector<DenseMatrix>& basis, const std::vector<int>& index) {
  const int n = static_cast<int>(index.size());
  auto restrict = [&](const DenseMatrix& M) {
    DenseMatrix R(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) R(i, j) = M(index[i], index[j]);
    return R;
  };
  const DenseMatrix Xr = restrict(X);
  std::vector<DenseMatrix> Br;
  for (const auto& B : basis) Br.push_back(restrict(B));
  const int k = static_cast<int>(basis.size());
  DenseMatrix gram(k, k);
  Eigen::VectorXcd rhs(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) gram(i, j) = (Br[i].adjoint() * Br[j]).trace();
    rhs(i) = (Br[i].adjoint() * Xr).trace();
  }
  Fit fit;
  fit.coefficients = gram.fullPivLu().solve(rhs);
  DenseMatrix residual = Xr;
  for (int i = 0; i < k; ++i) residual -= fit.coefficients(i) * Br[i];
  const double xn = Xr.norm();
  fit.residual = xn > 0 ? residual.norm() / xn : residual.norm();
  return fit;
}

TermCoefficient term(std::string name, double expected, Complex measured, bool in_closed_form = true) {
  TermCoefficient t;
  t.name = std::move(name);
  t.expected = expected;
  t.measured = measured;
  t.abs_error = std::abs(measured - Complex(expected, 0.0));
  t.rel_error = expected != 0.0 ? t.abs_error / std::abs(expected) : t.abs_error;
  t.in_closed_form = in_closed_form;
  return t;
}

}  // namespace

FrohlichReport frohlich_report(const DerivedCouplings& c, int n_stlr, int n_nmr) {
  FrohlichReport report;
  report.n_stlr = n_stlr;
  report.n_nmr = n_nmr;

  const Space full = full_space(n_stlr, n_nmr);
  const Operator H = build_rwa(c, full);
  const Operator S = frohlich_generator(c, full);
  const DenseMatrix X = conjugate_by_generator(H, S, ConjugationMode::Bch2).dense();
  const double h_norm = H.frobenius_norm();

  const double conv = -0.5 * c.g_a * c.g_b * (1.0 / c.Delta_a + 1.0 / c.Delta_b);
  const double stark_a = c.g_a * c.g_a / c.Delta_a;
  const double stark_b = c.g_b * c.g_b / c.Delta_b;
  report.conversion_coefficient = conv;

  // Ground block: qubit index 0 occupies the first n_stlr * n_nmr rows.
  const int nab = n_stlr * n_nmr;
  const Space ab = stlr_nmr_space(n_stlr, n_nmr);
  const DenseMatrix G = X.topLeftCorner(nab, nab);
  {
    const Blocks m(ab);
    const DenseMatrix id = DenseMatrix::Identity(nab, nab);
    const DenseMatrix na = (m.ad * m.a).dense();
    const DenseMatrix nb = (m.bd * m.b).dense();
    const DenseMatrix up = (m.ad * m.b * m.b).dense();
    const DenseMatrix down = (m.bd * m.bd * m.a).dense();
    std::vector<int> all(nab);
    for (int i = 0; i < nab; ++i) all[i] = i;
    const Fit fit = project(G, {id, na, nb, nb * nb, up, down}, all);
    report.ground_fit_residual = fit.residual;
    report.ground_terms = {
        term("identity", -0.5 * c.Omega, fit.coefficients(0)),
        term("a^dag a", c.omega_a - stark_a, fit.coefficients(1)),
        term("b^dag b", c.omega_b + stark_b, fit.coefficients(2)),
        term("(b^dag b)^2", -stark_b, fit.coefficients(3)),
        term("a^dag b^2", conv, fit.coefficients(4)),
        term("b^dag^2 a", conv, fit.coefficients(5)),
    };
    report.max_conversion_rel_error = std::max(report.ground_terms[4].rel_error, report.ground_terms[5].rel_error);

    const DenseMatrix pdc = build_effective(c, ab, HamiltonianKind::PDC).dense();
    const DenseMatrix dropped = G - (-0.5 * c.Omega) * id + stark_a * na - stark_b * nb + stark_b * (nb * nb);
    report.pdc_residual = (dropped - pdc).norm() / pdc.norm();
  }

  // Qubit-diagonal blocks on levels away from the truncation edge.
  {
    const Blocks m(full);
    const int n = full.dim();
    const DenseMatrix id = DenseMatrix::Identity(n, n);
    const DenseMatrix rz = qubit(rho_z(kQubit), full).dense();
    const DenseMatrix na = (m.ad * m.a).dense();
    const DenseMatrix nb = (m.bd * m.b).dense();
    const DenseMatrix up = (m.ad * m.b * m.b).dense();
    const DenseMatrix down = (m.bd * m.bd * m.a).dense();
    std::vector<int> bulk;
    for (int q = 0; q < 2; ++q)
      for (int ia = 0; ia < n_stlr - 1; ++ia)
        for (int ib = 0; ib < n_nmr - 2; ++ib) bulk.push_back((q * n_stlr + ia) * n_nmr + ib);

    DenseMatrix diag = DenseMatrix::Zero(n, n);
    diag.topLeftCorner(nab, nab) = X.topLeftCorner(nab, nab);
    diag.bottomRightCorner(nab, nab) = X.bottomRightCorner(nab, nab);
    const DenseMatrix off = X - diag;

    const std::vector<DenseMatrix> basis = {id, rz, na, na * rz, nb, nb * rz, nb * nb, nb * nb * rz,
                                            up, up * rz, down, down * rz};
    const Fit fit = project(diag, basis, bulk);
    report.full_fit_residual = fit.residual;
    const auto& k = fit.coefficients;
    report.full_terms = {
        term("identity", 0.5 * stark_a + stark_b, k(0), false),
        term("rho_z", -0.5 * (c.Omega + 2.0 * stark_b + stark_a), k(1)),
        term("a^dag a", c.omega_a, k(2)),
        term("a^dag a rho_z", -stark_a, k(3)),
        term("b^dag b", c.omega_b + 2.0 * stark_b, k(4)),
        term("b^dag b rho_z", -stark_b, k(5)),
        term("(b^dag b)^2", 0.0, k(6)),
        term("(b^dag b)^2 rho_z", -stark_b, k(7)),
        term("a^dag b^2", 0.0, k(8)),
        term("a^dag b^2 rho_z", conv, k(9)),
        term("b^dag^2 a", 0.0, k(10)),
        term("b^dag^2 a rho_z", conv, k(11)),
    };

    DenseMatrix model = DenseMatrix::Zero(n, n);
    for (int i = 0; i < static_cast<int>(basis.size()); ++i) model += k(i) * basis[i];
    report.offdiagonal_norm = off.norm() / h_norm;
    report.truncation_artifact_norm = (diag - model).norm() / h_norm;
  }
  return report;
}

ScalingResult frohlich_scaling(const DerivedCouplings& c, int n_stlr, int n_nmr) {
  const Space full = full_space(n_stlr, n_nmr);
  auto residual = [&](const DerivedCouplings& cc) {
    const Operator H = build_rwa(cc, full);
    const Operator S = frohlich_generator(cc, full);
    const Operator exact = conjugate_by_generator(H, S, ConjugationMode::Exact);
    const Operator bch = conjugate_by_generator(H, S, ConjugationMode::Bch2);
    return (exact.dense() - bch.dense()).norm();
  };
  ScalingResult r;
  r.residual_full = residual(c);
  r.residual_half = residual(scale_couplings(c, 0.5));
  r.ratio = r.residual_half > 0 ? r.residual_full / r.residual_half : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace nmrsq
