#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmrsq/error.hpp"
#include "nmrsq/linalg.hpp"

namespace nmrsq {

DenseMatrix exp_hermitian(const DenseMatrix& K, Complex factor) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(K);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::PropagationAccuracy, "eigendecomposition failed");
  const Vector phases = (es.eigenvalues().cast<Complex>() * factor).array().exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

KrylovExpm::KrylovExpm(const SparseMatrix& H, KrylovOptions options) : H_(H), options_(options) {
  const int n = static_cast<int>(H.rows());
  const int m = std::min(options_.max_subspace, n);
  basis_.resize(n, m + 1);
  alpha_.resize(m);
  beta_.resize(m + 1);
  w_.resize(n);
}

Vector KrylovExpm::apply(const Vector& v, double t) {
  Vector out = v;
  apply_in_place(out, t);
  return out;
}

// Lanczos exponential integrator (Hochbruck-Lubich style): build one Krylov
// basis per substep and shrink the substep until the a-posteriori estimate
// |beta_m [exp(-i T h)]_{m,0}| meets the tolerance.
void KrylovExpm::apply_in_place(Vector& v, double t) {
  if (t == 0.0) return;
  const int m_max = static_cast<int>(alpha_.size());
  const double direction = t > 0 ? 1.0 : -1.0;
  double remaining = std::abs(t);
  double h = remaining;
  int substeps = 0;

  while (remaining > 0.0) {
    if (++substeps > options_.max_substeps) {
      throw Error(ErrorKind::PropagationAccuracy, "Krylov propagator exceeded its substep budget");
    }
    const double vnorm = v.norm();
    if (vnorm == 0.0) return;
    basis_.col(0) = v / vnorm;

    int m = 0;
    bool breakdown = false;
    for (; m < m_max; ++m) {
      w_.noalias() = H_ * basis_.col(m);
      ++stats_.matvecs;
      alpha_(m) = basis_.col(m).dot(w_).real();
      w_ -= alpha_(m) * basis_.col(m);
      if (m > 0) w_ -= beta_(m) * basis_.col(m - 1);
      // Full reorthogonalization; subspaces are short.
      for (int k = 0; k <= m; ++k) w_ -= basis_.col(k).dot(w_) * basis_.col(k);
      beta_(m + 1) = w_.norm();
      if (beta_(m + 1) <= 1e-14 * std::max(1.0, std::abs(alpha_(m)))) {
        breakdown = true;
        ++m;
        break;
      }
      basis_.col(m + 1) = w_ / beta_(m + 1);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(beta_.segment(1, m - 1)) : Eigen::VectorXd();
    es.computeFromTridiagonal(alpha_.head(m), sub, Eigen::ComputeEigenvectors);
    const Eigen::MatrixXd& Q = es.eigenvectors();
    const Eigen::VectorXd& lam = es.eigenvalues();

    h = std::min(h, remaining);
    Vector y(m);
    while (true) {
      Vector coeff(m);
      for (int k = 0; k < m; ++k) coeff(k) = std::exp(Complex(0.0, -direction * lam(k) * h)) * Q(0, k);
      y = Q.cast<Complex>() * coeff;
      if (breakdown) break;
      const double err = beta_(m) * std::abs(y(m - 1));
      // y(m-1) cannot be resolved below roundoff; shrinking h past that point only stalls.
      const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + beta_(m));
      if (err <= std::max(options_.tolerance * h, floor) || h < 1e-300) break;
      h *= 0.5 * std::pow(options_.tolerance * h / err, 1.0 / m);
      h = std::min(h, remaining);
    }

    v.noalias() = vnorm * (basis_.leftCols(m) * y);
    remaining -= h;
    if (remaining < 1e-15 * std::abs(t)) remaining = 0.0;
    // Let the next substep try a larger step again.
    h *= 2.0;
  }
  stats_.substeps += substeps;
}

}  // namespace nmrsq
