#pragma once

#include "nmrsq/quantum_core.hpp"

namespace nmrsq {

/// exp(factor * K) for Hermitian K via eigendecomposition.
DenseMatrix exp_hermitian(const DenseMatrix& K, Complex factor);

struct KrylovOptions {
  int max_subspace = 30;
  double tolerance = 1e-13;  // per-unit-time local error target
  int max_substeps = 1000000;
};

struct KrylovStats {
  int substeps = 0;
  int matvecs = 0;
};

/// exp(-i H t) v via Lanczos with adaptive substepping (H Hermitian, sparse).
/// Workspace is owned so that repeated calls do not reallocate.
class KrylovExpm {
 public:
  explicit KrylovExpm(const SparseMatrix& H, KrylovOptions options = {});

  Vector apply(const Vector& v, double t);
  void apply_in_place(Vector& v, double t);

  const KrylovStats& stats() const noexcept { return stats_; }

 private:
  const SparseMatrix& H_;
  KrylovOptions options_;
  DenseMatrix basis_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd beta_;
  Vector w_;
  KrylovStats stats_;
};

}  // namespace nmrsq
