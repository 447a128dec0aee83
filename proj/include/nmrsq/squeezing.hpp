#pragma once

// Squeeze operator, quadrature statistics, the ideal and phase-noise variance
// laws, and the Fig. 2 style curves with their minima.

#include <vector>

#include "nmrsq/quantum_core.hpp"

namespace nmrsq {

struct SqueezeSpec {
  double xi = 0.0;
  double phi = 1.5707963267948966;
  double x0 = 1.0;
  double p0 = 1.0;
};

struct VariancePair {
  double dx = 0.0;
  double dp = 0.0;
};

/// Largest |xi| the leakage guard allows on a mode of this dimension: sinh^2(xi) <= dim / 6.
double max_squeeze_parameter(int dim);

/// exp[-i (xi/2) (b^dag^2 e^{-i phi} + b^2 e^{i phi})] on an NMR-only space.
Operator squeeze_operator(const SqueezeSpec& spec, const Space& space_b);

/// Standard deviations of x = x0 (b^dag + b) and p = i p0 (b^dag - b).
/// Throws TruncationTooSmall when the top-decile population exceeds leakage_limit.
VariancePair quadrature_variances(const State& state, double x0 = 1.0, double p0 = 1.0, double leakage_limit = 1e-8);

/// max |S^dag b S - (b cosh xi - b^dag sinh xi)| over the lower 2/3 of the levels
/// of space_b. With work_dim > dim, S is built on work_dim levels and the
/// comparison is made on the leading block.
double bogoliubov_check(double xi, const Space& space_b, int work_dim = 0);

enum class VarianceMode { Ideal, Noisy };

/// In x0, p0 units. Noisy uses D tau = r xi with r = D / (2 kappa beta);
/// throws Domain when r xi >= 1/2 (the dp branch is undefined there).
VariancePair predicted_variances(double xi, double r, VarianceMode mode);

/// Noisy dx / x0 alone, defined for every xi >= 0, r >= 0.
double noisy_dx(double xi, double r);

/// d/dxi of the squared noisy dx, used for the minimum search.
double noisy_dx2_derivative(double xi, double r);

struct CurveMinimum {
  double r = 0.0;
  bool interior = false;  // false: the curve's minimum sits on the grid boundary
  double xi_star = 0.0;
  double value = 0.0;
};

struct Fig2Table {
  std::vector<double> xi;
  std::vector<double> ratios;
  std::vector<std::vector<double>> dx;  // [ratio][xi]
  std::vector<CurveMinimum> minima;
};

/// Ratios >= 0, ascending grid. Minima come from bracketing the derivative's
/// sign change on the grid and refining the root to |dxi| <= 1e-12.
Fig2Table fig2_table(const std::vector<double>& ratios, const std::vector<double>& xi_grid);

std::vector<double> uniform_grid(double lo, double hi, int points);

}  // namespace nmrsq
