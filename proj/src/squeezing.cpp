#include "nmrsq/squeezing.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "nmrsq/error.hpp"
#include "nmrsq/hamiltonian.hpp"
#include "nmrsq/linalg.hpp"

namespace nmrsq {

namespace {

void require_single_mode(const Space& space, const char* what) {
  if (space.size() != 1 || space[0].kind != SubsystemKind::Boson) {
    throw Error(ErrorKind::SpaceMismatch, std::string(what) + " needs a single bosonic mode, got " + space.describe());
  }
}

int suggested_dim(double xi) {
  const double s = std::sinh(std::abs(xi));
  return static_cast<int>(std::ceil(6.0 * s * s));
}

}  // namespace

double max_squeeze_parameter(int dim) { return std::asinh(std::sqrt(dim / 6.0)); }

Operator squeeze_operator(const SqueezeSpec& spec, const Space& space_b) {
  require_single_mode(space_b, "squeeze_operator");
  const int dim = space_b.dim();
  if (std::abs(spec.xi) > max_squeeze_parameter(dim)) {
    throw Error(ErrorKind::TruncationTooSmall, "xi = " + std::to_string(spec.xi) + " needs at least " +
                                                   std::to_string(std::max(suggested_dim(spec.xi), dim + 1)) +
                                                   " NMR levels (have " + std::to_string(dim) + ")");
  }
  // The generator is the parametric Hamiltonian with kappa * beta = xi / 2 at unit time.
  const Operator G = build_parametric(0.5 * spec.xi, 1.0, spec.phi, space_b);
  const DenseMatrix U = exp_hermitian(G.dense(), Complex(0.0, -1.0));
  return Operator::from_dense(space_b, U, false, 1e-300);
}

VariancePair quadrature_variances(const State& state, double x0, double p0, double leakage_limit) {
  require_single_mode(state.space(), "quadrature_variances");
  if (!(x0 > 0.0) || !(p0 > 0.0)) throw Error(ErrorKind::Domain, "x0 and p0 must be positive");
  const std::string& label = state.space()[0].label;
  const double leak = leakage(state, label);
  if (leak > leakage_limit) {
    throw Error(ErrorKind::TruncationTooSmall, "top-decile population " + std::to_string(leak) +
                                                   " exceeds " + std::to_string(leakage_limit) +
                                                   "; increase the NMR dimension above " + std::to_string(state.dim()));
  }
  const auto ladder = ladder_ops(state.dim(), label);
  const Operator x(state.space(), (ladder.raise + ladder.lower).matrix(), true);
  const Operator p(state.space(), (ladder.raise - ladder.lower).scaled(Complex(0.0, 1.0)).matrix(), true);
  VariancePair out;
  out.dx = x0 * std::sqrt(expectation_and_variance(x, state).variance);
  out.dp = p0 * std::sqrt(expectation_and_variance(p, state).variance);
  return out;
}

double bogoliubov_check(double xi, const Space& space_b, int work_dim) {
  require_single_mode(space_b, "bogoliubov_check");
  const int dim = space_b.dim();
  const int n = std::max(dim, work_dim);
  const Space work = n == dim ? space_b : Space::boson(space_b[0].label, n);
  const DenseMatrix S = squeeze_operator({xi}, work).dense();
  const auto ladder = ladder_ops(n, work[0].label);
  const DenseMatrix b = ladder.lower.dense();
  const DenseMatrix bd = ladder.raise.dense();
  const DenseMatrix R = S.adjoint() * b * S - (std::cosh(xi) * b - std::sinh(xi) * bd);
  const int lower = (2 * dim) / 3;
  return lower > 0 ? R.topLeftCorner(lower, lower).cwiseAbs().maxCoeff() : 0.0;
}

double noisy_dx(double xi, double r) {
  if (r == 0.0) return std::exp(-xi);
  return std::sqrt(std::exp(-2.0 * xi) + 0.5 * r * xi * std::exp(2.0 * xi));
}

double noisy_dx2_derivative(double xi, double r) {
  return -2.0 * std::exp(-2.0 * xi) + 0.5 * r * std::exp(2.0 * xi) * (1.0 + 2.0 * xi);
}

VariancePair predicted_variances(double xi, double r, VarianceMode mode) {
  if (mode == VarianceMode::Ideal) return {std::exp(-xi), std::exp(xi)};
  if (!(r >= 0.0)) throw Error(ErrorKind::Domain, "noise ratio r must be >= 0");
  // Fig. 2 fixes r = D / (2 kappa beta) per curve; with xi = 2 kappa beta tau this gives D tau = r xi.
  const double dtau = r * xi;
  if (dtau >= 0.5) {
    throw Error(ErrorKind::Domain, "D tau = r xi = " + std::to_string(dtau) + " >= 1/2; the dp law is undefined there");
  }
  return {noisy_dx(xi, r), std::exp(xi) * std::sqrt(1.0 - 2.0 * dtau)};
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
  if (points < 1) throw Error(ErrorKind::Domain, "grid needs at least one point");
  if (points == 1) return {lo};
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
  g.back() = hi;
  return g;
}

Fig2Table fig2_table(const std::vector<double>& ratios, const std::vector<double>& xi_grid) {
  if (xi_grid.empty()) throw Error(ErrorKind::Domain, "empty xi grid");
  if (!std::is_sorted(xi_grid.begin(), xi_grid.end())) throw Error(ErrorKind::Domain, "xi grid must be ascending");
  Fig2Table table;
  table.xi = xi_grid;
  table.ratios = ratios;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw Error(ErrorKind::Domain, "ratios must be >= 0");
    std::vector<double> curve;
    curve.reserve(xi_grid.size());
    for (double xi : xi_grid) curve.push_back(noisy_dx(xi, r));

    CurveMinimum m;
    m.r = r;
    std::size_t bracket = xi_grid.size();
    for (std::size_t i = 0; i + 1 < xi_grid.size(); ++i) {
      if (noisy_dx2_derivative(xi_grid[i], r) < 0.0 && noisy_dx2_derivative(xi_grid[i + 1], r) >= 0.0) {
        bracket = i;
        break;
      }
    }
    if (bracket < xi_grid.size()) {
      auto f = [r](double xi) { return noisy_dx2_derivative(xi, r); };
      boost::math::tools::eps_tolerance<double> tol(50);
      std::uintmax_t iterations = 200;
      const auto root = boost::math::tools::toms748_solve(f, xi_grid[bracket], xi_grid[bracket + 1], tol, iterations);
      m.interior = true;
      m.xi_star = 0.5 * (root.first + root.second);
      m.value = noisy_dx(m.xi_star, r);
    } else {
      const auto it = std::min_element(curve.begin(), curve.end());
      m.xi_star = xi_grid[static_cast<std::size_t>(it - curve.begin())];
      m.value = *it;
    }
    table.dx.push_back(std::move(curve));
    table.minima.push_back(m);
  }
  return table;
}

}  // namespace nmrsq
