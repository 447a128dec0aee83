#include "nmrsq/evolution.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "nmrsq/error.hpp"
#include "nmrsq/hamiltonian.hpp"

namespace nmrsq {

namespace {

std::string time_string(double t) {
  std::ostringstream os;
  os.precision(10);
  os << t;
  return os.str();
}

Backend resolve_backend(Backend requested, int dim) {
  if (requested != Backend::Auto) return requested;
  return dim <= kDenseBackendLimit ? Backend::Dense : Backend::Krylov;
}

}  // namespace

void check_state(const Vector& psi, const Space& space, const PropagateOptions& options, double t) {
  const double drift = std::abs(psi.norm() - 1.0);
  if (!(drift <= options.norm_tolerance)) {
    throw Error(ErrorKind::PropagationAccuracy,
                "norm drifted by " + time_string(drift) + " at t = " + time_string(t));
  }
  for (const auto& s : space.subsystems()) {
    if (s.kind != SubsystemKind::Boson) continue;
    const double p = leakage(psi, space, s.label);
    if (p > options.leakage_limit) {
      throw Error(ErrorKind::TruncationTooSmall,
                  "mode '" + s.label + "' has top-decile population " + time_string(p) + " at t = " +
                      time_string(t) + " (limit " + time_string(options.leakage_limit) + "); increase its dimension above " +
                      std::to_string(s.dim));
    }
  }
}

Propagator::Propagator(const Operator& H, PropagateOptions options)
    : space_(H.space()), H_(H.matrix()), options_(options), backend_(resolve_backend(options.backend, H.dim())) {
  if (!H.hermitian_hint() && !is_hermitian(H)) {
    throw Error(ErrorKind::NotHermitian, "propagate needs a Hermitian Hamiltonian");
  }
  if (backend_ == Backend::Dense) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(H.dense());
    if (es.info() != Eigen::Success) throw Error(ErrorKind::PropagationAccuracy, "eigendecomposition failed");
    eigenvalues_ = es.eigenvalues();
    eigenvectors_ = es.eigenvectors();
  } else {
    krylov_.emplace(H_, options_.krylov);
  }
}

Vector Propagator::apply(const Vector& v, double t) {
  if (v.size() != space_.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "state dimension " + std::to_string(v.size()) +
                                                  " does not match Hamiltonian dimension " +
                                                  std::to_string(space_.dim()));
  }
  if (backend_ == Backend::Dense) {
    Vector c = eigenvectors_.adjoint() * v;
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -eigenvalues_(k) * t);
    return eigenvectors_ * c;
  }
  return krylov_->apply(v, t);
}

State Propagator::advance(const State& psi, double t) {
  if (!(psi.space() == space_)) {
    throw Error(ErrorKind::SpaceMismatch, "state space " + psi.space().describe() + " differs from " + space_.describe());
  }
  Vector out = apply(psi.amplitudes(), t);
  check_state(out, space_, options_, t);
  return State::normalized(space_, std::move(out));
}

State propagate(const Operator& H, const State& psi0, double t, const PropagateOptions& options) {
  if (t == 0.0) return psi0;
  Propagator prop(H, options);
  return prop.advance(psi0, t);
}

std::vector<State> evolve_on_grid(const Operator& H, const State& psi0, const std::vector<double>& times,
                                  const PropagateOptions& options) {
  if (!std::is_sorted(times.begin(), times.end())) {
    throw Error(ErrorKind::Domain, "time grid must be ascending");
  }
  Propagator prop(H, options);
  std::vector<State> out;
  out.reserve(times.size());
  if (prop.backend() == Backend::Dense) {
    for (double t : times) out.push_back(t == 0.0 ? psi0 : prop.advance(psi0, t));
    return out;
  }
  State current = psi0;
  double t_prev = 0.0;
  for (double t : times) {
    if (t != t_prev) {
      Vector v = prop.apply(current.amplitudes(), t - t_prev);
      check_state(v, psi0.space(), options, t);
      current = State::normalized(psi0.space(), std::move(v));
      t_prev = t;
    }
    out.push_back(current);
  }
  return out;
}

EmbedMap qubit_embedding(const Space& full) {
  if (full.size() < 2 || full[0].kind != SubsystemKind::Qubit) {
    throw Error(ErrorKind::SpaceMismatch, "qubit embedding needs a space that starts with a qubit, got " + full.describe());
  }
  const Subsystem q = full[0];
  return [full, q](const Operator& op) {
    const Operator lifted = tensor({Operator::identity(Space({q})), op});
    if (!(lifted.space() == full)) {
      throw Error(ErrorKind::SpaceMismatch, "lifted operator lives on " + lifted.space().describe() + ", expected " +
                                                full.describe());
    }
    return lifted;
  };
}

DeviationReport compare_dynamics(const Operator& H_full, const Operator& H_eff, const EmbedMap& embed,
                                 const State& full0, const State& eff0,
                                 const std::vector<ObservableSpec>& observables, const std::vector<double>& times,
                                 const std::optional<Operator>& generator, const PropagateOptions& options) {
  DeviationReport report;
  report.times = times;

  const auto full_states = evolve_on_grid(H_full, full0, times, options);
  const auto eff_states = evolve_on_grid(H_eff, eff0, times, options);

  std::optional<DenseMatrix> frame;
  if (generator) {
    if (!(generator->space() == H_full.space())) {
      throw Error(ErrorKind::SpaceMismatch, "generator and full Hamiltonian live on different spaces");
    }
    const DenseMatrix K = Complex(0.0, -1.0) * generator->dense();
    frame = exp_hermitian(0.5 * (K + DenseMatrix(K.adjoint())), Complex(0.0, -1.0));  // e^{-S}
  }

  double max_obs = 0.0;
  for (const auto& obs : observables) {
    const Operator lifted = embed(obs.effective);
    max_obs = std::max(max_obs, obs.effective.max_abs());
    std::vector<double> fv, ev, nv, cv;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double f = expectation(lifted, full_states[k]).real();
      const double e = expectation(obs.effective, eff_states[k]).real();
      fv.push_back(f);
      ev.push_back(e);
      nv.push_back(std::abs(f - e));
      if (frame) {
        const Vector rotated = *frame * full_states[k].amplitudes();
        const double fr = rotated.dot(lifted.apply(rotated)).real();
        cv.push_back(std::abs(fr - e));
      }
    }
    report.names.push_back(obs.name);
    report.max_naive.push_back(nv.empty() ? 0.0 : *std::max_element(nv.begin(), nv.end()));
    report.max_deviation = std::max(report.max_deviation, report.max_naive.back());
    if (frame) {
      report.max_frame_corrected.push_back(cv.empty() ? 0.0 : *std::max_element(cv.begin(), cv.end()));
      report.frame_corrected.push_back(std::move(cv));
    }
    report.full_values.push_back(std::move(fv));
    report.effective_values.push_back(std::move(ev));
    report.naive.push_back(std::move(nv));
  }

  const Space& fs = H_full.space();
  if (fs.size() > 0 && fs[0].kind == SubsystemKind::Qubit) {
    const Operator p0 = embed_operator(projector(0, fs[0].label), fs[0].label, fs);
    for (const auto& s : full_states) report.qubit_ground_population.push_back(expectation(p0, s).real());
  }
  if (generator) report.predicted_scale = generator->max_abs() * max_obs;
  return report;
}

// ---------------------------------------------------------------------------
// Phase-noise ensemble.

double EnsembleStats::dx(std::size_t k) const { return std::sqrt(std::max(0.0, mean_x2[k] - mean_x[k] * mean_x[k])); }
double EnsembleStats::dp(std::size_t k) const { return std::sqrt(std::max(0.0, mean_p2[k] - mean_p[k] * mean_p[k])); }

double EnsembleStats::dx_stderr(std::size_t k) const {
  const double d = dx(k);
  return d > 0 ? se_x2[k] / (2.0 * d) : 0.0;
}

double EnsembleStats::dp_stderr(std::size_t k) const {
  const double d = dp(k);
  return d > 0 ? se_p2[k] / (2.0 * d) : 0.0;
}

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t z = master_seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int worker_threads(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("NMR_SQUEEZE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min<long>(n, cap);
  }
  return n;
}

namespace {

struct TrajectoryRecord {
  double leakage = 0.0;
  int leakage_index = 0;
};

}  // namespace

EnsembleStats phase_noise_ensemble(const NoiseModel& noise, double kappa, const Space& space_b, const State& state0,
                                   double tau, int grid_points, const EnsembleOptions& options) {
  noise.validate();
  if (space_b.size() != 1 || space_b[0].kind != SubsystemKind::Boson) {
    throw Error(ErrorKind::SpaceMismatch, "phase-noise ensemble runs on a single bosonic mode, got " + space_b.describe());
  }
  if (!(state0.space() == space_b)) throw Error(ErrorKind::SpaceMismatch, "initial state is not on the NMR space");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw Error(ErrorKind::Domain, "tau must be finite and >= 0");
  if (grid_points < 2) throw Error(ErrorKind::Domain, "grid_points must be at least 2");

  const int intervals = grid_points - 1;
  const int per_interval = tau > 0 ? std::max(1, static_cast<int>(std::ceil(tau / intervals / noise.dt - 1e-9))) : 0;
  const int n_steps = intervals * per_interval;
  const double dt = n_steps > 0 ? tau / n_steps : noise.dt;

  const double slack = 1.0 + 1e-12;
  const double drive = std::abs(kappa * noise.beta);
  if (drive * dt > options.step_guard * slack) {
    throw Error(ErrorKind::StepSize, "kappa*beta*dt = " + time_string(drive * dt) + " exceeds " +
                                         time_string(options.step_guard));
  }
  if (noise.D * dt > options.step_guard * slack) {
    throw Error(ErrorKind::StepSize, "D*dt = " + time_string(noise.D * dt) + " exceeds " + time_string(options.step_guard));
  }

  const int dim = space_b.dim();
  const std::string label = space_b[0].label;
  const auto ladder = ladder_ops(dim, label);
  const SparseMatrix xop = (ladder.raise + ladder.lower).matrix();
  const SparseMatrix pop = (ladder.raise - ladder.lower).scaled(Complex(0.0, 1.0)).matrix();
  const SparseMatrix x2 = xop * xop;
  const SparseMatrix p2 = pop * pop;

  // exp(-i H(phi) dt) = R(phi) exp(-i H(0) dt) R(phi)^dagger, R = diag(e^{-i phi n / 2}).
  const Operator H0 = build_parametric(kappa, noise.beta, 0.0, space_b);
  const DenseMatrix U0 = exp_hermitian(H0.dense(), Complex(0.0, -dt));
  const Eigen::ArrayXd levels = Eigen::ArrayXd::LinSpaced(dim, 0.0, dim - 1.0);
  const int top = std::max(1, static_cast<int>(std::ceil(0.1 * dim)));
  const double sigma = std::sqrt(2.0 * noise.diffusion_factor * noise.D * dt);

  const int n_traj = noise.n_traj;
  std::vector<double> samples(static_cast<std::size_t>(n_traj) * grid_points * 4);
  std::vector<TrajectoryRecord> records(n_traj);

  auto run_trajectory = [&](int j, Vector& psi, Vector& tmp, Eigen::ArrayXcd& rot) {
    std::mt19937_64 rng(trajectory_seed(noise.master_seed, static_cast<std::uint64_t>(j)));
    std::normal_distribution<double> increment(0.0, sigma);
    psi = state0.amplitudes();
    double phi = noise.phi0;
    TrajectoryRecord& rec = records[j];
    double* out = samples.data() + static_cast<std::size_t>(j) * grid_points * 4;
    auto record = [&](int g) {
      tmp.noalias() = xop * psi;
      out[4 * g + 0] = psi.dot(tmp).real();
      tmp.noalias() = pop * psi;
      out[4 * g + 1] = psi.dot(tmp).real();
      tmp.noalias() = x2 * psi;
      out[4 * g + 2] = psi.dot(tmp).real();
      tmp.noalias() = p2 * psi;
      out[4 * g + 3] = psi.dot(tmp).real();
    };
    record(0);
    for (int s = 1; s <= n_steps; ++s) {
      rot = (levels * (-0.5 * phi)).unaryExpr([](double a) { return std::polar(1.0, a); });
      tmp = rot.conjugate().matrix().cwiseProduct(psi);
      psi.noalias() = U0 * tmp;
      psi = rot.matrix().cwiseProduct(psi);
      if (sigma > 0.0) phi += increment(rng);
      const double leak = psi.tail(top).squaredNorm();
      if (leak > rec.leakage) {
        rec.leakage = leak;
        rec.leakage_index = s;
      }
      if (s % per_interval == 0) record(s / per_interval);
    }
  };

  const int n_workers = std::min(worker_threads(options.threads), n_traj);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    Vector psi(dim), tmp(dim);
    Eigen::ArrayXcd rot(dim);
    try {
      for (int j = next++; j < n_traj; j = next++) run_trajectory(j, psi, tmp, rot);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  EnsembleStats stats;
  stats.n_traj = n_traj;
  stats.dt = dt;
  for (int g = 0; g < grid_points; ++g) stats.times.push_back(tau * g / intervals);
  std::vector<double>* means[4] = {&stats.mean_x, &stats.mean_p, &stats.mean_x2, &stats.mean_p2};
  std::vector<double>* errors[4] = {&stats.se_x, &stats.se_p, &stats.se_x2, &stats.se_p2};
  for (int q = 0; q < 4; ++q) {
    means[q]->assign(grid_points, 0.0);
    errors[q]->assign(grid_points, 0.0);
  }
  // Fixed reduction order (trajectory index) keeps results independent of the worker count.
  for (int g = 0; g < grid_points; ++g) {
    for (int q = 0; q < 4; ++q) {
      double sum = 0.0;
      for (int j = 0; j < n_traj; ++j) sum += samples[(static_cast<std::size_t>(j) * grid_points + g) * 4 + q];
      const double mean = sum / n_traj;
      double ss = 0.0;
      for (int j = 0; j < n_traj; ++j) {
        const double d = samples[(static_cast<std::size_t>(j) * grid_points + g) * 4 + q] - mean;
        ss += d * d;
      }
      (*means[q])[g] = mean;
      (*errors[q])[g] = n_traj > 1 ? std::sqrt(ss / (n_traj - 1)) / std::sqrt(static_cast<double>(n_traj)) : 0.0;
    }
  }
  int worst = -1;
  for (int j = 0; j < n_traj; ++j) {
    if (worst < 0 || records[j].leakage > records[worst].leakage) worst = j;
  }
  stats.max_leakage = std::max(leakage(state0, label), worst >= 0 ? records[worst].leakage : 0.0);
  if (stats.max_leakage > options.leakage_limit) {
    const double t_bad = worst >= 0 && records[worst].leakage_index > 0 ? records[worst].leakage_index * dt : 0.0;
    throw Error(ErrorKind::TruncationTooSmall, "NMR top-decile population " + time_string(stats.max_leakage) +
                                                   " at t = " + time_string(t_bad) + " (trajectory " +
                                                   std::to_string(worst) + "); increase N_b above " +
                                                   std::to_string(dim));
  }
  return stats;
}

ParametricComparison compare_parametric_approximation(double kappa, double beta, double phi, int n_stlr, int n_nmr,
                                                      const std::vector<double>& xi_values,
                                                      const PropagateOptions& options) {
  if (kappa * beta == 0.0) throw Error(ErrorKind::Domain, "parametric comparison needs kappa * beta != 0");
  const Space ab = stlr_nmr_space(n_stlr, n_nmr);
  const Space b = nmr_space(n_nmr);
  const Operator H12 = build_bilinear_resonant(kappa, ab);
  const Operator H13 = build_parametric(kappa, beta, phi, b);
  const State psi12 = make_state(ab, {Coherent{std::polar(beta, -phi)}, FockNumber{0}});
  const State psi13 = basis_state(b, {0});

  auto lifted = [&](const Operator& op) { return Operator(ab, embed_operator(op, kNmr, ab).matrix(), true); };
  const auto l = ladder_ops(n_nmr, kNmr);
  const Operator x = Operator(b, (l.raise + l.lower).matrix(), true);
  const Operator p = Operator(b, (l.raise - l.lower).scaled(Complex(0.0, 1.0)).matrix(), true);
  const Operator x2 = x * x, p2 = p * p;
  const Operator X = lifted(x), X2 = lifted(x2), P = lifted(p), P2 = lifted(p2);
  const Operator Na = embed_operator(number_op(n_stlr, kStlr), kStlr, ab);

  auto sd = [](const Operator& a, const Operator& a2, const State& s) {
    const double m = expectation(a, s).real();
    return std::sqrt(std::max(0.0, expectation(a2, s).real() - m * m));
  };

  Propagator U12(H12, options);
  Propagator U13(H13, options);
  ParametricComparison out;
  for (double xi : xi_values) {
    const double t = xi / (2.0 * std::abs(kappa * beta));
    const State s12 = U12.advance(psi12, t);
    const State s13 = U13.advance(psi13, t);
    out.xi.push_back(xi);
    out.dx_quantum.push_back(sd(X, X2, s12));
    out.dp_quantum.push_back(sd(P, P2, s12));
    out.dx_classical.push_back(sd(x, x2, s13));
    out.dp_classical.push_back(sd(p, p2, s13));
    const double e = std::max(std::abs(out.dx_quantum.back() / out.dx_classical.back() - 1.0),
                              std::abs(out.dp_quantum.back() / out.dp_classical.back() - 1.0));
    out.rel_error.push_back(e);
    out.pump_depletion.push_back(1.0 - expectation(Na, s12).real() / (beta * beta));
    out.max_rel_error = std::max(out.max_rel_error, e);
    out.max_leakage = std::max(out.max_leakage, max_leakage(s12.amplitudes(), ab));
  }
  return out;
}

}  // namespace nmrsq
