#pragma once

// Time evolution: exact propagation of pure states, full-vs-effective dynamics
// comparison and Monte Carlo ensembles for the phase-diffusing pump.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nmrsq/linalg.hpp"
#include "nmrsq/noise.hpp"
#include "nmrsq/quantum_core.hpp"

namespace nmrsq {

enum class Backend { Auto, Dense, Krylov };

/// Auto picks dense eigendecomposition up to this dimension, Krylov above.
inline constexpr int kDenseBackendLimit = 2000;

struct PropagateOptions {
  Backend backend = Backend::Auto;
  double leakage_limit = 1e-6;   // top-decile population of any bosonic mode
  double norm_tolerance = 1e-8;  // |norm - 1| after propagation
  KrylovOptions krylov;
};

/// exp(-i H t) with H / hbar in angular units. The dense backend caches the
/// eigendecomposition so repeated calls with the same H are cheap.
class Propagator {
 public:
  explicit Propagator(const Operator& H, PropagateOptions options = {});
  Propagator(const Propagator&) = delete;
  Propagator& operator=(const Propagator&) = delete;

  Backend backend() const noexcept { return backend_; }
  const PropagateOptions& options() const noexcept { return options_; }

  /// Raw action, no guards.
  Vector apply(const Vector& v, double t);

  /// Guarded action; throws PropagationAccuracy on norm drift and
  /// TruncationTooSmall on leakage, naming the time.
  State advance(const State& psi, double t);

 private:
  Space space_;
  SparseMatrix H_;
  PropagateOptions options_;
  Backend backend_;
  Eigen::VectorXd eigenvalues_;
  DenseMatrix eigenvectors_;
  std::optional<KrylovExpm> krylov_;
};

State propagate(const Operator& H, const State& psi0, double t, const PropagateOptions& options = {});

/// States at every grid time (ascending, starting anywhere >= 0).
std::vector<State> evolve_on_grid(const Operator& H, const State& psi0, const std::vector<double>& times,
                                  const PropagateOptions& options = {});

/// Throws like Propagator::advance if the state breaks the guards.
void check_state(const Vector& psi, const Space& space, const PropagateOptions& options, double t);

/// Lifts an effective-space (STLR x NMR) operator to the full (q, STLR, NMR) space.
using EmbedMap = std::function<Operator(const Operator&)>;
EmbedMap qubit_embedding(const Space& full);

struct ObservableSpec {
  std::string name;
  Operator effective;  // on the effective space; lifted by the embed map
};

struct DeviationReport {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> full_values;       // [observable][time]
  std::vector<std::vector<double>> effective_values;  // [observable][time]
  std::vector<std::vector<double>> naive;             // |full - effective|
  std::vector<std::vector<double>> frame_corrected;   // full state rotated by e^{-S} first; empty without S
  std::vector<double> max_naive;
  std::vector<double> max_frame_corrected;
  std::vector<double> qubit_ground_population;  // empty when the full space has no qubit
  double max_deviation = 0.0;                   // over observables and times, naive
  double predicted_scale = 0.0;                 // max|S| * max|O|; 0 without S
};

DeviationReport compare_dynamics(const Operator& H_full, const Operator& H_eff, const EmbedMap& embed,
                                 const State& full0, const State& eff0,
                                 const std::vector<ObservableSpec>& observables, const std::vector<double>& times,
                                 const std::optional<Operator>& generator = std::nullopt,
                                 const PropagateOptions& options = {});

struct EnsembleStats {
  std::vector<double> times;
  int n_traj = 0;
  double dt = 0.0;  // step actually used (<= requested)
  // Trajectory means of quantum expectations, x and p in x0 and p0 units.
  std::vector<double> mean_x, mean_p, mean_x2, mean_p2;
  std::vector<double> se_x, se_p, se_x2, se_p2;
  double max_leakage = 0.0;

  /// Ensemble standard deviations <x^2> - <x>^2 (and p) with delta-method errors.
  double dx(std::size_t k) const;
  double dp(std::size_t k) const;
  double dx_stderr(std::size_t k) const;
  double dp_stderr(std::size_t k) const;
};

struct EnsembleOptions {
  int threads = 0;  // 0: hardware concurrency; always capped by NMR_SQUEEZE_THREADS
  double leakage_limit = 1e-6;
  double step_guard = 1e-3;  // kappa*beta*dt and D*dt must not exceed this
};

/// Pump phase performs a Wiener walk; each step applies the parametric
/// Hamiltonian frozen at the current phase. Grid points are uniform on [0, tau].
EnsembleStats phase_noise_ensemble(const NoiseModel& noise, double kappa, const Space& space_b, const State& state0,
                                   double tau, int grid_points, const EnsembleOptions& options = {});

/// Quantized pump kappa (b^dag^2 a + a^dag b^2) from a coherent STLR state
/// beta e^{-i phi} against the classical-drive parametric Hamiltonian, both from
/// NMR vacuum, sampled at t = xi / (2 kappa beta).
struct ParametricComparison {
  std::vector<double> xi;
  std::vector<double> dx_quantum, dx_classical;
  std::vector<double> dp_quantum, dp_classical;
  std::vector<double> rel_error;  // max of the dx and dp relative differences
  std::vector<double> pump_depletion;  // 1 - <n_a> / beta^2
  double max_rel_error = 0.0;
  double max_leakage = 0.0;
};

ParametricComparison compare_parametric_approximation(double kappa, double beta, double phi, int n_stlr, int n_nmr,
                                                      const std::vector<double>& xi_values,
                                                      const PropagateOptions& options = {});

/// splitmix64 finalizer applied to (master_seed, index).
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

/// Worker count after applying NMR_SQUEEZE_THREADS.
int worker_threads(int requested);

}  // namespace nmrsq
