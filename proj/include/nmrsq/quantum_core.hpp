#pragma once

// Truncated Fock-space operator algebra: tensor-product spaces, sparse
// operators, dense states. Subsystem order is fixed by the Space and indices
// are row-major over it (first subsystem is the slowest index).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nmrsq {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kNormTolerance = 1e-10;

enum class SubsystemKind { Qubit, Boson };

struct Subsystem {
  std::string label;
  int dim = 0;
  SubsystemKind kind = SubsystemKind::Boson;

  bool operator==(const Subsystem&) const = default;
};

class Space {
 public:
  explicit Space(std::vector<Subsystem> subsystems);

  static Space qubit(std::string label = "q");
  static Space boson(std::string label, int dim);
  static Space product(const std::vector<Space>& factors);

  int dim() const noexcept { return total_dim_; }
  std::size_t size() const noexcept { return subsystems_.size(); }
  const Subsystem& operator[](std::size_t i) const { return subsystems_[i]; }
  const std::vector<Subsystem>& subsystems() const noexcept { return subsystems_; }

  /// Position of a subsystem; throws ErrorKind::UnknownSlot.
  std::size_t index_of(std::string_view label) const;
  bool has(std::string_view label) const noexcept;

  /// Product of dimensions of the subsystems after position i.
  int stride(std::size_t i) const;

  std::string describe() const;

  bool operator==(const Space& other) const { return subsystems_ == other.subsystems_; }

 private:
  std::vector<Subsystem> subsystems_;
  int total_dim_ = 1;
};

class Operator {
 public:
  /// Validates shape against the space, and Hermiticity when hinted.
  Operator(Space space, SparseMatrix matrix, bool hermitian_hint = false);

  static Operator identity(const Space& space);
  static Operator zero(const Space& space);
  static Operator from_dense(const Space& space, const DenseMatrix& m, bool hermitian_hint = false,
                             double drop_below = 0.0);

  const Space& space() const noexcept { return space_; }
  const SparseMatrix& matrix() const noexcept { return matrix_; }
  bool hermitian_hint() const noexcept { return hermitian_hint_; }
  int dim() const noexcept { return space_.dim(); }

  DenseMatrix dense() const { return DenseMatrix(matrix_); }
  Operator adjoint() const;
  Complex element(int row, int col) const { return matrix_.coeff(row, col); }

  /// max |A - A^dagger| over all entries.
  double hermiticity_residual() const;
  double max_abs() const;
  double frobenius_norm() const { return matrix_.norm(); }

  Operator operator+(const Operator& rhs) const;
  Operator operator-(const Operator& rhs) const;
  Operator operator*(const Operator& rhs) const;
  Operator operator-() const;
  Operator scaled(double s) const;
  Operator scaled(Complex s) const;

  Vector apply(const Vector& v) const { return matrix_ * v; }

 private:
  Space space_;
  SparseMatrix matrix_;
  bool hermitian_hint_ = false;
};

inline Operator operator*(double s, const Operator& op) { return op.scaled(s); }
inline Operator operator*(Complex s, const Operator& op) { return op.scaled(s); }

Operator commutator(const Operator& a, const Operator& b);

/// Hermiticity tolerance scaled by the operator's magnitude.
bool is_hermitian(const Operator& op, double tolerance = kHermitianTolerance);
bool is_anti_hermitian(const Operator& op, double tolerance = kHermitianTolerance);

class State {
 public:
  /// Requires unit norm to kNormTolerance.
  State(Space space, Vector amplitudes);

  /// Normalizes the vector first; throws on a zero vector.
  static State normalized(Space space, Vector amplitudes);

  const Space& space() const noexcept { return space_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }
  int dim() const noexcept { return space_.dim(); }
  double norm() const { return amplitudes_.norm(); }

 private:
  Space space_;
  Vector amplitudes_;
};

struct LadderPair {
  Operator lower;
  Operator raise;
};

/// Hard-truncated ladder operators on a single bosonic mode.
LadderPair ladder_ops(int dim, std::string label = "mode");

Operator number_op(int dim, std::string label = "mode");

// Charge-basis Pauli matrices on a qubit; index 0 is |N>, index 1 is |N+1>.
Operator sigma_x(std::string label = "q");
Operator sigma_y(std::string label = "q");
Operator sigma_z(std::string label = "q");

// Eigenbasis operators; index 0 is the ground state |0>, index 1 is |1>.
Operator rho_z(std::string label = "q");      // |0><0| - |1><1|
Operator rho_plus(std::string label = "q");   // |1><0|
Operator rho_minus(std::string label = "q");  // |0><1|
Operator projector(int level, std::string label = "q");

/// identity x ... x op x ... x identity, op placed at `slot`.
Operator embed_operator(const Operator& op, std::string_view slot, const Space& space);

/// Kronecker product in factor order; the space is the product of the factors' spaces.
Operator tensor(const std::vector<Operator>& factors);

struct FockNumber {
  int n = 0;
};
struct Coherent {
  Complex alpha{0.0, 0.0};
};
struct QubitLevel {
  int index = 0;
};
using SubsystemState = std::variant<FockNumber, Coherent, QubitLevel>;

/// Discarded Poisson weight above which a coherent state is rejected.
inline constexpr double kCoherentTailLimit = 1e-6;

Vector coherent_amplitudes(int dim, Complex alpha);
double coherent_tail_weight(int dim, Complex alpha);

/// Product state with one spec per subsystem in space order.
State make_state(const Space& space, const std::vector<SubsystemState>& specs);

State basis_state(const Space& space, const std::vector<int>& levels);

struct Moments {
  Complex mean;
  double variance = 0.0;
};

Complex expectation(const Operator& op, const State& state);
Moments expectation_and_variance(const Operator& op, const State& state);

/// Population in the top 10% of Fock levels of a bosonic subsystem (at least two levels).
double leakage(const State& state, std::string_view label);
double leakage(const Vector& amplitudes, const Space& space, std::string_view label);
/// Largest leakage over all bosonic subsystems.
double max_leakage(const Vector& amplitudes, const Space& space);

double fidelity(const State& a, const State& b);

}  // namespace nmrsq
