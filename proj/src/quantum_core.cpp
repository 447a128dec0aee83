#include "nmrsq/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nmrsq/error.hpp"

namespace nmrsq {

namespace {

using Triplet = Eigen::Triplet<Complex>;

SparseMatrix from_triplets(int dim, const std::vector<Triplet>& t) {
  SparseMatrix m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

void require_same_space(const Space& a, const Space& b, const char* what) {
  if (!(a == b)) {
    throw Error(ErrorKind::SpaceMismatch,
                std::string(what) + ": space mismatch " + a.describe() + " vs " + b.describe());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Space

Space::Space(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
  if (subsystems_.empty()) throw Error(ErrorKind::InvalidDimension, "space needs at least one subsystem");
  std::set<std::string> labels;
  long long total = 1;
  for (const auto& s : subsystems_) {
    if (s.dim < 2) {
      throw Error(ErrorKind::InvalidDimension,
                  "subsystem '" + s.label + "' has dimension " + std::to_string(s.dim) + " < 2");
    }
    if (s.kind == SubsystemKind::Qubit && s.dim != 2) {
      throw Error(ErrorKind::InvalidDimension, "qubit subsystem '" + s.label + "' must have dimension 2");
    }
    if (!labels.insert(s.label).second) {
      throw Error(ErrorKind::InvalidDimension, "duplicate subsystem label '" + s.label + "'");
    }
    total *= s.dim;
    if (total > (1LL << 30)) throw Error(ErrorKind::InvalidDimension, "space too large");
  }
  total_dim_ = static_cast<int>(total);
}

Space Space::qubit(std::string label) { return Space({{std::move(label), 2, SubsystemKind::Qubit}}); }

Space Space::boson(std::string label, int dim) {
  return Space({{std::move(label), dim, SubsystemKind::Boson}});
}

Space Space::product(const std::vector<Space>& factors) {
  std::vector<Subsystem> all;
  for (const auto& f : factors) all.insert(all.end(), f.subsystems().begin(), f.subsystems().end());
  return Space(std::move(all));
}

std::size_t Space::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < subsystems_.size(); ++i) {
    if (subsystems_[i].label == label) return i;
  }
  throw Error(ErrorKind::UnknownSlot, "no subsystem labelled '" + std::string(label) + "' in " + describe());
}

bool Space::has(std::string_view label) const noexcept {
  return std::any_of(subsystems_.begin(), subsystems_.end(),
                     [&](const Subsystem& s) { return s.label == label; });
}

int Space::stride(std::size_t i) const {
  int s = 1;
  for (std::size_t j = i + 1; j < subsystems_.size(); ++j) s *= subsystems_[j].dim;
  return s;
}

std::string Space::describe() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < subsystems_.size(); ++i) {
    if (i) os << " x ";
    os << subsystems_[i].label << ':' << subsystems_[i].dim;
  }
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------------------
// Operator

Operator::Operator(Space space, SparseMatrix matrix, bool hermitian_hint)
    : space_(std::move(space)), matrix_(std::move(matrix)), hermitian_hint_(hermitian_hint) {
  if (matrix_.rows() != space_.dim() || matrix_.cols() != space_.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "operator of size " + std::to_string(matrix_.rows()) + "x" +
                                                  std::to_string(matrix_.cols()) + " does not match space " +
                                                  space_.describe());
  }
  matrix_.makeCompressed();
  if (hermitian_hint_ && !is_hermitian(*this)) {
    throw Error(ErrorKind::NotHermitian,
                "operator flagged Hermitian has residual " + std::to_string(hermiticity_residual()));
  }
}

Operator Operator::identity(const Space& space) {
  SparseMatrix m(space.dim(), space.dim());
  m.setIdentity();
  return Operator(space, std::move(m), true);
}

Operator Operator::zero(const Space& space) {
  return Operator(space, SparseMatrix(space.dim(), space.dim()), true);
}

Operator Operator::from_dense(const Space& space, const DenseMatrix& m, bool hermitian_hint, double drop_below) {
  std::vector<Triplet> t;
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < m.rows(); ++r) {
      if (std::abs(m(r, c)) > drop_below && m(r, c) != Complex(0.0)) t.emplace_back(r, c, m(r, c));
    }
  }
  if (m.rows() != space.dim() || m.cols() != space.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "dense matrix does not match space " + space.describe());
  }
  return Operator(space, from_triplets(space.dim(), t), hermitian_hint);
}

Operator Operator::adjoint() const {
  SparseMatrix a = matrix_.adjoint();
  return Operator(space_, std::move(a), hermitian_hint_);
}

double Operator::hermiticity_residual() const {
  SparseMatrix diff = matrix_ - SparseMatrix(matrix_.adjoint());
  double r = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) r = std::max(r, std::abs(it.value()));
  }
  return r;
}

double Operator::max_abs() const {
  double r = 0.0;
  for (int k = 0; k < matrix_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) r = std::max(r, std::abs(it.value()));
  }
  return r;
}

Operator Operator::operator+(const Operator& rhs) const {
  require_same_space(space_, rhs.space_, "operator+");
  SparseMatrix m = matrix_ + rhs.matrix_;
  return Operator(space_, std::move(m), hermitian_hint_ && rhs.hermitian_hint_);
}

Operator Operator::operator-(const Operator& rhs) const {
  require_same_space(space_, rhs.space_, "operator-");
  SparseMatrix m = matrix_ - rhs.matrix_;
  return Operator(space_, std::move(m), hermitian_hint_ && rhs.hermitian_hint_);
}

Operator Operator::operator*(const Operator& rhs) const {
  require_same_space(space_, rhs.space_, "operator*");
  SparseMatrix m = matrix_ * rhs.matrix_;
  return Operator(space_, std::move(m), false);
}

Operator Operator::operator-() const { return scaled(-1.0); }

Operator Operator::scaled(double s) const {
  SparseMatrix m = matrix_ * Complex(s, 0.0);
  return Operator(space_, std::move(m), hermitian_hint_);
}

Operator Operator::scaled(Complex s) const {
  SparseMatrix m = matrix_ * s;
  return Operator(space_, std::move(m), hermitian_hint_ && s.imag() == 0.0);
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

bool is_hermitian(const Operator& op, double tolerance) {
  return op.hermiticity_residual() <= tolerance * std::max(1.0, op.max_abs());
}

bool is_anti_hermitian(const Operator& op, double tolerance) {
  SparseMatrix sum = op.matrix() + SparseMatrix(op.matrix().adjoint());
  double r = 0.0;
  for (int k = 0; k < sum.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(sum, k); it; ++it) r = std::max(r, std::abs(it.value()));
  }
  return r <= tolerance * std::max(1.0, op.max_abs());
}

// ---------------------------------------------------------------------------
// State

State::State(Space space, Vector amplitudes) : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != space_.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "state length " + std::to_string(amplitudes_.size()) +
                                                  " does not match space " + space_.describe());
  }
  if (std::abs(amplitudes_.norm() - 1.0) > kNormTolerance) {
    throw Error(ErrorKind::PropagationAccuracy, "state norm " + std::to_string(amplitudes_.norm()) + " is not 1");
  }
}

State State::normalized(Space space, Vector amplitudes) {
  const double n = amplitudes.norm();
  if (n == 0.0) throw Error(ErrorKind::Domain, "cannot normalize a zero vector");
  amplitudes /= n;
  return State(std::move(space), std::move(amplitudes));
}

// ---------------------------------------------------------------------------
// Elementary operators

LadderPair ladder_ops(int dim, std::string label) {
  if (dim < 2) throw Error(ErrorKind::InvalidDimension, "ladder operators need dim >= 2, got " + std::to_string(dim));
  Space space = Space::boson(std::move(label), dim);
  std::vector<Triplet> t;
  t.reserve(dim - 1);
  for (int n = 1; n < dim; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  SparseMatrix lower = from_triplets(dim, t);
  SparseMatrix raise = lower.adjoint();
  return {Operator(space, std::move(lower)), Operator(space, std::move(raise))};
}

Operator number_op(int dim, std::string label) {
  if (dim < 2) throw Error(ErrorKind::InvalidDimension, "number operator needs dim >= 2");
  std::vector<Triplet> t;
  for (int n = 1; n < dim; ++n) t.emplace_back(n, n, static_cast<double>(n));
  return Operator(Space::boson(std::move(label), dim), from_triplets(dim, t), true);
}

namespace {

Operator qubit_op(std::string label, Complex m00, Complex m01, Complex m10, Complex m11, bool hermitian) {
  std::vector<Triplet> t;
  if (m00 != Complex(0.0)) t.emplace_back(0, 0, m00);
  if (m01 != Complex(0.0)) t.emplace_back(0, 1, m01);
  if (m10 != Complex(0.0)) t.emplace_back(1, 0, m10);
  if (m11 != Complex(0.0)) t.emplace_back(1, 1, m11);
  return Operator(Space::qubit(std::move(label)), from_triplets(2, t), hermitian);
}

}  // namespace

Operator sigma_x(std::string label) { return qubit_op(std::move(label), 0.0, 1.0, 1.0, 0.0, true); }
Operator sigma_y(std::string label) {
  return qubit_op(std::move(label), 0.0, Complex(0, -1), Complex(0, 1), 0.0, true);
}
Operator sigma_z(std::string label) { return qubit_op(std::move(label), 1.0, 0.0, 0.0, -1.0, true); }
Operator rho_z(std::string label) { return qubit_op(std::move(label), 1.0, 0.0, 0.0, -1.0, true); }
Operator rho_plus(std::string label) { return qubit_op(std::move(label), 0.0, 0.0, 1.0, 0.0, false); }
Operator rho_minus(std::string label) { return qubit_op(std::move(label), 0.0, 1.0, 0.0, 0.0, false); }

Operator projector(int level, std::string label) {
  if (level != 0 && level != 1) throw Error(ErrorKind::Domain, "qubit level must be 0 or 1");
  return level == 0 ? qubit_op(std::move(label), 1.0, 0.0, 0.0, 0.0, true)
                    : qubit_op(std::move(label), 0.0, 0.0, 0.0, 1.0, true);
}

Operator embed_operator(const Operator& op, std::string_view slot, const Space& space) {
  if (op.space().size() != 1) {
    throw Error(ErrorKind::DimensionMismatch, "embed_operator expects a single-subsystem operator");
  }
  const std::size_t pos = space.index_of(slot);
  const int d = space[pos].dim;
  if (op.dim() != d) {
    throw Error(ErrorKind::DimensionMismatch, "operator dimension " + std::to_string(op.dim()) +
                                                  " does not match subsystem '" + std::string(slot) +
                                                  "' of dimension " + std::to_string(d));
  }
  const int inner = space.stride(pos);
  const int outer = space.dim() / (d * inner);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(op.matrix().nonZeros()) * outer * inner);
  for (int k = 0; k < op.matrix().outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(op.matrix(), k); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      for (int o = 0; o < outer; ++o) {
        const int base = o * d * inner;
        for (int i = 0; i < inner; ++i) t.emplace_back(base + r * inner + i, base + c * inner + i, it.value());
      }
    }
  }
  return Operator(space, from_triplets(space.dim(), t), op.hermitian_hint());
}

Operator tensor(const std::vector<Operator>& factors) {
  if (factors.empty()) throw Error(ErrorKind::InvalidDimension, "tensor of zero factors");
  std::vector<Space> spaces;
  for (const auto& f : factors) spaces.push_back(f.space());
  Space space = Space::product(spaces);
  SparseMatrix acc = factors.front().matrix();
  bool herm = factors.front().hermitian_hint();
  for (std::size_t f = 1; f < factors.size(); ++f) {
    const SparseMatrix& b = factors[f].matrix();
    herm = herm && factors[f].hermitian_hint();
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(acc.nonZeros() * b.nonZeros()));
    for (int ka = 0; ka < acc.outerSize(); ++ka) {
      for (SparseMatrix::InnerIterator ia(acc, ka); ia; ++ia) {
        for (int kb = 0; kb < b.outerSize(); ++kb) {
          for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib) {
            t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(), ia.value() * ib.value());
          }
        }
      }
    }
    SparseMatrix next(acc.rows() * b.rows(), acc.cols() * b.cols());
    next.setFromTriplets(t.begin(), t.end());
    acc = std::move(next);
  }
  return Operator(space, std::move(acc), herm);
}

// ---------------------------------------------------------------------------
// States

Vector coherent_amplitudes(int dim, Complex alpha) {
  Vector v(dim);
  const double a2 = std::norm(alpha);
  // Recurrence c_n = c_{n-1} alpha / sqrt(n) avoids overflowing factorials.
  v(0) = std::exp(-0.5 * a2);
  for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return v;
}

double coherent_tail_weight(int dim, Complex alpha) {
  const double kept = coherent_amplitudes(dim, alpha).squaredNorm();
  return std::max(0.0, 1.0 - kept);
}

State make_state(const Space& space, const std::vector<SubsystemState>& specs) {
  if (specs.size() != space.size()) {
    throw Error(ErrorKind::DimensionMismatch, "make_state needs one spec per subsystem of " + space.describe());
  }
  Vector acc = Vector::Ones(1);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const Subsystem& sub = space[i];
    Vector local = Vector::Zero(sub.dim);
    if (const auto* fock = std::get_if<FockNumber>(&specs[i])) {
      if (sub.kind != SubsystemKind::Boson) throw Error(ErrorKind::Domain, "Fock state on qubit '" + sub.label + "'");
      if (fock->n < 0 || fock->n >= sub.dim) {
        throw Error(ErrorKind::TruncationTooSmall, "Fock level " + std::to_string(fock->n) +
                                                       " does not fit subsystem '" + sub.label + "' of dimension " +
                                                       std::to_string(sub.dim));
      }
      local(fock->n) = 1.0;
    } else if (const auto* coh = std::get_if<Coherent>(&specs[i])) {
      if (sub.kind != SubsystemKind::Boson) {
        throw Error(ErrorKind::Domain, "coherent state on qubit '" + sub.label + "'");
      }
      const double tail = coherent_tail_weight(sub.dim, coh->alpha);
      if (tail > kCoherentTailLimit) {
        throw Error(ErrorKind::TruncationTooSmall,
                    "coherent state |alpha|^2 = " + std::to_string(std::norm(coh->alpha)) + " loses weight " +
                        std::to_string(tail) + " in subsystem '" + sub.label + "' of dimension " +
                        std::to_string(sub.dim));
      }
      local = coherent_amplitudes(sub.dim, coh->alpha);
      local.normalize();
    } else {
      const auto& q = std::get<QubitLevel>(specs[i]);
      if (q.index < 0 || q.index >= sub.dim) {
        throw Error(ErrorKind::Domain, "level " + std::to_string(q.index) + " out of range for '" + sub.label + "'");
      }
      local(q.index) = 1.0;
    }
    Vector next(acc.size() * local.size());
    for (Eigen::Index a = 0; a < acc.size(); ++a) next.segment(a * local.size(), local.size()) = acc(a) * local;
    acc = std::move(next);
  }
  return State::normalized(space, std::move(acc));
}

State basis_state(const Space& space, const std::vector<int>& levels) {
  if (levels.size() != space.size()) throw Error(ErrorKind::DimensionMismatch, "basis_state needs one level per subsystem");
  int index = 0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0 || levels[i] >= space[i].dim) {
      throw Error(ErrorKind::TruncationTooSmall, "level out of range for '" + space[i].label + "'");
    }
    index = index * space[i].dim + levels[i];
  }
  Vector v = Vector::Zero(space.dim());
  v(index) = 1.0;
  return State(space, std::move(v));
}

Complex expectation(const Operator& op, const State& state) {
  require_same_space(op.space(), state.space(), "expectation");
  return state.amplitudes().dot(op.matrix() * state.amplitudes());
}

Moments expectation_and_variance(const Operator& op, const State& state) {
  require_same_space(op.space(), state.space(), "expectation_and_variance");
  if (!op.hermitian_hint()) throw Error(ErrorKind::NotHermitian, "variance requested for a non-Hermitian operator");
  const Vector av = op.matrix() * state.amplitudes();
  const Complex mean = state.amplitudes().dot(av);
  double var = av.squaredNorm() - std::norm(mean);
  if (var < 0.0 && var >= -1e-12) var = 0.0;
  return {mean, var};
}

double leakage(const Vector& amplitudes, const Space& space, std::string_view label) {
  const std::size_t pos = space.index_of(label);
  const int d = space[pos].dim;
  const int inner = space.stride(pos);
  // At least two levels: pair processes populate one parity only and would hide behind a single top level.
  const int top = std::min(d, std::max(2, static_cast<int>(std::ceil(0.1 * d))));
  double p = 0.0;
  for (Eigen::Index i = 0; i < amplitudes.size(); ++i) {
    const int level = static_cast<int>((i / inner) % d);
    if (level >= d - top) p += std::norm(amplitudes(i));
  }
  return p;
}

double leakage(const State& state, std::string_view label) {
  return leakage(state.amplitudes(), state.space(), label);
}

double max_leakage(const Vector& amplitudes, const Space& space) {
  double worst = 0.0;
  for (const auto& s : space.subsystems()) {
    if (s.kind == SubsystemKind::Boson) worst = std::max(worst, leakage(amplitudes, space, s.label));
  }
  return worst;
}

double fidelity(const State& a, const State& b) {
  require_same_space(a.space(), b.space(), "fidelity");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

}  // namespace nmrsq
