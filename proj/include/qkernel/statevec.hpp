#pragma once

#include <complex>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace qk {

using cplx = std::complex<double>;

/// Largest register the simulator will allocate by default.
inline constexpr int kMaxQubits = 24;

/// Dense pure state of an n-qubit register.
///
/// Qubit 0 is the least significant bit of the basis index, so amplitude b
/// belongs to the basis state whose qubit j is (b >> j) & 1.
class StateVector {
 public:
  /// |0...0> on n_qubits qubits. Throws ValidationError outside [1, max_qubits].
  explicit StateVector(int n_qubits, int max_qubits = kMaxQubits);

  /// Wraps existing amplitudes; length must be a power of two >= 2.
  static StateVector from_amplitudes(Eigen::VectorXcd amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }

  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::VectorXcd& amplitudes() { return amps_; }

  cplx operator[](std::size_t b) const { return amps_[static_cast<Eigen::Index>(b)]; }

  double norm() const { return amps_.norm(); }

 private:
  StateVector() = default;
  int n_qubits_ = 0;
  Eigen::VectorXcd amps_;
};

/// A 4x4 unitary acting on an ordered qubit pair (q1, q2).
///
/// Local basis index is bit(q1) + 2 * bit(q2), i.e. the matrix is laid out as
/// kron(A_q2, A_q1) with q1 the less significant factor.
class TwoQubitUnitary {
 public:
  /// Throws ValidationError unless U^dagger U = I within `tol` entrywise.
  explicit TwoQubitUnitary(const Eigen::Matrix4cd& matrix, double tol = 1e-12);

  const Eigen::Matrix4cd& matrix() const { return matrix_; }

 private:
  Eigen::Matrix4cd matrix_;
};

StateVector init_zero_state(int n_qubits, int max_qubits = kMaxQubits);

void apply_hadamard_all(StateVector& state);

/// Multiplies amplitude b by exp(-i * phases[b]).
void apply_diagonal_phase(StateVector& state, std::span<const double> phases);

/// Multiplies every amplitude by exp(-i * angle * z), z = +1 when `qubit` is 0
/// and -1 otherwise: the single-site operator exp(-i angle sigma^z).
void apply_z_rotation(StateVector& state, int qubit, double angle);

void apply_two_qubit_unitary(StateVector& state, const TwoQubitUnitary& u, int q1, int q2);

/// exp(-i t H) for Hermitian H, via a cyclic Jacobi eigendecomposition.
TwoQubitUnitary hermitian_expm_4x4(const Eigen::Matrix4cd& h, double t = 1.0);

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian 4x4.
struct Hermitian4Eigen {
  Eigen::Vector4d values;
  Eigen::Matrix4cd vectors;
};
Hermitian4Eigen jacobi_eigen_4x4(const Eigen::Matrix4cd& h);

/// <a|b>, conjugate-linear in a.
cplx inner_product(const StateVector& a, const StateVector& b);

}  // namespace qk
