#include "qkernel/statevec.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "qkernel/error.hpp"

namespace qk {

namespace {

void check_qubit(const StateVector& s, int q) {
  if (q < 0 || q >= s.n_qubits()) {
    throw ValidationError("qubit index " + std::to_string(q) + " out of range for " +
                          std::to_string(s.n_qubits()) + "-qubit state");
  }
}

double max_abs(const Eigen::Matrix4cd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

StateVector::StateVector(int n_qubits, int max_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > max_qubits) {
    throw ValidationError("qubit count " + std::to_string(n_qubits) + " outside [1, " +
                          std::to_string(max_qubits) + "]");
  }
  amps_ = Eigen::VectorXcd::Zero(Eigen::Index{1} << n_qubits);
  amps_[0] = 1.0;
}

StateVector StateVector::from_amplitudes(Eigen::VectorXcd amplitudes) {
  const auto len = static_cast<std::size_t>(amplitudes.size());
  if (len < 2 || (len & (len - 1)) != 0) {
    throw ValidationError("amplitude vector length " + std::to_string(len) +
                          " is not a power of two >= 2");
  }
  StateVector s;
  s.n_qubits_ = std::countr_zero(len);
  s.amps_ = std::move(amplitudes);
  return s;
}

TwoQubitUnitary::TwoQubitUnitary(const Eigen::Matrix4cd& matrix, double tol) : matrix_(matrix) {
  const Eigen::Matrix4cd gram = matrix.adjoint() * matrix - Eigen::Matrix4cd::Identity();
  if (max_abs(gram) > tol) {
    throw ValidationError("matrix is not unitary (max |U^dag U - I| = " +
                          std::to_string(max_abs(gram)) + ")");
  }
}

StateVector init_zero_state(int n_qubits, int max_qubits) {
  return StateVector(n_qubits, max_qubits);
}

void apply_hadamard_all(StateVector& state) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  cplx* a = state.amplitudes().data();
  const std::size_t dim = state.dim();
  for (int q = 0; q < state.n_qubits(); ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t block = 0; block < dim; block += 2 * stride) {
      for (std::size_t i = block; i < block + stride; ++i) {
        const cplx lo = a[i];
        const cplx hi = a[i + stride];
        a[i] = (lo + hi) * inv_sqrt2;
        a[i + stride] = (lo - hi) * inv_sqrt2;
      }
    }
  }
}

void apply_diagonal_phase(StateVector& state, std::span<const double> phases) {
  if (phases.size() != state.dim()) {
    throw ValidationError("phase vector length " + std::to_string(phases.size()) +
                          " does not match state dimension " + std::to_string(state.dim()));
  }
  cplx* a = state.amplitudes().data();
  for (std::size_t b = 0; b < phases.size(); ++b) {
    a[b] *= cplx(std::cos(phases[b]), -std::sin(phases[b]));
  }
}

void apply_z_rotation(StateVector& state, int qubit, double angle) {
  check_qubit(state, qubit);
  const cplx up(std::cos(angle), -std::sin(angle));
  const cplx down = std::conj(up);
  const std::size_t mask = std::size_t{1} << qubit;
  cplx* a = state.amplitudes().data();
  for (std::size_t b = 0; b < state.dim(); ++b) a[b] *= (b & mask) ? down : up;
}

void apply_two_qubit_unitary(StateVector& state, const TwoQubitUnitary& u, int q1, int q2) {
  check_qubit(state, q1);
  check_qubit(state, q2);
  if (q1 == q2) throw ValidationError("two-qubit unitary needs distinct qubits");

  const std::size_t m1 = std::size_t{1} << q1;
  const std::size_t m2 = std::size_t{1} << q2;
  const std::size_t lo = std::min(m1, m2);
  const std::size_t hi = std::max(m1, m2);
  const Eigen::Matrix4cd& g = u.matrix();
  cplx* a = state.amplitudes().data();
  const std::size_t configs = state.dim() >> 2;

  for (std::size_t c = 0; c < configs; ++c) {
    // Spread c over the bit positions other than q1 and q2.
    std::size_t base = c;
    base = ((base & ~(lo - 1)) << 1) | (base & (lo - 1));
    base = ((base & ~(hi - 1)) << 1) | (base & (hi - 1));
    const std::size_t idx[4] = {base, base | m1, base | m2, base | m1 | m2};
    const cplx v[4] = {a[idx[0]], a[idx[1]], a[idx[2]], a[idx[3]]};
    for (int r = 0; r < 4; ++r) {
      a[idx[r]] = g(r, 0) * v[0] + g(r, 1) * v[1] + g(r, 2) * v[2] + g(r, 3) * v[3];
    }
  }
}

Hermitian4Eigen jacobi_eigen_4x4(const Eigen::Matrix4cd& h) {
  const double scale = std::max(1.0, max_abs(h));
  if (max_abs(h - h.adjoint()) > 1e-12 * scale) {
    throw ValidationError("matrix is not Hermitian");
  }
  Eigen::Matrix4cd a = (h + h.adjoint()) * 0.5;
  Eigen::Matrix4cd v = Eigen::Matrix4cd::Identity();

  auto off_norm2 = [&] {
    double s = 0.0;
    for (int p = 0; p < 4; ++p)
      for (int q = p + 1; q < 4; ++q) s += std::norm(a(p, q));
    return s;
  };
  const double total2 = a.squaredNorm();

  for (int sweep = 0; sweep < 64; ++sweep) {
    if (off_norm2() <= 1e-34 * total2 || off_norm2() == 0.0) break;
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        const double r = std::abs(a(p, q));
        if (r == 0.0) continue;
        // Phase column q so that a(p, q) becomes the real number r, then do
        // a real Jacobi rotation in the (p, q) plane.
        const cplx w = std::conj(a(p, q)) / r;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * r);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        Eigen::Matrix4cd g = Eigen::Matrix4cd::Identity();
        g(p, p) = c;
        g(p, q) = s;
        g(q, p) = -s * w;
        g(q, q) = c * w;
        a = g.adjoint() * a * g;
        a(p, q) = a(q, p) = 0.0;
        v = v * g;
      }
    }
  }
  if (off_norm2() > 1e-24 * std::max(total2, 1e-300)) {
    throw NumericalError("4x4 Jacobi eigensolver did not converge");
  }

  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
  Hermitian4Eigen out;
  for (int k = 0; k < 4; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

TwoQubitUnitary hermitian_expm_4x4(const Eigen::Matrix4cd& h, double t) {
  const Hermitian4Eigen eig = jacobi_eigen_4x4(h);
  Eigen::Vector4cd phases;
  for (int k = 0; k < 4; ++k) phases[k] = std::polar(1.0, -t * eig.values[k]);
  return TwoQubitUnitary(eig.vectors * phases.asDiagonal() * eig.vectors.adjoint());
}

cplx inner_product(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) {
    throw ValidationError("inner product of states with dimensions " + std::to_string(a.dim()) +
                          " and " + std::to_string(b.dim()));
  }
  return a.amplitudes().dot(b.amplitudes());
}

}  // namespace qk
