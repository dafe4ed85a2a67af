#pragma once

// Reference implementations used only by tests. They share no code with the
// library: circuits are built as dense 2^d x 2^d matrices from Kronecker
// products of Pauli matrices and exponentiated with a general eigensolver.

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Mat pauli(char p) {
  Mat m(2, 2);
  switch (p) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    case 'H': m << 1, 1, 1, -1; m /= std::sqrt(2.0); break;
    default: m = Mat::Identity(2, 2);
  }
  return m;
}

/// Operator acting with ops[q] on qubit q (identity where ops[q] == 'I').
/// Qubit 0 is the least significant bit, i.e. the rightmost factor.
inline Mat on_qubits(const std::vector<char>& ops) {
  Mat out = Mat::Identity(1, 1);
  for (int q = static_cast<int>(ops.size()) - 1; q >= 0; --q) out = kron(out, pauli(ops[q]));
  return out;
}

inline Mat single(char p, int q, int d) {
  std::vector<char> ops(d, 'I');
  ops[q] = p;
  return on_qubits(ops);
}

inline Mat pair(char p, int q1, char r, int q2, int d) {
  std::vector<char> ops(d, 'I');
  ops[q1] = p;
  ops[q2] = r;
  return on_qubits(ops);
}

/// exp(-i t H) for Hermitian H via a dense eigendecomposition.
inline Mat expm_herm(const Mat& h, double t = 1.0) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Vec ph(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) ph[i] = std::exp(cplx(0, -t * es.eigenvalues()[i]));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

inline Vec zero_state(int d) {
  Vec v = Vec::Zero(Eigen::Index{1} << d);
  v[0] = 1.0;
  return v;
}

inline Mat hadamard_layer(int d) {
  std::vector<char> ops(d, 'H');
  return on_qubits(ops);
}

/// Z-layer Hamiltonian sum_j lam x_j Z_j + sum_{j<k} lam^alpha x_j x_k Z_j Z_k.
inline Mat iqp_hamiltonian(const std::vector<double>& x, double lam, double alpha) {
  const int d = static_cast<int>(x.size());
  Mat h = Mat::Zero(Eigen::Index{1} << d, Eigen::Index{1} << d);
  for (int j = 0; j < d; ++j) {
    h += lam * x[j] * single('Z', j, d);
    for (int k = j + 1; k < d; ++k) h += std::pow(lam, alpha) * x[j] * x[k] * pair('Z', j, 'Z', k, d);
  }
  return h;
}

inline Vec iqp_state(const std::vector<double>& x, double lam, double alpha) {
  const int d = static_cast<int>(x.size());
  const Mat uz = expm_herm(iqp_hamiltonian(x, lam, alpha));
  const Mat h = hadamard_layer(d);
  return uz * h * uz * h * zero_state(d);
}

inline Vec classical_iqp_state(const std::vector<double>& x, double lam, double alpha) {
  const int d = static_cast<int>(x.size());
  return expm_herm(iqp_hamiltonian(x, lam, alpha)) * hadamard_layer(d) * zero_state(d);
}

inline Vec product_z_state(const std::vector<double>& x, double lam) {
  const int d = static_cast<int>(x.size());
  Mat h = Mat::Zero(Eigen::Index{1} << d, Eigen::Index{1} << d);
  for (int j = 0; j < d; ++j) h += lam * x[j] * single('Z', j, d);
  return expm_herm(h) * zero_state(d);
}

/// Layered Heisenberg chain: each layer applies, for j = 0..d-1 in order,
/// exp(-i [S_j . S_{j+1} + lam x_j Z_j]) with S = sigma / 2. With an open
/// boundary the last site has only the field term.
inline Vec heisenberg_state(const std::vector<double>& x, double lam, int layers, bool periodic) {
  const int d = static_cast<int>(x.size());
  Mat layer = Mat::Identity(Eigen::Index{1} << d, Eigen::Index{1} << d);
  for (int j = 0; j < d; ++j) {
    Mat h = lam * x[j] * single('Z', j, d);
    if (j + 1 < d || periodic) {
      const int k = (j + 1) % d;
      h += 0.25 * (pair('X', j, 'X', k, d) + pair('Y', j, 'Y', k, d) + pair('Z', j, 'Z', k, d));
    }
    layer = expm_herm(h) * layer;
  }
  Vec psi = zero_state(d);
  for (int l = 0; l < layers; ++l) psi = layer * psi;
  return psi;
}

/// ClassicalIQP fidelity by direct summation over basis states:
/// |2^-d sum_b exp(-i (phi_x(b) - phi_y(b)))|^2.
inline double classical_iqp_kernel(const std::vector<double>& x, const std::vector<double>& y,
                                   double lam, double alpha) {
  const int d = static_cast<int>(x.size());
  auto phase = [&](const std::vector<double>& v, unsigned b) {
    double p = 0.0;
    for (int j = 0; j < d; ++j) {
      const double sj = ((b >> j) & 1u) ? -1.0 : 1.0;
      p += lam * v[j] * sj;
      for (int k = j + 1; k < d; ++k) {
        const double sk = ((b >> k) & 1u) ? -1.0 : 1.0;
        p += std::pow(lam, alpha) * v[j] * v[k] * sj * sk;
      }
    }
    return p;
  };
  cplx acc = 0.0;
  for (unsigned b = 0; b < (1u << d); ++b) acc += std::exp(cplx(0, -(phase(x, b) - phase(y, b))));
  acc /= static_cast<double>(1u << d);
  return std::norm(acc);
}

/// Exact soft-margin SVM dual by enumerating every assignment of each alpha
/// to {0, C, free}. For each assignment with at least one free variable the
/// free alphas and bias solve
///   sum_j Q_ij alpha_j + y_i b = 1  (i free),   sum_i y_i alpha_i = 0,
/// and the assignment is accepted when the solution is feasible and every
/// bound variable satisfies its KKT inequality. Returns nullopt if no
/// assignment with a free variable is optimal.
struct QpSolution {
  Eigen::VectorXd alphas;
  double bias = 0.0;
  Eigen::VectorXd decision;
};

inline std::optional<QpSolution> svm_qp(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double C) {
  const Eigen::Index n = k.rows();
  std::vector<int> state(static_cast<std::size_t>(n), 0);
  const double feas = 1e-9 * std::max(1.0, C);
  for (;;) {
    std::vector<Eigen::Index> free_idx;
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (state[static_cast<std::size_t>(i)] == 1) alpha[i] = C;
      if (state[static_cast<std::size_t>(i)] == 2) free_idx.push_back(i);
    }
    if (!free_idx.empty()) {
      const auto m = static_cast<Eigen::Index>(free_idx.size());
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + 1, m + 1);
      Eigen::VectorXd rhs(m + 1);
      for (Eigen::Index r = 0; r < m; ++r) {
        const Eigen::Index i = free_idx[static_cast<std::size_t>(r)];
        double bound_part = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) bound_part += y[i] * y[j] * k(i, j) * alpha[j];
        for (Eigen::Index c = 0; c < m; ++c) {
          const Eigen::Index j = free_idx[static_cast<std::size_t>(c)];
          a(r, c) = y[i] * y[j] * k(i, j);
        }
        a(r, m) = y[i];
        rhs[r] = 1.0 - bound_part;
      }
      double bound_sum = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) bound_sum += y[j] * alpha[j];
      for (Eigen::Index c = 0; c < m; ++c) a(m, c) = y[free_idx[static_cast<std::size_t>(c)]];
      rhs[m] = -bound_sum;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (lu.isInvertible()) {
        const Eigen::VectorXd sol = lu.solve(rhs);
        bool ok = true;
        for (Eigen::Index c = 0; c < m && ok; ++c) {
          const double v = sol[c];
          ok = v > feas && v < C - feas;
          alpha[free_idx[static_cast<std::size_t>(c)]] = v;
        }
        if (ok) {
          const double b = sol[m];
          const Eigen::VectorXd f = k * alpha.cwiseProduct(y) + Eigen::VectorXd::Constant(n, b);
          for (Eigen::Index i = 0; i < n && ok; ++i) {
            const double margin = y[i] * f[i];
            const int s = state[static_cast<std::size_t>(i)];
            if (s == 0) ok = margin >= 1.0 - 1e-9;
            if (s == 1) ok = margin <= 1.0 + 1e-9;
          }
          if (ok) return QpSolution{alpha, b, f};
        }
      }
    }
    std::size_t pos = 0;
    while (pos < state.size() && state[pos] == 2) state[pos++] = 0;
    if (pos == state.size()) return std::nullopt;
    ++state[pos];
  }
}

/// Composite Simpson rule on [a, b] with `n` (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// E|x|^p under the density beta / (2 Gamma(1/beta)) exp(-|x|^beta), by
/// numerical integration in u = log|x|.
inline double gennorm_abs_moment(double beta, double p) {
  const double c = beta / (2.0 * std::tgamma(1.0 / beta));
  const auto integrand = [&](double u) {
    const double x = std::exp(u);
    const double xb = std::pow(x, beta);
    if (xb > 800.0) return 0.0;
    return 2.0 * c * std::pow(x, p) * std::exp(-xb) * x;
  };
  const double hi = std::log(800.0) / beta + 1.0;
  return simpson(integrand, -60.0, hi, 400000);
}

/// Random symmetric positive-definite matrix with eigenvalues in [lo, hi].
inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd q = qr.householderQ();
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  Eigen::VectorXd ev(n);
  for (Eigen::Index i = 0; i < n; ++i) ev[i] = std::exp(u(rng));
  Eigen::MatrixXd k = q * ev.asDiagonal() * q.transpose();
  return 0.5 * (k + k.transpose());
}

}  // namespace oracle
