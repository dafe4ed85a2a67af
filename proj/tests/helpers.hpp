#pragma once

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "qkernel/statevec.hpp"

namespace testutil {

inline Eigen::VectorXcd random_amplitudes(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(Eigen::Index{1} << n);
  for (auto& a : v) a = {g(rng), g(rng)};
  return v / v.norm();
}

inline qk::StateVector random_state(std::mt19937_64& rng, int n) {
  return qk::StateVector::from_amplitudes(random_amplitudes(rng, n));
}

inline Eigen::MatrixXcd random_unitary(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  return qr.householderQ();
}

inline Eigen::Matrix4cd random_hermitian4(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  Eigen::Matrix4cd a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = {g(rng), g(rng)};
  return scale * 0.5 * (a + a.adjoint());
}

template <class A, class B>
double max_diff(const A& a, const B& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testutil
