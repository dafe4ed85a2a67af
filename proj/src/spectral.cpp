#include "qkernel/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qkernel/error.hpp"

namespace qk {

namespace {

void require_symmetric(const Eigen::MatrixXd& k, const char* what) {
  if (k.rows() != k.cols() || k.rows() == 0) {
    throw ValidationError(std::string(what) + " must be square and non-empty");
  }
  const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ValidationError(std::string(what) + " is not symmetric");
  }
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen_sym(const Eigen::MatrixXd& k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  return es;
}

}  // namespace

void PsdFunctionConfig::validate() const {
  if (!(eps_rel >= 0.0) || !std::isfinite(eps_rel)) {
    throw ValidationError("eps_rel must be finite and >= 0");
  }
}

Eigen::MatrixXd mat_sqrt_psd(const Eigen::MatrixXd& k, const PsdFunctionConfig& cfg) {
  cfg.validate();
  require_symmetric(k, "matrix");
  const auto es = eigen_sym(k);
  Eigen::VectorXd root = es.eigenvalues();
  for (double& v : root) v = std::sqrt(std::max(v, 0.0));
  const Eigen::MatrixXd& v = es.eigenvectors();
  Eigen::MatrixXd out = v * root.asDiagonal() * v.transpose();
  return (out + out.transpose()) * 0.5;
}

Eigen::MatrixXd regularized_inverse(const Eigen::MatrixXd& k, const PsdFunctionConfig& cfg) {
  cfg.validate();
  require_symmetric(k, "matrix");
  const auto es = eigen_sym(k);
  Eigen::VectorXd lambda = es.eigenvalues();
  if (cfg.clip_negative && cfg.eps_rel > 0.0) {
    for (double& v : lambda) v = std::max(v, 0.0);
  }
  const double top = lambda.maxCoeff();
  const double jitter = cfg.eps_rel * std::max(top, 0.0);
  Eigen::VectorXd inv(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double denom = lambda[i] + jitter;
    if (!(denom > 0.0)) {
      throw NumericalError("matrix is singular (eigenvalue " + std::to_string(lambda[i]) +
                           ") and eps_rel = " + std::to_string(cfg.eps_rel));
    }
    inv[i] = 1.0 / denom;
  }
  const Eigen::MatrixXd& v = es.eigenvectors();
  Eigen::MatrixXd out = v * inv.asDiagonal() * v.transpose();
  return (out + out.transpose()) * 0.5;
}

double geometric_difference_with_sqrt(const Eigen::MatrixXd& k1, const Eigen::MatrixXd& sqrt_k2,
                                      const PsdFunctionConfig& cfg) {
  if (k1.rows() != sqrt_k2.rows() || k1.cols() != sqrt_k2.cols()) {
    throw ValidationError("kernel dimensions differ: " + std::to_string(k1.rows()) + " vs " +
                          std::to_string(sqrt_k2.rows()));
  }
  const Eigen::MatrixXd inv1 = regularized_inverse(k1, cfg);
  Eigen::MatrixXd m = sqrt_k2 * inv1 * sqrt_k2;
  m = (m + m.transpose()) * 0.5;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

double geometric_difference(const Eigen::MatrixXd& k1, const Eigen::MatrixXd& k2,
                            const PsdFunctionConfig& cfg) {
  if (k1.rows() != k2.rows() || k1.cols() != k2.cols()) {
    throw ValidationError("kernel dimensions differ: " + std::to_string(k1.rows()) + " vs " +
                          std::to_string(k2.rows()));
  }
  return geometric_difference_with_sqrt(k1, mat_sqrt_psd(k2, cfg), cfg);
}

double model_complexity(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                        const PsdFunctionConfig& cfg) {
  if (y.size() != k.rows()) {
    throw ValidationError("label vector length " + std::to_string(y.size()) +
                          " does not match kernel size " + std::to_string(k.rows()));
  }
  return y.dot(regularized_inverse(k, cfg) * y);
}

}  // namespace qk
