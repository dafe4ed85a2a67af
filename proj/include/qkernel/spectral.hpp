#pragma once

#include <Eigen/Dense>

namespace qk {

/// Regularization for PSD matrix functions.
struct PsdFunctionConfig {
  /// Inverse uses 1 / (lambda_i + eps_rel * lambda_max). 0 means exact.
  double eps_rel = 1e-10;
  /// Treat slightly negative eigenvalues as 0 in sqrt and inverse.
  bool clip_negative = true;

  void validate() const;
  bool operator==(const PsdFunctionConfig&) const = default;
};

/// V diag(sqrt(max(lambda_i, 0))) V^T.
Eigen::MatrixXd mat_sqrt_psd(const Eigen::MatrixXd& k, const PsdFunctionConfig& cfg = {});

/// V diag(1 / (lambda_i + eps_rel * lambda_max)) V^T. With eps_rel = 0 any
/// eigenvalue <= 0 is a NumericalError.
Eigen::MatrixXd regularized_inverse(const Eigen::MatrixXd& k, const PsdFunctionConfig& cfg = {});

/// g(K1 || K2) = sqrt(top eigenvalue of sqrt(K2) K1^-1 sqrt(K2)). In the
/// quantum-vs-classical comparison K1 is the classical kernel.
double geometric_difference(const Eigen::MatrixXd& k1, const Eigen::MatrixXd& k2,
                            const PsdFunctionConfig& cfg = {});

/// Same as geometric_difference when sqrt(K2) is already available; used by
/// grid searches that hold K2 fixed.
double geometric_difference_with_sqrt(const Eigen::MatrixXd& k1, const Eigen::MatrixXd& sqrt_k2,
                                      const PsdFunctionConfig& cfg = {});

/// s_K = y^T K^-1 y for targets y.
double model_complexity(const Eigen::MatrixXd& k, const Eigen::VectorXd& y,
                        const PsdFunctionConfig& cfg = {});

}  // namespace qk
