#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qk {

/// Dual solution of a binary soft-margin SVM on a precomputed kernel.
struct SvmModel {
  Eigen::VectorXd alphas;  // 0 <= alpha_i <= C
  double bias = 0.0;
  std::vector<Eigen::Index> support_indices;  // alpha_i > 0
  double C = 1.0;
  Eigen::VectorXd train_labels;

  std::int64_t iterations = 0;
  bool converged = false;
  /// Final maximal-violating-pair gap.
  double max_violation = 0.0;
};

struct SvmOptions {
  /// Stop when the maximal KKT violation drops below this.
  double tol = 1e-3;
  /// Iteration cap, in sweeps of N pair updates.
  std::int64_t max_sweeps = 100000;
  /// Reject kernels whose smallest eigenvalue is below -1e-8 * N.
  bool check_psd = true;
  /// When non-null, receives the dual objective after every update.
  std::vector<double>* objective_trace = nullptr;
};

/// SMO with maximal-violating-pair working-set selection. Throws on
/// single-class labels, non +-1 labels, C <= 0, and non-PSD kernels.
SvmModel svm_train(const Eigen::MatrixXd& k_train, const Eigen::VectorXd& y, double C,
                   const SvmOptions& opt = {});

/// sum_i alpha_i - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double svm_dual_objective(const Eigen::MatrixXd& k_train, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& alphas);

struct SvmPrediction {
  Eigen::VectorXd labels;    // +-1, ties go to +1
  Eigen::VectorXd decision;  // sum_j alpha_j y_j K[i, j] + bias
};

SvmPrediction svm_predict(const SvmModel& model, const Eigen::MatrixXd& k_cross);

/// Fraction of correctly signed predictions.
double svm_test_score(const SvmModel& model, const Eigen::MatrixXd& k_cross,
                      const Eigen::VectorXd& y_test);

/// Largest violation of the KKT conditions, measured on y_i f(x_i) against
/// the bound state of each alpha_i.
double svm_kkt_violation(const SvmModel& model, const Eigen::MatrixXd& k_train);

std::string svm_model_to_json(const SvmModel& model);
SvmModel svm_model_from_json(const std::string& text);

/// Log-spaced default C grid, 1e-2 ... 1e3 with 11 points.
std::vector<double> default_c_grid();

}  // namespace qk
