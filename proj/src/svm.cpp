#include "qkernel/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include "json.hpp"

#include "qkernel/data.hpp"
#include "qkernel/error.hpp"

namespace qk {

namespace {

constexpr double kTau = 1e-12;

void validate_labels(const Eigen::VectorXd& y) {
  bool pos = false, neg = false;
  for (double v : y) {
    if (v == 1.0) pos = true;
    else if (v == -1.0) neg = true;
    else throw ValidationError("SVM labels must be +1 or -1");
  }
  if (!pos || !neg) throw ValidationError("SVM training needs both label classes");
}

}  // namespace

double svm_dual_objective(const Eigen::MatrixXd& k_train, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& alphas) {
  const Eigen::VectorXd ay = alphas.cwiseProduct(y);
  return alphas.sum() - 0.5 * ay.dot(k_train * ay);
}

SvmModel svm_train(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double C,
                   const SvmOptions& opt) {
  const Eigen::Index n = k.rows();
  if (k.cols() != n || y.size() != n) {
    throw ValidationError("kernel is " + std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                          " but there are " + std::to_string(y.size()) + " labels");
  }
  if (!(C > 0.0) || !std::isfinite(C)) throw ValidationError("C must be positive and finite");
  if (!(opt.tol > 0.0)) throw ValidationError("tolerance must be positive");
  validate_labels(y);
  if (opt.check_psd) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("kernel eigensolver failed");
    if (es.eigenvalues()[0] < -1e-8 * static_cast<double>(n)) {
      throw NumericalError("training kernel is not positive semidefinite (min eigenvalue " +
                           std::to_string(es.eigenvalues()[0]) + ")");
    }
  }

  // Minimise 1/2 a^T Q a - e^T a with Q_ij = y_i y_j K_ij; grad = Q a - e.
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);
  auto in_up = [&](Eigen::Index t) { return y[t] > 0 ? alpha[t] < C : alpha[t] > 0; };
  auto in_low = [&](Eigen::Index t) { return y[t] > 0 ? alpha[t] > 0 : alpha[t] < C; };
  auto dual = [&] { return 0.5 * (alpha.array() * (1.0 - grad.array())).sum(); };

  SvmModel model;
  model.C = C;
  model.train_labels = y;
  const std::int64_t max_iter = opt.max_sweeps * static_cast<std::int64_t>(n);
  double gap = std::numeric_limits<double>::infinity();
  double up_max = 0.0, low_min = 0.0;

  std::int64_t iter = 0;
  for (;; ++iter) {
    Eigen::Index i = -1, j = -1;
    up_max = -std::numeric_limits<double>::infinity();
    low_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > up_max) {
        up_max = v;
        i = t;
      }
      if (in_low(t) && v < low_min) {
        low_min = v;
        j = t;
      }
    }
    gap = up_max - low_min;
    if (i < 0 || j < 0 || gap < opt.tol) {
      model.converged = true;
      break;
    }
    if (iter >= max_iter) {
      warn("SVM solver hit the iteration cap with KKT gap " + std::to_string(gap));
      break;
    }

    const double qii = k(i, i), qjj = k(j, j);
    const double qij = y[i] * y[j] * k(i, j);
    const double old_i = alpha[i], old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
      } else {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double di = (alpha[i] - old_i) * y[i];
    const double dj = (alpha[j] - old_j) * y[j];
    grad.array() += y.array() * (k.col(i).array() * di + k.col(j).array() * dj);
    if (opt.objective_trace) opt.objective_trace->push_back(dual());
  }
  model.iterations = iter;
  model.max_violation = std::max(gap, 0.0);

  // Bias: mean of y_i - g_i over free vectors, else the midpoint of the
  // feasible interval [up_max, low_min].
  double free_sum = 0.0;
  int free_count = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha[t] > 0 && alpha[t] < C) {
      free_sum += -y[t] * grad[t];
      ++free_count;
    }
  }
  model.bias = free_count > 0 ? free_sum / free_count : 0.5 * (up_max + low_min);
  model.alphas = alpha;
  for (Eigen::Index t = 0; t < n; ++t)
    if (alpha[t] > 0) model.support_indices.push_back(t);
  return model;
}

SvmPrediction svm_predict(const SvmModel& model, const Eigen::MatrixXd& k_cross) {
  if (k_cross.cols() != model.alphas.size()) {
    throw ValidationError("cross kernel has " + std::to_string(k_cross.cols()) +
                          " columns but the model has " + std::to_string(model.alphas.size()) +
                          " training points");
  }
  SvmPrediction p;
  p.decision = k_cross * model.alphas.cwiseProduct(model.train_labels);
  p.decision.array() += model.bias;
  p.labels = p.decision.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
  return p;
}

double svm_test_score(const SvmModel& model, const Eigen::MatrixXd& k_cross,
                      const Eigen::VectorXd& y_test) {
  if (y_test.size() != k_cross.rows()) {
    throw ValidationError("test label count does not match cross kernel rows");
  }
  if (y_test.size() == 0) throw ValidationError("empty test set");
  const SvmPrediction p = svm_predict(model, k_cross);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < y_test.size(); ++i) correct += p.labels[i] == y_test[i];
  return static_cast<double>(correct) / static_cast<double>(y_test.size());
}

double svm_kkt_violation(const SvmModel& model, const Eigen::MatrixXd& k_train) {
  const SvmPrediction p = svm_predict(model, k_train);
  const double bound_tol = 1e-12 * model.C;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < model.alphas.size(); ++i) {
    const double margin = model.train_labels[i] * p.decision[i];
    const double a = model.alphas[i];
    double v = 0.0;
    if (a <= bound_tol) v = std::max(0.0, 1.0 - margin);
    else if (a >= model.C - bound_tol) v = std::max(0.0, margin - 1.0);
    else v = std::abs(margin - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

std::string svm_model_to_json(const SvmModel& model) {
  nlohmann::json j;
  j["C"] = model.C;
  j["bias"] = model.bias;
  j["alphas"] = std::vector<double>(model.alphas.begin(), model.alphas.end());
  j["train_labels"] = std::vector<double>(model.train_labels.begin(), model.train_labels.end());
  j["support_indices"] = model.support_indices;
  j["iterations"] = model.iterations;
  j["converged"] = model.converged;
  j["max_violation"] = model.max_violation;
  return j.dump(2);
}

SvmModel svm_model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SvmModel m;
    m.C = j.at("C").get<double>();
    m.bias = j.at("bias").get<double>();
    const auto a = j.at("alphas").get<std::vector<double>>();
    const auto y = j.at("train_labels").get<std::vector<double>>();
    if (a.size() != y.size()) throw ValidationError("alphas and train_labels differ in length");
    m.alphas = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
    m.train_labels = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    m.support_indices = j.at("support_indices").get<std::vector<Eigen::Index>>();
    m.iterations = j.value("iterations", std::int64_t{0});
    m.converged = j.value("converged", true);
    m.max_violation = j.value("max_violation", 0.0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed SVM model JSON: ") + e.what());
  }
}

std::vector<double> default_c_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 10; ++k) grid.push_back(std::pow(10.0, -2.0 + 0.5 * k));
  return grid;
}

}  // namespace qk
