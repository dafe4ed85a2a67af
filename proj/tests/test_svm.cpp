#include <random>
#include <vector>

#include "doctest.h"

#include "oracles.hpp"
#include "qkernel/data.hpp"
#include "qkernel/error.hpp"
#include "qkernel/feature_map.hpp"
#include "qkernel/kernel.hpp"
#include "qkernel/svm.hpp"

using namespace qk;

namespace {

Eigen::MatrixXd rbf(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = std::exp(-gamma * (a.row(i) - b.row(j)).squaredNorm());
  return k;
}

// Two Gaussian blobs centred at (+-2, 0), labels by blob.
void blobs(std::mt19937_64& rng, Eigen::Index n, Eigen::MatrixXd& x, Eigen::VectorXd& y) {
  std::normal_distribution<double> g(0.0, 0.4);
  x.resize(n, 2);
  y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = i % 2 ? 1.0 : -1.0;
    x(i, 0) = 2.0 * y[i] + g(rng);
    x(i, 1) = g(rng);
  }
}

SvmOptions tight(double tol = 1e-8) {
  SvmOptions o;
  o.tol = tol;
  return o;
}

}  // namespace

TEST_SUITE("svm") {

TEST_CASE("two-point dual solved by hand") {
  const SvmModel m = svm_train(Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(1, -1), 1e6, tight());
  CHECK(m.converged);
  CHECK(std::abs(m.alphas[0] - 1.0) < 1e-9);
  CHECK(std::abs(m.alphas[1] - 1.0) < 1e-9);
  const SvmPrediction p = svm_predict(m, Eigen::MatrixXd::Identity(2, 2));
  CHECK(std::abs(p.decision[0] - 1.0) < 1e-9);
  CHECK(std::abs(p.decision[1] + 1.0) < 1e-9);
}

TEST_CASE("separable clusters") {
  std::mt19937_64 rng(51);
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  blobs(rng, 60, x, y);
  const Eigen::MatrixXd k = rbf(x, x, 0.5);
  const SvmModel m = svm_train(k, y, 1e4, tight(1e-6));
  CHECK(m.converged);
  const SvmPrediction p = svm_predict(m, k);
  CHECK(p.labels == y);
  CHECK(svm_test_score(m, k, y) == 1.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) CHECK(y[i] * p.decision[i] >= 1.0 - 1e-3);
  CHECK(svm_kkt_violation(m, k) <= 1e-3);
}

TEST_CASE("dual constraints and monotone objective") {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd x(40, 4);
  for (auto& v : x.reshaped()) v = u(rng);
  Eigen::VectorXd y(40);
  for (Eigen::Index i = 0; i < 40; ++i) y[i] = (x(i, 0) * x(i, 1) + 0.2 * u(rng)) > 0 ? 1.0 : -1.0;
  FeatureMapSpec s;
  s.lambda = 1.0;
  const Eigen::MatrixXd k = build_kernel(s, x).entries;
  for (double C : {0.1, 1.0, 100.0}) {
    std::vector<double> trace;
    SvmOptions o = tight(1e-6);
    o.objective_trace = &trace;
    const SvmModel m = svm_train(k, y, C, o);
    CHECK(m.converged);
    CHECK(m.alphas.minCoeff() >= 0.0);
    CHECK(m.alphas.maxCoeff() <= C);
    CHECK(std::abs(m.alphas.dot(y)) < 1e-10 * std::max(1.0, C));
    REQUIRE(!trace.empty());
    for (std::size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] >= trace[t - 1] - 1e-12 * std::abs(trace[t - 1]));
    CHECK(std::abs(trace.back() - svm_dual_objective(k, y, m.alphas)) < 1e-9 * std::max(1.0, std::abs(trace.back())));
    CHECK(svm_kkt_violation(m, k) <= 1e-3);
    for (Eigen::Index idx : m.support_indices) CHECK(m.alphas[idx] > 0.0);
  }
}

TEST_CASE("matches the brute-force QP oracle") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-1, 1);
  std::uniform_int_distribution<int> size(4, 9);
  int solved = 0;
  for (int attempt = 0; attempt < 60 && solved < 10; ++attempt) {
    const Eigen::Index n = size(rng);
    Eigen::MatrixXd x(n, 3);
    for (auto& v : x.reshaped()) v = u(rng);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = i % 2 ? 1.0 : -1.0;
    const Eigen::MatrixXd k = rbf(x, x, 1.0);
    const double C = attempt % 2 ? 1.0 : 10.0;
    const auto ref = oracle::svm_qp(k, y, C);
    if (!ref) continue;
    ++solved;
    const SvmModel m = svm_train(k, y, C, tight());
    CHECK(m.converged);
    const Eigen::VectorXd f = svm_predict(m, k).decision;
    CHECK((f - ref->decision).cwiseAbs().maxCoeff() < 1e-4);
  }
  CHECK(solved == 10);
}

TEST_CASE("duplicated rows do not change the decision function") {
  std::mt19937_64 rng(54);
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  blobs(rng, 20, x, y);
  x(0, 0) = 0.1;  // pull one point into the margin
  Eigen::MatrixXd x2(40, 2);
  x2 << x, x;
  Eigen::VectorXd y2(40);
  y2 << y, y;
  const Eigen::MatrixXd k = rbf(x, x, 0.5);
  const Eigen::MatrixXd k2 = rbf(x2, x2, 0.5);
  const SvmModel a = svm_train(k, y, 5.0, tight(1e-10));
  const SvmModel b = svm_train(k2, y2, 2.5, tight(1e-10));
  const Eigen::VectorXd fa = svm_predict(a, k).decision;
  const Eigen::VectorXd fb = svm_predict(b, rbf(x, x2, 0.5)).decision;
  CHECK((fa - fb).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("prediction rules") {
  SvmModel m;
  m.alphas = Eigen::VectorXd::Zero(3);
  m.train_labels = Eigen::Vector3d(1, -1, 1);
  m.bias = -0.5;
  const SvmPrediction p = svm_predict(m, Eigen::MatrixXd::Ones(4, 3));
  CHECK(p.labels == Eigen::VectorXd::Constant(4, -1.0));
  m.bias = 0.0;
  CHECK(svm_predict(m, Eigen::MatrixXd::Ones(2, 3)).labels == Eigen::VectorXd::Constant(2, 1.0));
  CHECK_THROWS_AS(svm_predict(m, Eigen::MatrixXd::Ones(2, 4)), ValidationError);
}

TEST_CASE("test score") {
  SvmModel m;
  m.alphas = Eigen::VectorXd::Zero(1);
  m.train_labels = Eigen::VectorXd::Ones(1);
  m.bias = 1.0;
  const Eigen::MatrixXd kc = Eigen::MatrixXd::Zero(5, 1);
  CHECK(svm_test_score(m, kc, Eigen::VectorXd::Ones(5)) == 1.0);
  CHECK(svm_test_score(m, kc, Eigen::VectorXd::Constant(5, -1.0)) == 0.0);
  std::mt19937_64 rng(55);
  std::bernoulli_distribution coin;
  Eigen::VectorXd y(4000);
  for (auto& v : y) v = coin(rng) ? 1.0 : -1.0;
  CHECK(std::abs(svm_test_score(m, Eigen::MatrixXd::Zero(4000, 1), y) - 0.5) <= 0.05);
  CHECK_THROWS_AS(svm_test_score(m, kc, Eigen::VectorXd::Ones(4)), ValidationError);
}

TEST_CASE("model JSON round trip") {
  std::mt19937_64 rng(56);
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  blobs(rng, 12, x, y);
  const SvmModel m = svm_train(rbf(x, x, 0.5), y, 3.0);
  const SvmModel back = svm_model_from_json(svm_model_to_json(m));
  CHECK(back.alphas == m.alphas);
  CHECK(back.bias == m.bias);
  CHECK(back.C == m.C);
  CHECK(back.train_labels == m.train_labels);
  CHECK(back.support_indices == m.support_indices);
  CHECK_THROWS_AS(svm_model_from_json("{not json"), ValidationError);
  CHECK_THROWS_AS(svm_model_from_json(R"({"alphas":[1,2],"train_labels":[1],"bias":0,"C":1})"), ValidationError);
}

TEST_CASE("input validation") {
  const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(svm_train(k, Eigen::Vector3d(1, 1, 1), 1.0), ValidationError);
  CHECK_THROWS_AS(svm_train(k, Eigen::Vector3d(1, -1, 0), 1.0), ValidationError);
  CHECK_THROWS_AS(svm_train(k, Eigen::Vector2d(1, -1), 1.0), ValidationError);
  CHECK_THROWS_AS(svm_train(k, Eigen::Vector3d(1, -1, 1), 0.0), ValidationError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
  bad(0, 1) = bad(1, 0) = 3.0;
  CHECK_THROWS_AS(svm_train(bad, Eigen::Vector3d(1, -1, 1), 1.0), NumericalError);
}

TEST_CASE("iteration cap") {
  std::mt19937_64 rng(57);
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  blobs(rng, 30, x, y);
  SvmOptions o = tight(1e-12);
  o.max_sweeps = 0;
  std::vector<std::string> warnings;
  set_warning_sink([&](const std::string& w) { warnings.push_back(w); });
  const SvmModel m = svm_train(rbf(x, x, 0.5), y, 1.0, o);
  set_warning_sink(nullptr);
  CHECK_FALSE(m.converged);
  CHECK(m.iterations == 0);
  CHECK(warnings.size() == 1);
}

TEST_CASE("default C grid") {
  const auto c = default_c_grid();
  REQUIRE(c.size() == 11);
  CHECK(c.front() == doctest::Approx(1e-2));
  CHECK(c.back() == doctest::Approx(1e3));
  for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i] / c[i - 1] == doctest::Approx(std::pow(10.0, 0.5)));
}

}
