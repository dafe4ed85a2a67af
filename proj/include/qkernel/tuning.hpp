#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qkernel/data.hpp"
#include "qkernel/feature_map.hpp"
#include "qkernel/kernel.hpp"
#include "qkernel/spectral.hpp"
#include "qkernel/svm.hpp"

namespace qk {

/// gamma_max targets offered as named presets.
inline constexpr std::array<double, 6> kGammaTargetPresets{0.01, 0.05, 0.2, 0.3, 0.4, 0.5};

/// `points` values 10^e, e evenly spaced on [lo_exp, hi_exp].
std::vector<double> log_grid(double lo_exp, double hi_exp, int points);

/// 17 points on [10^-1.5, 10^0.5].
std::vector<double> default_lambda_grid();

struct CurvePoint {
  int n_qubits = 0;
  double lambda = 0.0;
  double gamma_mean = 0.0;
  double gamma_std = 0.0;
  int n_replicates = 0;
};

/// Sampled map (n_qubits, lambda) -> mean gamma_max.
struct TuneCurve {
  std::vector<CurvePoint> points;

  /// Points for one qubit count, in ascending lambda.
  std::vector<CurvePoint> at(int n_qubits) const;
};

/// Inputs of a gamma_max sweep. `map.lambda` is ignored; the grid supplies it.
struct CurveRequest {
  FeatureMapSpec map;
  GenNormSpec data;
  Eigen::Index n_points = 200;
  std::vector<int> qubits;
  std::vector<double> lambdas = default_lambda_grid();
  int replicates = 3;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Seed of the synthetic dataset for replicate `rep` at `n_qubits`.
std::uint64_t replicate_seed(std::uint64_t seed, std::string_view purpose, int n_qubits,
                             int n_points, int rep);

/// For every (n, lambda): fresh datasets per replicate, fidelity kernel,
/// mean and sample std of gamma_max.
TuneCurve gamma_max_curve(const CurveRequest& req);

/// Log-lambda piecewise-linear inversion of the curve at `n_qubits`. Returns
/// the smallest lambda whose interpolated gamma_max equals `target`; throws
/// ValidationError if the target is not bracketed.
double lambda_for_target_gamma(const TuneCurve& curve, int n_qubits, double target);

/// lambda_for_target_gamma plus a check on freshly sampled kernels. The
/// realized value is the mean gamma_max over `req.replicates` new datasets,
/// the same statistic the curve interpolates.
struct TunedLambda {
  double lambda = 0.0;
  double target = 0.0;
  double realized_gamma = 0.0;
  std::vector<double> realized_replicates;
  bool within_tolerance = false;  // |realized - target| <= 20% of target
  std::string warning;
};

inline constexpr double kGammaRelTolerance = 0.2;

TunedLambda tune_lambda(const TuneCurve& curve, const CurveRequest& req, int n_qubits,
                        double target);

struct GdResult {
  int n_qubits = 0;
  double quantum_lambda = 0.0;
  double classical_lambda_star = 0.0;
  double gd_min = 0.0;
  double gd_matched = 0.0;
  double sqrt_n = 0.0;
  std::vector<double> grid_gd;  // g_d for each classical grid lambda
};

/// Grid search over the classical lambda minimising g(K_classical || K_quantum)
/// on the same data. `classical.lambda` is ignored.
GdResult min_gd_over_classical(const KernelMatrix& k_quantum, const FeatureMapSpec& classical,
                               const std::vector<double>& lambdas, const Dataset& data,
                               const PsdFunctionConfig& cfg = {}, unsigned threads = 1);

struct ScoreCell {
  double lambda = 0.0;
  double C = 0.0;
  double test_score = 0.0;
};

struct TestScoreResult {
  double lambda = 0.0;
  double C = 0.0;
  double test_score = 0.0;
  SvmModel model;
  std::vector<ScoreCell> cells;
  Dataset train;
  Dataset test;
};

struct TestScoreRequest {
  FeatureMapSpec map;  // lambda ignored
  std::vector<double> lambdas = default_lambda_grid();
  std::vector<double> cs = default_c_grid();
  Eigen::Index n_train = 700;
  Eigen::Index n_test = 200;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  SvmOptions svm;
};

/// Exhaustive (lambda, C) search for the best held-out accuracy. Ties go to
/// the smaller lambda, then the smaller C.
TestScoreResult best_testscore_search(const Dataset& data, const TestScoreRequest& req);

// CSV schemas.
inline constexpr const char* kCurveCsvHeader = "n_qubits,lambda,gamma_max_mean,gamma_max_std,n_replicates";
inline constexpr const char* kGdCsvHeader = "n_qubits,quantum_lambda,classical_lambda_star,gd_min,gd_matched,sqrt_N";

/// Shortest decimal text that reads back to exactly `v`.
std::string format_number(double v);
std::string curve_csv_row(const CurvePoint& p);
std::string gd_csv_row(const GdResult& r);
void write_curve_csv(const std::filesystem::path& path, const TuneCurve& curve);

}  // namespace qk
