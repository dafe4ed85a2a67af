#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qkernel/rng.hpp"

namespace qk {

/// P x d data points with optional +-1 labels.
struct Dataset {
  Eigen::MatrixXd points;                 // one row per point
  std::optional<Eigen::VectorXd> labels;  // entries exactly +1 or -1
  std::optional<std::uint64_t> seed;      // set when synthetic
  std::vector<std::string> preprocessing; // applied transforms, in order

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }

  /// Throws ValidationError on non-finite points or malformed labels.
  void validate() const;

  /// Rows `idx` of this dataset (points and labels).
  Dataset subset(const std::vector<Eigen::Index>& idx) const;
};

/// How standardize_normalize maps z-scores into [-1, 1].
enum class Scaling {
  ColumnMaxAbs,  // each column divided by its own largest |z|
  GlobalMaxAbs,  // whole matrix divided by its largest |z|
};

std::string_view to_string(Scaling s);
Scaling parse_scaling(std::string_view s);

/// Shape and correlation of the synthetic generalized-normal source
/// (location 0, scale 1).
struct GenNormSpec {
  double beta = 1.0;  // shape, > 0
  double r = 0.0;     // adjacent-feature correlation, in [0, 1)
  Scaling scaling = Scaling::ColumnMaxAbs;

  void validate() const;
  bool operator==(const GenNormSpec&) const = default;
};

/// Receives non-fatal diagnostics (degenerate columns and similar). Defaults
/// to printing on stderr; passing an empty function restores that default.
void set_warning_sink(std::function<void(const std::string&)> sink);
void warn(const std::string& message);

/// Gamma(shape, 1) by Marsaglia-Tsang; shapes below 1 use the
/// Gamma(shape + 1) * U^(1/shape) boost.
double sample_gamma(Rng& rng, double shape);

/// One draw from the density beta / (2 Gamma(1/beta)) exp(-|x|^beta).
double sample_gennorm(Rng& rng, double beta);

/// `count` i.i.d. generalized-normal draws from the stream seeded by `seed`.
std::vector<double> sample_gennorm(double beta, std::size_t count, std::uint64_t seed);

/// Raw P x d draws before any preprocessing. Feature 0 is drawn directly and
/// feature j >= 1 follows x_j = r x_{j-1} + sqrt(1 - r^2) * draw.
Eigen::MatrixXd sample_raw_points(const GenNormSpec& spec, Eigen::Index n_points,
                                  Eigen::Index dim, std::uint64_t seed);

/// sample_raw_points followed by standardize_normalize.
Dataset sample_dataset(const GenNormSpec& spec, Eigen::Index n_points, Eigen::Index dim,
                       std::uint64_t seed);

/// Column z-score (sample standard deviation), then max-abs scaling so every
/// entry lies in [-1, 1] and the largest |entry| is exactly 1. Constant
/// columns become 0 and trigger a warning.
///
/// ColumnMaxAbs keeps the scale a per-feature statistic of P draws; with
/// GlobalMaxAbs it is the extreme of all P * d draws and so shrinks the
/// data as the dimension grows.
Eigen::MatrixXd standardize_normalize(const Eigen::MatrixXd& points,
                                      Scaling scaling = Scaling::ColumnMaxAbs);

/// Projection onto the top principal axes of the column-centred sample
/// covariance, in descending-variance order. Each axis is oriented so that
/// its largest-magnitude loading is positive.
Eigen::MatrixXd pca_reduce(const Eigen::MatrixXd& points, Eigen::Index n_components);

/// Numeric CSV reader. A first line whose cells are all non-numeric is a
/// header. With `has_labels` the last column holds a two-valued label that
/// is mapped to -1 (smaller value) and +1 (larger value).
Dataset load_csv(const std::filesystem::path& path, bool has_labels);

/// Like load_csv, but decides on labels from a header whose last column is
/// named "label".
Dataset load_dataset_csv(const std::filesystem::path& path);

/// Header f0,...,f{d-1}[,label]; values written with 17 significant digits.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

/// Disjoint uniformly random train/test subsets.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, Eigen::Index n_train,
                                             Eigen::Index n_test, std::uint64_t seed);

}  // namespace qk
