#include "qkernel/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qkernel/error.hpp"

namespace qk {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

void print_warning(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

std::function<void(const std::string&)>& sink() {
  static std::function<void(const std::string&)> s = print_warning;
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

std::string_view to_string(Scaling s) {
  return s == Scaling::ColumnMaxAbs ? "column-maxabs" : "global-maxabs";
}

Scaling parse_scaling(std::string_view s) {
  if (s == "column-maxabs") return Scaling::ColumnMaxAbs;
  if (s == "global-maxabs") return Scaling::GlobalMaxAbs;
  throw ValidationError("unknown scaling '" + std::string(s) + "' (column-maxabs|global-maxabs)");
}

void set_warning_sink(std::function<void(const std::string&)> s) {
  std::lock_guard lock(sink_mutex());
  sink() = s ? std::move(s) : print_warning;
}

void warn(const std::string& message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(message);
}

void Dataset::validate() const {
  if (!points.allFinite()) throw ValidationError("dataset contains non-finite values");
  if (labels) {
    if (labels->size() != points.rows()) {
      throw ValidationError("label count " + std::to_string(labels->size()) +
                            " does not match point count " + std::to_string(points.rows()));
    }
    for (double y : *labels) {
      if (y != 1.0 && y != -1.0) throw ValidationError("labels must be exactly +1 or -1");
    }
  }
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& idx) const {
  Dataset out;
  out.points.resize(static_cast<Eigen::Index>(idx.size()), points.cols());
  if (labels) out.labels = Eigen::VectorXd(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out.points.row(i) = points.row(idx[k]);
    if (labels) (*out.labels)[i] = (*labels)[idx[k]];
  }
  out.seed = seed;
  out.preprocessing = preprocessing;
  return out;
}

void GenNormSpec::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ValidationError("beta must be positive, got " + std::to_string(beta));
  }
  if (!(r >= 0.0 && r < 1.0)) {
    throw ValidationError("correlation r must lie in [0, 1), got " + std::to_string(r));
  }
}

double sample_gamma(Rng& rng, double shape) {
  if (!(shape > 0.0)) throw ValidationError("gamma shape must be positive");
  if (shape < 1.0) {
    const double u = rng.uniform();
    return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = rng.normal();
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_gennorm(Rng& rng, double beta) {
  const double magnitude = std::pow(sample_gamma(rng, 1.0 / beta), 1.0 / beta);
  return rng.uniform() < 0.5 ? -magnitude : magnitude;
}

std::vector<double> sample_gennorm(double beta, std::size_t count, std::uint64_t seed) {
  GenNormSpec{beta, 0.0}.validate();
  if (count == 0) throw ValidationError("sample count must be >= 1");
  Rng rng = Rng(seed).substream("gennorm");
  std::vector<double> out(count);
  for (double& v : out) v = sample_gennorm(rng, beta);
  return out;
}

Eigen::MatrixXd sample_raw_points(const GenNormSpec& spec, Eigen::Index n_points,
                                  Eigen::Index dim, std::uint64_t seed) {
  spec.validate();
  if (n_points < 2) throw ValidationError("need at least 2 points");
  if (dim < 1) throw ValidationError("dimension must be >= 1");
  Rng rng = Rng(seed).substream("gennorm");
  const double innovation = std::sqrt(1.0 - spec.r * spec.r);
  Eigen::MatrixXd x(n_points, dim);
  for (Eigen::Index i = 0; i < n_points; ++i) {
    x(i, 0) = sample_gennorm(rng, spec.beta);
    for (Eigen::Index j = 1; j < dim; ++j) {
      x(i, j) = spec.r * x(i, j - 1) + innovation * sample_gennorm(rng, spec.beta);
    }
  }
  return x;
}

Dataset sample_dataset(const GenNormSpec& spec, Eigen::Index n_points, Eigen::Index dim,
                       std::uint64_t seed) {
  Dataset out;
  out.points = standardize_normalize(sample_raw_points(spec, n_points, dim, seed), spec.scaling);
  out.seed = seed;
  char tag[96];
  std::snprintf(tag, sizeof tag, "gennorm(beta=%g,r=%g)", spec.beta, spec.r);
  out.preprocessing = {tag,
                       "standardize", std::string(to_string(spec.scaling))};
  return out;
}

Eigen::MatrixXd standardize_normalize(const Eigen::MatrixXd& points, Scaling scaling) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw ValidationError("standardization needs at least 2 rows");
  Eigen::MatrixXd z(points.rows(), points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const double mean = points.col(j).mean();
    const Eigen::VectorXd centred = points.col(j).array() - mean;
    const double sd = std::sqrt(centred.squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 0.0) || sd < 1e-300) {
      warn("column " + std::to_string(j) + " is constant; mapped to 0");
      z.col(j).setZero();
    } else {
      z.col(j) = centred / sd;
    }
  }
  if (z.size() == 0) return z;
  if (scaling == Scaling::GlobalMaxAbs) {
    const double max_abs = z.cwiseAbs().maxCoeff();
    if (max_abs > 0.0) z /= max_abs;
  } else {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double max_abs = z.col(j).cwiseAbs().maxCoeff();
      if (max_abs > 0.0) z.col(j) /= max_abs;
    }
  }
  return z;
}

Eigen::MatrixXd pca_reduce(const Eigen::MatrixXd& points, Eigen::Index n_components) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (n_components < 1 || n_components > std::min(n, d)) {
    throw ValidationError("n_components " + std::to_string(n_components) + " must lie in [1, " +
                          std::to_string(std::min(n, d)) + "]");
  }
  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Eigen::MatrixXd centred = points.rowwise() - mean;
  const Eigen::MatrixXd cov = (centred.transpose() * centred) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("PCA eigensolver failed");

  Eigen::MatrixXd axes(d, n_components);
  for (Eigen::Index k = 0; k < n_components; ++k) {
    Eigen::VectorXd v = es.eigenvectors().col(d - 1 - k);  // ascending order from Eigen
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    axes.col(k) = v;
  }
  return centred * axes;
}

Dataset load_csv(const std::filesystem::path& path, bool has_labels) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (first) {
      first = false;
      const bool header = std::none_of(cells.begin(), cells.end(),
                                       [](std::string_view c) { return parse_double(c).has_value(); });
      if (header) {
        width = cells.size();
        continue;
      }
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw ValidationError(path.string() + ": row " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " columns, expected " +
                            std::to_string(width));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_double(cells[c]);
      if (!v) {
        throw ValidationError(path.string() + ": row " + std::to_string(line_no) + ", column " +
                              std::to_string(c + 1) + ": non-numeric cell '" +
                              std::string(cells[c]) + "'");
      }
      row[c] = *v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path.string() + ": no data rows");
  const std::size_t n_features = has_labels ? width - 1 : width;
  if (n_features == 0) throw ValidationError(path.string() + ": no feature columns");

  Dataset out;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_features));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < n_features; ++j)
      out.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

  if (has_labels) {
    std::set<double> classes;
    for (const auto& r : rows) classes.insert(r.back());
    if (classes.size() != 2) {
      throw ValidationError(path.string() + ": expected exactly 2 label classes, found " +
                            std::to_string(classes.size()));
    }
    const double low = *classes.begin();
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      y[static_cast<Eigen::Index>(i)] = rows[i].back() == low ? -1.0 : 1.0;
    }
    out.labels = std::move(y);
  }
  out.validate();
  out.preprocessing.push_back("csv:" + path.filename().string());
  return out;
}

Dataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::string line;
  while (std::getline(in, line) && trim(line).empty()) {}
  const auto cells = split_commas(line);
  const bool labelled = !cells.empty() && cells.back() == "label";
  return load_csv(path, labelled);
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (Eigen::Index j = 0; j < data.dim(); ++j) out << (j ? ",f" : "f") << j;
  if (data.labels) out << ",label";
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", data.points(i, j));
      if (j) out << ',';
      out << buf;
    }
    if (data.labels) out << ',' << ((*data.labels)[i] > 0 ? "1" : "-1");
    out << '\n';
  }
  if (!out) throw ValidationError("failed writing " + path.string());
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, Eigen::Index n_train,
                                             Eigen::Index n_test, std::uint64_t seed) {
  if (n_train < 1 || n_test < 0 || n_train + n_test > data.size()) {
    throw ValidationError("cannot split " + std::to_string(data.size()) + " rows into " +
                          std::to_string(n_train) + " train + " + std::to_string(n_test) +
                          " test");
  }
  Rng rng = Rng(seed).substream("split");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(data.size()));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  }
  std::vector<Eigen::Index> train(perm.begin(), perm.begin() + n_train);
  std::vector<Eigen::Index> test(perm.begin() + n_train, perm.begin() + n_train + n_test);
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.subset(train), data.subset(test)};
}

}  // namespace qk
