#include "qkernel/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "qkernel/error.hpp"
#include "qkernel/parallel.hpp"

namespace qk {

namespace {

// Column block width for the Gram products. Fixed, so entry values never
// depend on the thread count.
constexpr Eigen::Index kBlock = 64;

Eigen::MatrixXcd feature_matrix(const FeatureMapSpec& spec, const Eigen::MatrixXd& points,
                                const KernelOptions& opt) {
  spec.validate();
  if (!points.allFinite()) throw ValidationError("data contains non-finite values");
  const Eigen::Index d = points.cols();
  if (d < 1 || d > opt.max_qubits) {
    throw ValidationError("data dimension " + std::to_string(d) + " is not a valid qubit count (max " +
                          std::to_string(opt.max_qubits) + ")");
  }
  const std::size_t dim = std::size_t{1} << d;
  const double bytes = static_cast<double>(dim) * static_cast<double>(points.rows()) * sizeof(cplx);
  if (bytes > static_cast<double>(opt.memory_limit)) {
    throw ValidationError("caching " + std::to_string(points.rows()) + " states of " +
                          std::to_string(d) + " qubits needs " +
                          std::to_string(bytes / (1 << 20)) + " MiB, above the configured limit");
  }
  Eigen::MatrixXcd states(static_cast<Eigen::Index>(dim), points.rows());
  parallel_for(static_cast<std::size_t>(points.rows()), opt.threads, [&](std::size_t i) {
    const Eigen::VectorXd x = points.row(static_cast<Eigen::Index>(i)).transpose();
    states.col(static_cast<Eigen::Index>(i)) = embed(spec, x, opt.max_qubits).amplitudes();
  });
  return states;
}

struct BlockPair {
  Eigen::Index row0, rows, col0, cols;
};

std::vector<BlockPair> blocks(Eigen::Index n_rows, Eigen::Index n_cols, bool upper_only) {
  std::vector<BlockPair> out;
  for (Eigen::Index r = 0; r < n_rows; r += kBlock) {
    for (Eigen::Index c = upper_only ? r : 0; c < n_cols; c += kBlock) {
      out.push_back({r, std::min(kBlock, n_rows - r), c, std::min(kBlock, n_cols - c)});
    }
  }
  return out;
}

}  // namespace

std::vector<StateVector> embed_all(const FeatureMapSpec& spec, const Eigen::MatrixXd& points,
                                   const KernelOptions& opt) {
  const Eigen::MatrixXcd states = feature_matrix(spec, points, opt);
  std::vector<StateVector> out;
  out.reserve(static_cast<std::size_t>(states.cols()));
  for (Eigen::Index i = 0; i < states.cols(); ++i) {
    out.push_back(StateVector::from_amplitudes(states.col(i)));
  }
  return out;
}

KernelMatrix build_kernel(const FeatureMapSpec& spec, const Eigen::MatrixXd& points,
                          const KernelOptions& opt) {
  const Eigen::Index p = points.rows();
  if (p < 2) throw ValidationError("a kernel needs at least 2 points");
  const Eigen::MatrixXcd states = feature_matrix(spec, points, opt);

  KernelMatrix out;
  out.spec = spec;
  out.n_qubits = static_cast<int>(points.cols());
  out.entries = Eigen::MatrixXd::Identity(p, p);
  const auto tiles = blocks(p, p, true);
  parallel_for(tiles.size(), opt.threads, [&](std::size_t t) {
    const BlockPair& b = tiles[t];
    const Eigen::MatrixXcd overlaps =
        states.middleCols(b.row0, b.rows).adjoint() * states.middleCols(b.col0, b.cols);
    for (Eigen::Index i = 0; i < b.rows; ++i) {
      for (Eigen::Index j = 0; j < b.cols; ++j) {
        const Eigen::Index gi = b.row0 + i;
        const Eigen::Index gj = b.col0 + j;
        if (gj <= gi) continue;
        const double v = std::norm(overlaps(i, j));
        out.entries(gi, gj) = v;
        out.entries(gj, gi) = v;
      }
    }
  });
  return out;
}

KernelMatrix build_kernel(const FeatureMapSpec& spec, const Dataset& data,
                          const KernelOptions& opt) {
  return build_kernel(spec, data.points, opt);
}

Eigen::MatrixXd cross_kernel(const FeatureMapSpec& spec, const Eigen::MatrixXd& train,
                             const Eigen::MatrixXd& test, const KernelOptions& opt) {
  if (train.cols() != test.cols()) {
    throw ValidationError("train dimension " + std::to_string(train.cols()) +
                          " differs from test dimension " + std::to_string(test.cols()));
  }
  const Eigen::MatrixXcd s_train = feature_matrix(spec, train, opt);
  const Eigen::MatrixXcd s_test = feature_matrix(spec, test, opt);
  Eigen::MatrixXd out(test.rows(), train.rows());
  const auto tiles = blocks(test.rows(), train.rows(), false);
  parallel_for(tiles.size(), opt.threads, [&](std::size_t t) {
    const BlockPair& b = tiles[t];
    const Eigen::MatrixXcd overlaps =
        s_test.middleCols(b.row0, b.rows).adjoint() * s_train.middleCols(b.col0, b.cols);
    out.block(b.row0, b.col0, b.rows, b.cols) = overlaps.cwiseAbs2();
  });
  return out;
}

Spectrum normalized_spectrum(const Eigen::MatrixXd& k, bool with_vectors) {
  const Eigen::Index p = k.rows();
  if (p < 1 || k.cols() != p) throw ValidationError("kernel matrix must be square and non-empty");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      k / static_cast<double>(p), with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("kernel eigensolver did not converge");
  Spectrum s;
  s.values = es.eigenvalues().reverse();
  if (with_vectors) s.vectors = es.eigenvectors().rowwise().reverse();
  return s;
}

double gamma_max(const Eigen::MatrixXd& k) { return normalized_spectrum(k).gamma_max(); }

KernelCheck check_kernel_invariants(const Eigen::MatrixXd& k) {
  KernelCheck c;
  const Eigen::Index p = k.rows();
  if (k.cols() != p || p == 0) {
    c.problem = "not square";
    return c;
  }
  c.max_asymmetry = (k - k.transpose()).cwiseAbs().maxCoeff();
  c.max_diag_error = (k.diagonal().array() - 1.0).abs().maxCoeff();
  c.min_entry = k.minCoeff();
  c.max_entry = k.maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    c.problem = "eigensolver failed";
    return c;
  }
  c.min_eigenvalue = es.eigenvalues()[0];
  if (c.max_asymmetry > 1e-12) c.problem += "asymmetric; ";
  if (c.max_diag_error > 1e-10) c.problem += "diagonal not 1; ";
  if (c.min_entry < -1e-10 || c.max_entry > 1.0 + 1e-10) c.problem += "entries outside [0,1]; ";
  if (c.min_eigenvalue < -1e-8 * static_cast<double>(p)) c.problem += "not PSD; ";
  return c;
}

void write_kernel_csv(const std::filesystem::path& path, const Eigen::MatrixXd& k, bool clamp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  char buf[64];
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      double v = k(i, j);
      if (clamp) v = std::clamp(v, 0.0, 1.0);
      std::snprintf(buf, sizeof buf, "%.17g", v);
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw ValidationError("failed writing " + path.string());
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<double> values;
  std::size_t width = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t cols = 0;
    std::size_t start = 0;
    for (;;) {
      const std::size_t pos = line.find(',', start);
      std::string cell = line.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
      cell.erase(0, cell.find_first_not_of(" \t"));
      cell.erase(cell.find_last_not_of(" \t") + 1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ValidationError(path.string() + ": row " + std::to_string(line_no) + ", column " +
                              std::to_string(cols + 1) + ": non-numeric cell '" + cell + "'");
      }
      values.push_back(v);
      ++cols;
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (width == 0) width = cols;
    if (cols != width) {
      throw ValidationError(path.string() + ": row " + std::to_string(line_no) + " has " +
                            std::to_string(cols) + " columns, expected " + std::to_string(width));
    }
    ++rows;
  }
  if (rows == 0) throw ValidationError(path.string() + ": empty matrix file");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < width; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * width + j];
  return m;
}

}  // namespace qk
