#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>

#include <Eigen/Dense>

#include "qkernel/data.hpp"
#include "qkernel/feature_map.hpp"

namespace qk {

/// Symmetric P x P fidelity matrix. `spec` is empty for kernels read from
/// disk or supplied by a caller ("external").
struct KernelMatrix {
  Eigen::MatrixXd entries;
  std::optional<FeatureMapSpec> spec;
  int n_qubits = 0;

  Eigen::Index size() const { return entries.rows(); }
};

/// Knobs for kernel construction.
struct KernelOptions {
  unsigned threads = 1;          // 0 = all logical cores
  int max_qubits = kMaxQubits;
  /// Upper bound on the cached feature states, in bytes.
  std::size_t memory_limit = std::size_t{9} << 30;
};

/// Eigenvalues of K / P, descending. `vectors` is filled only on request.
struct Spectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;

  double gamma_max() const { return values[0]; }
};

/// All feature states of a dataset, computed once.
std::vector<StateVector> embed_all(const FeatureMapSpec& spec, const Eigen::MatrixXd& points,
                                   const KernelOptions& opt = {});

/// K_ij = |<psi(x_i)|psi(x_j)>|^2. Each unordered pair is evaluated once and
/// mirrored; the diagonal is exactly 1.
KernelMatrix build_kernel(const FeatureMapSpec& spec, const Dataset& data,
                          const KernelOptions& opt = {});
KernelMatrix build_kernel(const FeatureMapSpec& spec, const Eigen::MatrixXd& points,
                          const KernelOptions& opt = {});

/// Entry (i, j) = |<psi(test_i)|psi(train_j)>|^2.
Eigen::MatrixXd cross_kernel(const FeatureMapSpec& spec, const Eigen::MatrixXd& train,
                             const Eigen::MatrixXd& test, const KernelOptions& opt = {});

Spectrum normalized_spectrum(const Eigen::MatrixXd& k, bool with_vectors = false);
inline Spectrum normalized_spectrum(const KernelMatrix& k, bool with_vectors = false) {
  return normalized_spectrum(k.entries, with_vectors);
}

/// Largest eigenvalue of K / P.
double gamma_max(const Eigen::MatrixXd& k);

/// Outcome of check_kernel_invariants; empty `problem` means all held.
struct KernelCheck {
  double max_asymmetry = 0.0;
  double max_diag_error = 0.0;
  double min_entry = 0.0;
  double max_entry = 0.0;
  double min_eigenvalue = 0.0;
  std::string problem;
};

/// Symmetry 1e-12, unit diagonal 1e-10, entries in [0, 1] within 1e-10,
/// smallest eigenvalue >= -1e-8 * P.
KernelCheck check_kernel_invariants(const Eigen::MatrixXd& k);

/// Dense CSV: row-major, no header, 17 significant digits. Entries are
/// clamped to [0, 1] on write only.
void write_kernel_csv(const std::filesystem::path& path, const Eigen::MatrixXd& k,
                      bool clamp = true);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

}  // namespace qk
