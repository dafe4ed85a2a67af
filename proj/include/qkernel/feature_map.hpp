#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qkernel/statevec.hpp"

namespace qk {

enum class Family { IQP, ClassicalIQP, Heisenberg, ProductZ };
enum class Boundary { Open, Periodic };

/// Spin-1/2 operators are S = kSpinFactor * sigma. The exchange term
/// S_j . S_{j+1} therefore carries kSpinFactor^2 = 1/4.
inline constexpr double kSpinFactor = 0.5;

/// Which circuit to build and its hyperparameters. Fields a family does not
/// use are ignored.
struct FeatureMapSpec {
  Family family = Family::IQP;
  double lambda = 1.0;
  double alpha = 2.0;   // IQP / ClassicalIQP pair-term exponent
  int n_layers = 4;     // Heisenberg
  Boundary boundary = Boundary::Open;  // Heisenberg

  /// Throws ValidationError on non-finite or out-of-range hyperparameters.
  void validate() const;

  bool operator==(const FeatureMapSpec&) const = default;
};

std::string_view to_string(Family f);
std::string_view to_string(Boundary b);
/// Case-insensitive; accepts "iqp", "classical-iqp"/"classicaliqp",
/// "heisenberg", "productz"/"product-z".
Family parse_family(std::string_view s);
Boundary parse_boundary(std::string_view s);

/// The natural classical counterpart used for geometric-difference studies:
/// IQP -> ClassicalIQP, Heisenberg -> ProductZ, others map to themselves.
Family classical_counterpart(Family f);

/// Diagonal phases of the IQP Z layer:
///   phase(b) = sum_j lambda x_j s_j(b) + sum_{j<k} lambda^alpha x_j x_k s_j(b) s_k(b)
/// with s_j(b) = +1 when bit j of b is 0 and -1 otherwise.
std::vector<double> iqp_phases(std::span<const double> x, double lambda, double alpha);

/// Single exp(-i H) factor of the Heisenberg map for one chain site:
/// H = S_q1 . S_q2 + lambda * x * sigma^z_q1, in the local basis of
/// TwoQubitUnitary.
Eigen::Matrix4cd heisenberg_site_hamiltonian(double lambda, double x);

/// Embeds one data vector; its length is the qubit count.
StateVector embed(const FeatureMapSpec& spec, std::span<const double> x,
                  int max_qubits = kMaxQubits);

inline StateVector embed(const FeatureMapSpec& spec, const Eigen::VectorXd& x,
                         int max_qubits = kMaxQubits) {
  return embed(spec, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
               max_qubits);
}

}  // namespace qk
