#include "qkernel/feature_map.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <string>

#include "qkernel/error.hpp"

namespace qk {

namespace {

std::string lowercase_alnum(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& high, const Eigen::Matrix2cd& low) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = high(i, j) * low;
  return out;
}

}  // namespace

void FeatureMapSpec::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw ValidationError("lambda must be finite and non-negative, got " + std::to_string(lambda));
  }
  const bool uses_alpha = family == Family::IQP || family == Family::ClassicalIQP;
  if (uses_alpha && (!std::isfinite(alpha) || alpha <= 0.0)) {
    throw ValidationError("alpha must be finite and positive, got " + std::to_string(alpha));
  }
  if (family == Family::Heisenberg && n_layers < 1) {
    throw ValidationError("n_layers must be >= 1, got " + std::to_string(n_layers));
  }
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::IQP: return "iqp";
    case Family::ClassicalIQP: return "classical-iqp";
    case Family::Heisenberg: return "heisenberg";
    case Family::ProductZ: return "productz";
  }
  return "?";
}

std::string_view to_string(Boundary b) { return b == Boundary::Open ? "open" : "periodic"; }

Family parse_family(std::string_view s) {
  const std::string k = lowercase_alnum(s);
  if (k == "iqp") return Family::IQP;
  if (k == "classicaliqp") return Family::ClassicalIQP;
  if (k == "heisenberg") return Family::Heisenberg;
  if (k == "productz") return Family::ProductZ;
  throw ValidationError("unknown feature map family '" + std::string(s) + "'");
}

Boundary parse_boundary(std::string_view s) {
  const std::string k = lowercase_alnum(s);
  if (k == "open") return Boundary::Open;
  if (k == "periodic") return Boundary::Periodic;
  throw ValidationError("unknown boundary '" + std::string(s) + "'");
}

Family classical_counterpart(Family f) {
  switch (f) {
    case Family::IQP: return Family::ClassicalIQP;
    case Family::Heisenberg: return Family::ProductZ;
    default: return f;
  }
}

std::vector<double> iqp_phases(std::span<const double> x, double lambda, double alpha) {
  const std::size_t d = x.size();
  if (d == 0) throw ValidationError("iqp_phases needs at least one feature");
  const std::size_t dim = std::size_t{1} << d;
  const double pair_coeff = std::pow(lambda, alpha);

  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : x) {
    sum += v;
    sum_sq += v * v;
  }
  // With z_j = x_j s_j(b), sum_{j<k} z_j z_k = ((sum z)^2 - sum x^2) / 2, so
  // only the signed sum S(b) = sum_j x_j s_j(b) is needed per basis state.
  std::vector<double> signed_sum(dim);
  signed_sum[0] = sum;
  for (std::size_t b = 1; b < dim; ++b) {
    signed_sum[b] = signed_sum[b & (b - 1)] - 2.0 * x[static_cast<std::size_t>(std::countr_zero(b))];
  }
  std::vector<double> phases(dim);
  for (std::size_t b = 0; b < dim; ++b) {
    const double s = signed_sum[b];
    phases[b] = lambda * s + pair_coeff * 0.5 * (s * s - sum_sq);
  }
  return phases;
}

Eigen::Matrix4cd heisenberg_site_hamiltonian(double lambda, double x) {
  using namespace std::complex_literals;
  Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd px, py, pz;
  px << 0, 1, 1, 0;
  py << 0, -1i, 1i, 0;
  pz << 1, 0, 0, -1;
  const double exchange = kSpinFactor * kSpinFactor;
  return exchange * (kron2(px, px) + kron2(py, py) + kron2(pz, pz)) +
         lambda * x * kron2(id, pz);
}

StateVector embed(const FeatureMapSpec& spec, std::span<const double> x, int max_qubits) {
  spec.validate();
  const int d = static_cast<int>(x.size());
  for (double v : x) {
    if (!std::isfinite(v)) throw ValidationError("data vector has a non-finite entry");
  }
  StateVector state(d, max_qubits);

  switch (spec.family) {
    case Family::IQP: {
      const auto phases = iqp_phases(x, spec.lambda, spec.alpha);
      apply_hadamard_all(state);
      apply_diagonal_phase(state, phases);
      apply_hadamard_all(state);
      apply_diagonal_phase(state, phases);
      break;
    }
    case Family::ClassicalIQP: {
      apply_hadamard_all(state);
      apply_diagonal_phase(state, iqp_phases(x, spec.lambda, spec.alpha));
      break;
    }
    case Family::ProductZ: {
      for (int j = 0; j < d; ++j) apply_z_rotation(state, j, spec.lambda * x[j]);
      break;
    }
    case Family::Heisenberg: {
      if (d < 2) throw ValidationError("Heisenberg feature map needs at least 2 qubits");
      const bool periodic = spec.boundary == Boundary::Periodic;
      std::vector<TwoQubitUnitary> site_gates;
      site_gates.reserve(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j) {
        if (j + 1 < d || periodic) {
          site_gates.push_back(hermitian_expm_4x4(heisenberg_site_hamiltonian(spec.lambda, x[j])));
        }
      }
      for (int layer = 0; layer < spec.n_layers; ++layer) {
        for (int j = 0; j < d; ++j) {
          if (j + 1 < d || periodic) {
            apply_two_qubit_unitary(state, site_gates[static_cast<std::size_t>(j)], j, (j + 1) % d);
          } else {
            // Open chain end: only the local field term remains.
            apply_z_rotation(state, j, spec.lambda * x[j]);
          }
        }
      }
      break;
    }
  }
  return state;
}

}  // namespace qk
