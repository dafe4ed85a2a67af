#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"

#include "helpers.hpp"
#include "oracles.hpp"
#include "qkernel/error.hpp"
#include "qkernel/feature_map.hpp"

using namespace qk;
using testutil::max_diff;

namespace {

FeatureMapSpec make(Family f, double lam, double alpha = 2.0, Boundary b = Boundary::Open) {
  FeatureMapSpec s;
  s.family = f;
  s.lambda = lam;
  s.alpha = alpha;
  s.boundary = b;
  return s;
}

std::vector<double> random_x(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> x(static_cast<std::size_t>(d));
  for (double& v : x) v = u(rng);
  return x;
}

Eigen::VectorXcd as_vec(const std::vector<double>& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())).cast<cplx>();
}

// |<a|b>| = 1 means equal up to a global phase.
double phase_free_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return 1.0 - std::abs(a.dot(b));
}

}  // namespace

TEST_SUITE("feature_map") {

TEST_CASE("iqp_phases examples") {
  for (double p : iqp_phases(std::vector<double>(3, 0.0), 1.3, 2.0)) CHECK(p == 0.0);

  const auto one = iqp_phases(std::vector<double>{0.37}, 1.0, 2.0);
  REQUIRE(one.size() == 2);
  CHECK(one[0] == doctest::Approx(0.37));
  CHECK(one[1] == doctest::Approx(-0.37));

  const auto two = iqp_phases(std::vector<double>{1.0, 1.0}, 1.0, 2.0);
  REQUIRE(two.size() == 4);
  CHECK(two[0] == doctest::Approx(3.0));
  CHECK(two[1] == doctest::Approx(-1.0));
  CHECK(two[2] == doctest::Approx(-1.0));
  CHECK(two[3] == doctest::Approx(-1.0));
}

TEST_CASE("iqp_phases match the closed-form sum") {
  std::mt19937_64 rng(21);
  for (int d = 1; d <= 6; ++d) {
    const auto x = random_x(rng, d);
    const double lam = 0.7, alpha = 1.5;
    const auto ph = iqp_phases(x, lam, alpha);
    REQUIRE(ph.size() == (std::size_t{1} << d));
    for (unsigned b = 0; b < ph.size(); ++b) {
      double ref = 0.0;
      for (int j = 0; j < d; ++j) {
        const double sj = ((b >> j) & 1u) ? -1.0 : 1.0;
        ref += lam * x[j] * sj;
        for (int k = j + 1; k < d; ++k) {
          const double sk = ((b >> k) & 1u) ? -1.0 : 1.0;
          ref += std::pow(lam, alpha) * x[j] * x[k] * sj * sk;
        }
      }
      CHECK(std::abs(ph[b] - ref) < 1e-12);
    }
  }
}

TEST_CASE("embed examples") {
  const auto cz = embed(make(Family::ClassicalIQP, 1.0), std::vector<double>(3, 0.0));
  for (std::size_t b = 0; b < 8; ++b) CHECK(std::abs(cz[b] - 1 / std::sqrt(8.0)) < 1e-14);

  const auto iqp = embed(make(Family::IQP, 1.0), std::vector<double>{std::numbers::pi / 2});
  CHECK(std::abs(std::abs(iqp[1]) - 1.0) < 1e-12);
  CHECK(std::abs(iqp[0]) < 1e-12);

  std::mt19937_64 rng(22);
  for (int d = 1; d <= 6; ++d) {
    const auto pz = embed(make(Family::ProductZ, 1.7), random_x(rng, d));
    CHECK(std::abs(std::abs(pz[0]) - 1.0) < 1e-14);
  }

  const auto h1 = embed(make(Family::Heisenberg, 0.0), random_x(rng, 4));
  const auto h2 = embed(make(Family::Heisenberg, 0.0), random_x(rng, 4));
  CHECK(max_diff(h1.amplitudes(), h2.amplitudes()) < 1e-14);
}

TEST_CASE("embedded states have unit norm") {
  std::mt19937_64 rng(23);
  for (Family f : {Family::IQP, Family::ClassicalIQP, Family::Heisenberg, Family::ProductZ}) {
    for (int d = 2; d <= 10; ++d) {
      const auto s = embed(make(f, 2.1, 1.0), random_x(rng, d));
      CHECK(std::abs(s.norm() - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("lambda acts as a rescaling of the data") {
  std::mt19937_64 rng(24);
  for (Family f : {Family::IQP, Family::ClassicalIQP, Family::ProductZ}) {
    for (int d = 1; d <= 6; ++d) {
      const auto x = random_x(rng, d);
      const double lam = 0.3 + d * 0.4;
      std::vector<double> scaled = x;
      for (double& v : scaled) v *= lam;
      const auto a = embed(make(f, lam, 2.0), x);
      const auto b = embed(make(f, 1.0, 2.0), scaled);
      CHECK(max_diff(a.amplitudes(), b.amplitudes()) < 1e-12);
    }
  }
}

TEST_CASE("embeddings match dense Kronecker oracles for d <= 3") {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> lam_dist(0.05, 3.0);
  const double alphas[] = {0.5, 1.0, 2.0};
  for (int d = 1; d <= 3; ++d) {
    for (int t = 0; t < 10; ++t) {
      const auto x = random_x(rng, d);
      const double lam = lam_dist(rng);
      const double alpha = alphas[t % 3];
      CHECK(max_diff(embed(make(Family::IQP, lam, alpha), x).amplitudes(),
                     oracle::iqp_state(x, lam, alpha)) < 1e-10);
      CHECK(max_diff(embed(make(Family::ClassicalIQP, lam, alpha), x).amplitudes(),
                     oracle::classical_iqp_state(x, lam, alpha)) < 1e-10);
      CHECK(max_diff(embed(make(Family::ProductZ, lam), x).amplitudes(), oracle::product_z_state(x, lam)) <
            1e-10);
      if (d >= 2) {
        for (Boundary b : {Boundary::Open, Boundary::Periodic}) {
          CHECK(max_diff(embed(make(Family::Heisenberg, lam, 2.0, b), x).amplitudes(),
                         oracle::heisenberg_state(x, lam, 4, b == Boundary::Periodic)) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("heisenberg site hamiltonian") {
  const Eigen::Matrix4cd h = heisenberg_site_hamiltonian(0.8, 0.5);
  // Local basis index bit(q1) + 2 bit(q2): kron(A_q2, A_q1).
  const Eigen::Matrix4cd ref =
      kSpinFactor * kSpinFactor *
          (oracle::kron(oracle::pauli('X'), oracle::pauli('X')) + oracle::kron(oracle::pauli('Y'), oracle::pauli('Y')) +
           oracle::kron(oracle::pauli('Z'), oracle::pauli('Z'))) +
      0.8 * 0.5 * oracle::kron(oracle::pauli('I'), oracle::pauli('Z'));
  CHECK(max_diff(h, ref) < 1e-15);
}

TEST_CASE("heisenberg layer count") {
  std::mt19937_64 rng(26);
  const auto x = random_x(rng, 3);
  FeatureMapSpec s = make(Family::Heisenberg, 1.1);
  for (int layers : {1, 2, 4}) {
    s.n_layers = layers;
    CHECK(phase_free_distance(embed(s, x).amplitudes(), oracle::heisenberg_state(x, 1.1, layers, false)) < 1e-10);
  }
}

TEST_CASE("spec validation") {
  CHECK_NOTHROW(make(Family::IQP, 0.0).validate());
  CHECK_THROWS_AS(make(Family::IQP, -1.0).validate(), ValidationError);
  CHECK_THROWS_AS(make(Family::IQP, std::numeric_limits<double>::quiet_NaN()).validate(), ValidationError);
  CHECK_THROWS_AS(make(Family::IQP, 1.0, 0.0).validate(), ValidationError);
  FeatureMapSpec h = make(Family::Heisenberg, 1.0);
  h.n_layers = 0;
  CHECK_THROWS_AS(h.validate(), ValidationError);
  // Fields a family does not use are ignored.
  FeatureMapSpec p = make(Family::ProductZ, 1.0, -5.0);
  p.n_layers = 0;
  CHECK_NOTHROW(p.validate());
  CHECK_THROWS_AS(embed(make(Family::Heisenberg, 1.0), std::vector<double>{0.3}), ValidationError);
  CHECK_THROWS_AS(embed(make(Family::IQP, 1.0), std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(embed(make(Family::IQP, 1.0), std::vector<double>{0.1, std::nan("")}), ValidationError);
}

TEST_CASE("family and boundary names") {
  CHECK(parse_family("IQP") == Family::IQP);
  CHECK(parse_family("classical-iqp") == Family::ClassicalIQP);
  CHECK(parse_family("ClassicalIQP") == Family::ClassicalIQP);
  CHECK(parse_family("heisenberg") == Family::Heisenberg);
  CHECK(parse_family("product-z") == Family::ProductZ);
  CHECK(parse_family("productz") == Family::ProductZ);
  CHECK_THROWS_AS(parse_family("rbf"), ValidationError);
  for (Family f : {Family::IQP, Family::ClassicalIQP, Family::Heisenberg, Family::ProductZ})
    CHECK(parse_family(to_string(f)) == f);
  for (Boundary b : {Boundary::Open, Boundary::Periodic}) CHECK(parse_boundary(to_string(b)) == b);
  CHECK(classical_counterpart(Family::IQP) == Family::ClassicalIQP);
  CHECK(classical_counterpart(Family::Heisenberg) == Family::ProductZ);
  CHECK(classical_counterpart(Family::ProductZ) == Family::ProductZ);
}

}
