#include "qkernel/tuning.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "qkernel/error.hpp"
#include "qkernel/parallel.hpp"
#include "qkernel/rng.hpp"

namespace qk {

namespace {

/// Runs independent grid cells. With at least as many cells as workers the
/// cells run in parallel with single-threaded kernels; otherwise cells run in
/// order and each kernel gets the whole pool.
template <class Fn>
void run_cells(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = default_threads();
  if (count >= threads) {
    parallel_for(count, threads, [&](std::size_t i) { fn(i, 1u); });
  } else {
    for (std::size_t i = 0; i < count; ++i) fn(i, threads);
  }
}

}  // namespace

std::vector<double> log_grid(double lo_exp, double hi_exp, int points) {
  if (points < 1) throw ValidationError("grid needs at least one point");
  if (points == 1) return {std::pow(10.0, lo_exp)};
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    grid[static_cast<std::size_t>(k)] = std::pow(10.0, lo_exp + (hi_exp - lo_exp) * k / (points - 1));
  }
  return grid;
}

std::vector<double> default_lambda_grid() { return log_grid(-1.5, 0.5, 17); }

std::vector<CurvePoint> TuneCurve::at(int n_qubits) const {
  std::vector<CurvePoint> out;
  for (const auto& p : points)
    if (p.n_qubits == n_qubits) out.push_back(p);
  std::stable_sort(out.begin(), out.end(),
                   [](const CurvePoint& a, const CurvePoint& b) { return a.lambda < b.lambda; });
  return out;
}

std::uint64_t replicate_seed(std::uint64_t seed, std::string_view purpose, int n_qubits,
                             int n_points, int rep) {
  const std::string name = std::string(purpose) + "/n=" + std::to_string(n_qubits) +
                           "/P=" + std::to_string(n_points) + "/rep=" + std::to_string(rep);
  return Rng::derive_seed(seed, name);
}

TuneCurve gamma_max_curve(const CurveRequest& req) {
  if (req.qubits.empty()) throw ValidationError("qubit list is empty");
  if (req.lambdas.empty()) throw ValidationError("lambda grid is empty");
  if (req.replicates < 1) throw ValidationError("replicates must be >= 1");
  for (double l : req.lambdas)
    if (!(l > 0.0)) throw ValidationError("lambda grid values must be positive");
  req.data.validate();
  req.map.validate();

  const std::size_t nq = req.qubits.size();
  const std::size_t nl = req.lambdas.size();
  const auto nr = static_cast<std::size_t>(req.replicates);

  std::vector<Dataset> datasets(nq * nr);
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t r = 0; r < nr; ++r) {
      datasets[q * nr + r] = sample_dataset(
          req.data, req.n_points, req.qubits[q],
          replicate_seed(req.seed, "curve", req.qubits[q], static_cast<int>(req.n_points),
                         static_cast<int>(r)));
    }
  }

  std::vector<double> gammas(nq * nl * nr);
  run_cells(gammas.size(), req.threads, [&](std::size_t cell, unsigned inner) {
    const std::size_t q = cell / (nl * nr);
    const std::size_t l = (cell / nr) % nl;
    const std::size_t r = cell % nr;
    FeatureMapSpec spec = req.map;
    spec.lambda = req.lambdas[l];
    KernelOptions opt;
    opt.threads = inner;
    gammas[cell] = gamma_max(build_kernel(spec, datasets[q * nr + r], opt).entries);
  });

  TuneCurve curve;
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t l = 0; l < nl; ++l) {
      const double* g = &gammas[(q * nl + l) * nr];
      const double mean = std::accumulate(g, g + nr, 0.0) / static_cast<double>(nr);
      double var = 0.0;
      for (std::size_t r = 0; r < nr; ++r) var += (g[r] - mean) * (g[r] - mean);
      const double sd = nr > 1 ? std::sqrt(var / static_cast<double>(nr - 1)) : 0.0;
      curve.points.push_back({req.qubits[q], req.lambdas[l], mean, sd, req.replicates});
    }
  }
  return curve;
}

double lambda_for_target_gamma(const TuneCurve& curve, int n_qubits, double target) {
  const auto pts = curve.at(n_qubits);
  if (pts.empty()) {
    throw ValidationError("curve has no points at " + std::to_string(n_qubits) + " qubits");
  }
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (pts[k].gamma_mean == target) return pts[k].lambda;
    if (k + 1 == pts.size()) break;
    const double g0 = pts[k].gamma_mean;
    const double g1 = pts[k + 1].gamma_mean;
    if ((g0 - target) * (g1 - target) < 0.0) {
      const double t = (target - g0) / (g1 - g0);
      const double l0 = std::log(pts[k].lambda);
      const double l1 = std::log(pts[k + 1].lambda);
      return std::exp(l0 + t * (l1 - l0));
    }
  }
  throw ValidationError("target gamma_max " + format_number(target) +
                        " is outside the achievable range at " + std::to_string(n_qubits) +
                        " qubits");
}

TunedLambda tune_lambda(const TuneCurve& curve, const CurveRequest& req, int n_qubits,
                        double target) {
  TunedLambda out;
  out.target = target;
  out.lambda = lambda_for_target_gamma(curve, n_qubits, target);
  FeatureMapSpec spec = req.map;
  spec.lambda = out.lambda;
  if (req.replicates < 1) throw ValidationError("replicates must be >= 1");
  const auto nr = static_cast<std::size_t>(req.replicates);
  out.realized_replicates.resize(nr);
  run_cells(nr, req.threads, [&](std::size_t r, unsigned inner) {
    const Dataset fresh = sample_dataset(
        req.data, req.n_points, n_qubits,
        replicate_seed(req.seed, "tune-check", n_qubits, static_cast<int>(req.n_points),
                       static_cast<int>(r)));
    KernelOptions opt;
    opt.threads = inner;
    out.realized_replicates[r] = gamma_max(build_kernel(spec, fresh, opt).entries);
  });
  out.realized_gamma = std::accumulate(out.realized_replicates.begin(), out.realized_replicates.end(), 0.0) /
                       static_cast<double>(nr);
  out.within_tolerance = std::abs(out.realized_gamma - target) <= kGammaRelTolerance * target;
  if (!out.within_tolerance) {
    out.warning = "realized gamma_max " + format_number(out.realized_gamma) + " is more than 20% from target " +
                  format_number(target) + " at " + std::to_string(n_qubits) + " qubits";
  }
  return out;
}

GdResult min_gd_over_classical(const KernelMatrix& k_quantum, const FeatureMapSpec& classical,
                               const std::vector<double>& lambdas, const Dataset& data,
                               const PsdFunctionConfig& cfg, unsigned threads) {
  if (lambdas.empty()) throw ValidationError("classical lambda grid is empty");
  if (k_quantum.size() != data.size()) {
    throw ValidationError("quantum kernel size " + std::to_string(k_quantum.size()) +
                          " does not match the dataset size " + std::to_string(data.size()));
  }
  const Eigen::MatrixXd sqrt_q = mat_sqrt_psd(k_quantum.entries, cfg);
  const double quantum_lambda = k_quantum.spec ? k_quantum.spec->lambda : 0.0;

  // Grid cells plus one extra cell for the matched lambda when it is off-grid.
  const bool matched_on_grid =
      k_quantum.spec && std::find(lambdas.begin(), lambdas.end(), quantum_lambda) != lambdas.end();
  const bool want_matched = k_quantum.spec && quantum_lambda > 0.0;
  std::vector<double> cell_lambda = lambdas;
  if (want_matched && !matched_on_grid) cell_lambda.push_back(quantum_lambda);

  std::vector<double> gd(cell_lambda.size());
  run_cells(cell_lambda.size(), threads, [&](std::size_t i, unsigned inner) {
    FeatureMapSpec spec = classical;
    spec.lambda = cell_lambda[i];
    KernelOptions opt;
    opt.threads = inner;
    const KernelMatrix kc = build_kernel(spec, data, opt);
    gd[i] = geometric_difference_with_sqrt(kc.entries, sqrt_q, cfg);
  });

  GdResult res;
  res.n_qubits = static_cast<int>(data.dim());
  res.quantum_lambda = quantum_lambda;
  res.sqrt_n = std::sqrt(static_cast<double>(data.size()));
  res.grid_gd.assign(gd.begin(), gd.begin() + static_cast<std::ptrdiff_t>(lambdas.size()));
  std::size_t best = 0;
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (gd[i] < gd[best]) best = i;
  res.gd_min = gd[best];
  res.classical_lambda_star = lambdas[best];
  if (want_matched) {
    if (matched_on_grid) {
      const auto it = std::find(lambdas.begin(), lambdas.end(), quantum_lambda);
      res.gd_matched = gd[static_cast<std::size_t>(it - lambdas.begin())];
    } else {
      res.gd_matched = gd.back();
    }
  } else {
    res.gd_matched = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

TestScoreResult best_testscore_search(const Dataset& data, const TestScoreRequest& req) {
  if (!data.labels) throw ValidationError("test-score search needs labelled data");
  if (req.lambdas.empty() || req.cs.empty()) throw ValidationError("lambda and C grids must be non-empty");
  data.validate();
  auto [train, test] = train_test_split(data, req.n_train, req.n_test, req.seed);
  if (test.size() == 0) throw ValidationError("test set is empty");

  const std::size_t nl = req.lambdas.size();
  const std::size_t nc = req.cs.size();
  std::vector<ScoreCell> cells(nl * nc);
  std::vector<SvmModel> models(nl * nc);

  run_cells(nl, req.threads, [&](std::size_t l, unsigned inner) {
    FeatureMapSpec spec = req.map;
    spec.lambda = req.lambdas[l];
    KernelOptions opt;
    opt.threads = inner;
    const KernelMatrix k_train = build_kernel(spec, train, opt);
    const Eigen::MatrixXd k_cross = cross_kernel(spec, train.points, test.points, opt);
    const KernelCheck check = check_kernel_invariants(k_train.entries);
    if (check.min_eigenvalue < -1e-8 * static_cast<double>(k_train.size())) {
      throw NumericalError("training kernel at lambda " + format_number(spec.lambda) + " is not PSD");
    }
    SvmOptions svm = req.svm;
    svm.check_psd = false;
    for (std::size_t c = 0; c < nc; ++c) {
      SvmModel m = svm_train(k_train.entries, *train.labels, req.cs[c], svm);
      cells[l * nc + c] = {spec.lambda, req.cs[c], svm_test_score(m, k_cross, *test.labels)};
      models[l * nc + c] = std::move(m);
    }
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const ScoreCell& a = cells[i];
    const ScoreCell& b = cells[best];
    if (a.test_score > b.test_score ||
        (a.test_score == b.test_score &&
         (a.lambda < b.lambda || (a.lambda == b.lambda && a.C < b.C)))) {
      best = i;
    }
  }
  TestScoreResult out;
  out.lambda = cells[best].lambda;
  out.C = cells[best].C;
  out.test_score = cells[best].test_score;
  out.model = std::move(models[best]);
  out.cells = std::move(cells);
  out.train = std::move(train);
  out.test = std::move(test);
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string curve_csv_row(const CurvePoint& p) {
  return std::to_string(p.n_qubits) + "," + format_number(p.lambda) + "," +
         format_number(p.gamma_mean) + "," + format_number(p.gamma_std) + "," +
         std::to_string(p.n_replicates);
}

std::string gd_csv_row(const GdResult& r) {
  return std::to_string(r.n_qubits) + "," + format_number(r.quantum_lambda) + "," +
         format_number(r.classical_lambda_star) + "," + format_number(r.gd_min) + "," +
         format_number(r.gd_matched) + "," + format_number(r.sqrt_n);
}

void write_curve_csv(const std::filesystem::path& path, const TuneCurve& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << kCurveCsvHeader << '\n';
  for (const auto& p : curve.points) out << curve_csv_row(p) << '\n';
}

}  // namespace qk
