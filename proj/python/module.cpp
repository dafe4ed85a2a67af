#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qkernel/cli.hpp"
#include "qkernel/data.hpp"
#include "qkernel/error.hpp"
#include "qkernel/experiment.hpp"
#include "qkernel/feature_map.hpp"
#include "qkernel/kernel.hpp"
#include "qkernel/spectral.hpp"
#include "qkernel/svm.hpp"
#include "qkernel/tuning.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

qk::FeatureMapSpec make_spec(const std::string& family, double lam, double alpha, int n_layers,
                             const std::string& boundary) {
  qk::FeatureMapSpec s;
  s.family = qk::parse_family(family);
  s.lambda = lam;
  s.alpha = alpha;
  s.n_layers = n_layers;
  s.boundary = qk::parse_boundary(boundary);
  s.validate();
  return s;
}

qk::PsdFunctionConfig psd(double eps_rel, bool clip_negative) {
  qk::PsdFunctionConfig c{eps_rel, clip_negative};
  c.validate();
  return c;
}

#define QK_MAP_ARGS                                                                       \
  py::arg("family") = "iqp", py::arg("lam") = 1.0, py::arg("alpha") = 2.0,                \
  py::arg("n_layers") = 4, py::arg("boundary") = "open"

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fidelity-kernel simulation and analysis";
  m.attr("__version__") = QKERNEL_VERSION;

  static py::exception<qk::ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
  static py::exception<qk::NumericalError> numerical_error(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const qk::ValidationError& e) {
      py::set_error(validation_error, e.what());
    } catch (const qk::NumericalError& e) {
      py::set_error(numerical_error, e.what());
    }
  });

  // Feature maps and kernels.
  m.def(
      "embed",
      [](const Eigen::VectorXd& x, const std::string& family, double lam, double alpha, int n_layers,
         const std::string& boundary) {
        return Eigen::VectorXcd(qk::embed(make_spec(family, lam, alpha, n_layers, boundary), x).amplitudes());
      },
      "x"_a, QK_MAP_ARGS, "Statevector of one data point (qubit 0 = least significant bit).");
  m.def(
      "iqp_phases",
      [](const std::vector<double>& x, double lam, double alpha) { return qk::iqp_phases(x, lam, alpha); },
      "x"_a, "lam"_a = 1.0, "alpha"_a = 2.0);
  m.def(
      "build_kernel",
      [](const Eigen::MatrixXd& points, const std::string& family, double lam, double alpha, int n_layers,
         const std::string& boundary, unsigned threads) {
        qk::KernelOptions opt;
        opt.threads = threads;
        py::gil_scoped_release release;
        return qk::build_kernel(make_spec(family, lam, alpha, n_layers, boundary), points, opt).entries;
      },
      "points"_a, QK_MAP_ARGS, "threads"_a = 1, "Fidelity kernel |<psi(x_i)|psi(x_j)>|^2 of the rows.");
  m.def(
      "cross_kernel",
      [](const Eigen::MatrixXd& train, const Eigen::MatrixXd& test, const std::string& family, double lam,
         double alpha, int n_layers, const std::string& boundary, unsigned threads) {
        qk::KernelOptions opt;
        opt.threads = threads;
        py::gil_scoped_release release;
        return qk::cross_kernel(make_spec(family, lam, alpha, n_layers, boundary), train, test, opt);
      },
      "train"_a, "test"_a, QK_MAP_ARGS, "threads"_a = 1);
  m.def(
      "normalized_spectrum",
      [](const Eigen::MatrixXd& k) { return Eigen::VectorXd(qk::normalized_spectrum(k).values); }, "k"_a,
      "Eigenvalues of K / P in descending order.");
  m.def("gamma_max", &qk::gamma_max, "k"_a);

  // Spectral diagnostics.
  m.def(
      "mat_sqrt_psd", [](const Eigen::MatrixXd& k, double eps_rel, bool clip) {
        return qk::mat_sqrt_psd(k, psd(eps_rel, clip));
      },
      "k"_a, "eps_rel"_a = 1e-10, "clip_negative"_a = true);
  m.def(
      "regularized_inverse", [](const Eigen::MatrixXd& k, double eps_rel, bool clip) {
        return qk::regularized_inverse(k, psd(eps_rel, clip));
      },
      "k"_a, "eps_rel"_a = 1e-10, "clip_negative"_a = true);
  m.def(
      "geometric_difference",
      [](const Eigen::MatrixXd& k1, const Eigen::MatrixXd& k2, double eps_rel, bool clip) {
        return qk::geometric_difference(k1, k2, psd(eps_rel, clip));
      },
      "k1"_a, "k2"_a, "eps_rel"_a = 1e-10, "clip_negative"_a = true,
      "g(K1 || K2); the classical kernel goes in the K1 slot.");
  m.def(
      "model_complexity",
      [](const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double eps_rel, bool clip) {
        return qk::model_complexity(k, y, psd(eps_rel, clip));
      },
      "k"_a, "y"_a, "eps_rel"_a = 1e-10, "clip_negative"_a = true);

  // Data.
  m.def("sample_gennorm", py::overload_cast<double, std::size_t, std::uint64_t>(&qk::sample_gennorm),
        "beta"_a, "count"_a, "seed"_a);
  m.def(
      "sample_dataset",
      [](double beta, double r, int n_points, int dim, std::uint64_t seed, const std::string& scaling) {
        qk::GenNormSpec s{beta, r, qk::parse_scaling(scaling)};
        return qk::sample_dataset(s, n_points, dim, seed).points;
      },
      "beta"_a = 1.0, "r"_a = 0.0, "n_points"_a = 200, "dim"_a = 4, "seed"_a = 0,
      "scaling"_a = "column-maxabs");
  m.def(
      "standardize_normalize",
      [](const Eigen::MatrixXd& points, const std::string& scaling) {
        return qk::standardize_normalize(points, qk::parse_scaling(scaling));
      },
      "points"_a, "scaling"_a = "column-maxabs");
  m.def("pca_reduce", &qk::pca_reduce, "points"_a, "n_components"_a);

  // SVM.
  py::class_<qk::SvmModel>(m, "SvmModel")
      .def_readonly("alphas", &qk::SvmModel::alphas)
      .def_readonly("bias", &qk::SvmModel::bias)
      .def_readonly("support_indices", &qk::SvmModel::support_indices)
      .def_readonly("C", &qk::SvmModel::C)
      .def_readonly("converged", &qk::SvmModel::converged)
      .def_readonly("iterations", &qk::SvmModel::iterations)
      .def("decision_function",
           [](const qk::SvmModel& s, const Eigen::MatrixXd& k_cross) {
             return Eigen::VectorXd(qk::svm_predict(s, k_cross).decision);
           })
      .def("predict",
           [](const qk::SvmModel& s, const Eigen::MatrixXd& k_cross) {
             return Eigen::VectorXd(qk::svm_predict(s, k_cross).labels);
           })
      .def("score", &qk::svm_test_score, "k_cross"_a, "y_test"_a)
      .def("to_json", &qk::svm_model_to_json)
      .def_static("from_json", &qk::svm_model_from_json);
  m.def(
      "svm_train",
      [](const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double C, double tol) {
        qk::SvmOptions opt;
        opt.tol = tol;
        return qk::svm_train(k, y, C, opt);
      },
      "k"_a, "y"_a, "C"_a = 1.0, "tol"_a = 1e-3);

  // Tuning.
  m.def(
      "gamma_max_curve",
      [](const std::vector<int>& qubits, const std::vector<double>& lambdas, const std::string& family,
         double alpha, double beta, double r, int n_points, int replicates, std::uint64_t seed,
         unsigned threads) {
        qk::CurveRequest req;
        req.map = make_spec(family, 1.0, alpha, 4, "open");
        req.data.beta = beta;
        req.data.r = r;
        req.n_points = n_points;
        req.qubits = qubits;
        if (!lambdas.empty()) req.lambdas = lambdas;
        req.replicates = replicates;
        req.seed = seed;
        req.threads = threads;
        qk::TuneCurve c;
        {
          py::gil_scoped_release release;
          c = qk::gamma_max_curve(req);
        }
        py::list rows;
        for (const auto& p : c.points) {
          rows.append(py::dict("n_qubits"_a = p.n_qubits, "lambda"_a = p.lambda,
                               "gamma_max_mean"_a = p.gamma_mean, "gamma_max_std"_a = p.gamma_std,
                               "n_replicates"_a = p.n_replicates));
        }
        return rows;
      },
      "qubits"_a, "lambdas"_a = std::vector<double>{}, "family"_a = "iqp", "alpha"_a = 2.0, "beta"_a = 1.0,
      "r"_a = 0.0, "n_points"_a = 200, "replicates"_a = 3, "seed"_a = 0, "threads"_a = 0,
      "Mean and std of gamma_max on a (qubits x lambda) grid; an empty lambda list uses the default grid.");
  m.def("default_lambda_grid", &qk::default_lambda_grid);
  m.def("log_grid", &qk::log_grid, "lo_exp"_a, "hi_exp"_a, "points"_a);

  // Experiments and the command line.
  m.def(
      "default_config",
      [](const std::string& kind, const std::string& preset) {
        return qk::config_to_json(qk::preset_config(preset, qk::parse_experiment_kind(kind)));
      },
      "kind"_a = "spectrum-curve", "preset"_a = "desk", "Experiment config as JSON text.");
  m.def(
      "run_experiment",
      [](const std::string& config_json, unsigned threads) {
        const qk::ExperimentConfig cfg = qk::config_from_json(config_json);
        qk::RunOptions opt;
        opt.threads = threads;
        qk::ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = qk::run_experiment(cfg, opt);
        }
        return res.output_dir.string();
      },
      "config_json"_a, "threads"_a = 0, "Runs an experiment and returns its output directory.");
  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = qk::cli_dispatch(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      "args"_a, "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
