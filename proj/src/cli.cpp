#include "qkernel/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "qkernel/data.hpp"
#include "qkernel/error.hpp"
#include "qkernel/experiment.hpp"
#include "qkernel/kernel.hpp"
#include "qkernel/rng.hpp"
#include "qkernel/spectral.hpp"
#include "qkernel/svm.hpp"
#include "qkernel/tuning.hpp"

namespace qk {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct MapOptions {
  std::string family = "iqp";
  double lambda = 1.0;
  double alpha = 2.0;
  int layers = 4;
  std::string boundary = "open";

  void add(CLI::App* app, const char* family_flag = "--map") {
    app->add_option(family_flag, family, "Feature map: iqp, classical-iqp, heisenberg, productz")
        ->capture_default_str();
    app->add_option("--lambda", lambda, "Bandwidth scaling factor")->capture_default_str();
    app->add_option("--alpha", alpha, "Pair-term exponent (IQP families)")->capture_default_str();
    app->add_option("--layers", layers, "Heisenberg layer count")->capture_default_str();
    app->add_option("--boundary", boundary, "Heisenberg boundary: open or periodic")->capture_default_str();
  }

  FeatureMapSpec spec() const {
    FeatureMapSpec s;
    s.family = parse_family(family);
    s.lambda = lambda;
    s.alpha = alpha;
    s.n_layers = layers;
    s.boundary = parse_boundary(boundary);
    s.validate();
    return s;
  }
};

struct GridOptions {
  double lo = -1.5;
  double hi = 0.5;
  int points = 17;

  void add(CLI::App* app, const std::string& prefix = "--lambda") {
    app->add_option(prefix + "-min-exp", lo, "log10 of the smallest grid lambda")->capture_default_str();
    app->add_option(prefix + "-max-exp", hi, "log10 of the largest grid lambda")->capture_default_str();
    app->add_option(prefix + "-points", points, "Number of grid points")->capture_default_str();
  }

  std::vector<double> grid() const { return log_grid(lo, hi, points); }
};

json spec_json(const FeatureMapSpec& s) {
  return {{"family", std::string(to_string(s.family))},
          {"lambda", s.lambda},
          {"alpha", s.alpha},
          {"n_layers", s.n_layers},
          {"boundary", std::string(to_string(s.boundary))}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

fs::path sidecar(const fs::path& p) { return fs::path(p.string() + ".json"); }

/// Seed recorded in the sidecar of a generated dataset, if any.
std::optional<std::uint64_t> dataset_seed(const fs::path& data) {
  std::ifstream in(sidecar(data));
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    if (j.contains("seed") && j.at("seed").is_number_unsigned()) return j.at("seed").get<std::uint64_t>();
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

std::optional<double> kernel_lambda(const fs::path& kernel) {
  std::ifstream in(sidecar(kernel));
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    if (j.contains("spec") && j.at("spec").is_object()) return j.at("spec").at("lambda").get<double>();
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

Eigen::MatrixXd read_kernel(const std::string& path) {
  Eigen::MatrixXd k = read_matrix_csv(path);
  if (k.rows() != k.cols()) {
    throw ValidationError(path + " is " + std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                          ", expected a square kernel matrix");
  }
  return k;
}

Eigen::VectorXd labels_of(const std::string& path) {
  Dataset d = load_dataset_csv(path);
  if (!d.labels) throw ValidationError(path + " has no label column");
  return *d.labels;
}

std::string tuned_header() {
  return "n_qubits,target_gamma_max,lambda,realized_gamma_max,within_tolerance";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool& json_errors) {
  CLI::App app{"Fidelity-kernel simulation and analysis toolkit", "qkernel"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(QKERNEL_VERSION));
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all logical cores)")->capture_default_str();
  app.add_flag("--json-errors", json_errors, "Report failures on stderr as JSON");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Sample a generalized-normal dataset");
  GenNormSpec gen_spec;
  int gen_n = 0, gen_dim = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out, gen_scaling = "column-maxabs", gen_labels = "none";
  bool gen_raw = false;
  gen->add_option("--beta", gen_spec.beta, "Shape parameter beta > 0")->capture_default_str();
  gen->add_option("--r", gen_spec.r, "Adjacent-feature correlation in [0, 1)")->capture_default_str();
  gen->add_option("--n", gen_n, "Number of points")->required();
  gen->add_option("--dim", gen_dim, "Dimension (qubit count)")->required();
  gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  gen->add_option("--scaling", gen_scaling, "column-maxabs or global-maxabs")->capture_default_str();
  gen->add_flag("--raw", gen_raw, "Skip standardization and scaling");
  gen->add_option("--labels", gen_labels, "Label rule: none or sign (sign of feature 0)")
      ->capture_default_str();
  gen->add_option("--out", gen_out, "Output CSV path")->required();

  // kernel
  auto* ker = app.add_subcommand("kernel", "Build a fidelity kernel matrix");
  MapOptions ker_map;
  ker_map.add(ker);
  std::string ker_data, ker_test, ker_out;
  ker->add_option("--data", ker_data, "Dataset CSV")->required();
  ker->add_option("--test", ker_test, "Second dataset: write the test x train cross kernel");
  ker->add_option("--out", ker_out, "Output CSV path (default: stdout)");

  // spectrum
  auto* spec = app.add_subcommand("spectrum", "Normalized eigenvalues of a kernel matrix");
  std::string spec_kernel;
  int spec_top = 0;
  bool spec_gamma = false;
  spec->add_option("--kernel", spec_kernel, "Kernel CSV")->required();
  spec->add_option("--top", spec_top, "Print only the largest k values");
  spec->add_flag("--gamma-max", spec_gamma, "Print only the largest value");

  // gd
  auto* gd = app.add_subcommand("gd", "Geometric difference g(K1 || K2)");
  std::string gd_k1, gd_k2;
  PsdFunctionConfig gd_cfg;
  bool gd_no_clip = false;
  gd->add_option("--k1", gd_k1, "Kernel in the inverted slot (classical)")->required();
  gd->add_option("--k2", gd_k2, "Kernel in the square-root slot (quantum)")->required();
  gd->add_option("--eps", gd_cfg.eps_rel, "Relative inversion jitter")->capture_default_str();
  gd->add_flag("--no-clip", gd_no_clip, "Do not clip negative eigenvalues");

  // svm
  auto* svm = app.add_subcommand("svm", "Train or evaluate an SVM on precomputed kernels");
  std::string svm_kernel, svm_labels, svm_model_out, svm_model, svm_cross, svm_test_labels;
  double svm_c = 1.0;
  SvmOptions svm_opt;
  svm->add_option("--kernel", svm_kernel, "Training kernel CSV");
  svm->add_option("--labels", svm_labels, "Labelled training dataset CSV");
  svm->add_option("--C", svm_c, "Regularization C > 0")->capture_default_str();
  svm->add_option("--tol", svm_opt.tol, "KKT tolerance")->capture_default_str();
  svm->add_option("--model-out", svm_model_out, "Write the trained model as JSON");
  svm->add_option("--model", svm_model, "Trained model JSON (evaluate instead of train)");
  svm->add_option("--cross", svm_cross, "Test x train cross kernel CSV");
  svm->add_option("--test-labels", svm_test_labels, "Labelled test dataset CSV");

  // tune-gamma
  auto* tune = app.add_subcommand("tune-gamma", "gamma_max curve and lambda for target gamma_max");
  MapOptions tune_map;
  tune_map.add(tune);
  GridOptions tune_grid;
  tune_grid.add(tune);
  GenNormSpec tune_data;
  std::string tune_scaling = "column-maxabs", tune_curve_out;
  int tune_points = 200, tune_reps = 3;
  std::uint64_t tune_seed = 0;
  std::vector<int> tune_qubits;
  std::vector<double> tune_targets;
  tune->add_option("--beta", tune_data.beta, "Data shape beta")->capture_default_str();
  tune->add_option("--r", tune_data.r, "Data correlation r")->capture_default_str();
  tune->add_option("--scaling", tune_scaling, "column-maxabs or global-maxabs")->capture_default_str();
  tune->add_option("--n-points", tune_points, "Points per dataset")->capture_default_str();
  tune->add_option("--qubits", tune_qubits, "Qubit counts, comma separated")->required()->delimiter(',');
  tune->add_option("--target", tune_targets, "Target gamma_max values, comma separated")->delimiter(',');
  tune->add_option("--replicates", tune_reps, "Datasets per cell")->capture_default_str();
  tune->add_option("--seed", tune_seed, "RNG seed")->capture_default_str();
  tune->add_option("--curve-out", tune_curve_out, "Write the curve CSV here");

  // min-gd
  auto* mgd = app.add_subcommand("min-gd", "Minimum g_d over a classical lambda grid");
  std::string mgd_kq, mgd_data;
  MapOptions mgd_map;
  mgd_map.family = "classical-iqp";
  mgd_map.add(mgd, "--classical");
  GridOptions mgd_grid;
  mgd_grid.add(mgd);
  PsdFunctionConfig mgd_cfg;
  std::optional<double> mgd_qlambda;
  mgd->add_option("--kq", mgd_kq, "Quantum kernel CSV")->required();
  mgd->add_option("--data", mgd_data, "Dataset CSV the quantum kernel was built on")->required();
  mgd->add_option("--quantum-lambda", mgd_qlambda, "Quantum lambda (default: from the kernel sidecar)");
  mgd->add_option("--eps", mgd_cfg.eps_rel, "Relative inversion jitter")->capture_default_str();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a declarative experiment");
  std::string exp_config, exp_preset, exp_kind, exp_out;
  std::optional<std::uint64_t> exp_seed;
  std::optional<int> exp_reps, exp_points;
  std::vector<int> exp_qubits;
  std::vector<double> exp_targets;
  bool exp_dump = false, exp_progress = false;
  exp->add_option("--config", exp_config, "Experiment config JSON");
  exp->add_option("--preset", exp_preset, "desk or full");
  exp->add_option("--kind", exp_kind,
                  "spectrum-curve, fixed-gamma-gd, gd-vs-n, real-data, correlated-gd");
  exp->add_option("--out", exp_out, "Output directory");
  exp->add_option("--seed", exp_seed, "Override the seed");
  exp->add_option("--replicates", exp_reps, "Override the replicate count");
  exp->add_option("--n-points", exp_points, "Override the dataset size");
  exp->add_option("--qubits", exp_qubits, "Override the qubit list")->delimiter(',');
  exp->add_option("--targets", exp_targets, "Override the gamma_max targets")->delimiter(',');
  exp->add_flag("--dump-config", exp_dump, "Print the effective config and exit");
  exp->add_flag("--progress", exp_progress, "Report progress on stderr");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  }

  KernelOptions kopt;
  kopt.threads = threads;

  if (gen->parsed()) {
    gen_spec.scaling = parse_scaling(gen_scaling);
    if (gen_labels != "none" && gen_labels != "sign") {
      throw ValidationError("--labels must be none or sign");
    }
    if (gen_n < 2 || gen_dim < 1) throw ValidationError("--n must be >= 2 and --dim >= 1");
    Dataset d;
    if (gen_raw) {
      d.points = sample_raw_points(gen_spec, gen_n, gen_dim, gen_seed);
      d.seed = gen_seed;
      d.preprocessing = {"gennorm"};
    } else {
      d = sample_dataset(gen_spec, gen_n, gen_dim, gen_seed);
    }
    if (gen_labels == "sign") {
      d.labels = d.points.col(0).unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
      d.preprocessing.push_back("labels=sign(f0)");
    }
    write_dataset_csv(gen_out, d);
    json meta = {{"seed", gen_seed},
                 {"spec", {{"beta", gen_spec.beta}, {"r", gen_spec.r}, {"scaling", gen_scaling}}},
                 {"n_points", gen_n},
                 {"dim", gen_dim},
                 {"preprocessing", d.preprocessing},
                 {"rng_algorithm", std::string(Rng::kAlgorithm)}};
    write_text(sidecar(gen_out), meta.dump(2) + "\n");
    return kExitOk;
  }

  if (ker->parsed()) {
    const FeatureMapSpec s = ker_map.spec();
    const Dataset train = load_dataset_csv(ker_data);
    Eigen::MatrixXd k;
    if (ker_test.empty()) {
      k = build_kernel(s, train, kopt).entries;
      const KernelCheck check = check_kernel_invariants(k);
      if (!check.problem.empty()) throw NumericalError("kernel invariant violated: " + check.problem);
    } else {
      k = cross_kernel(s, train.points, load_dataset_csv(ker_test).points, kopt);
    }
    if (ker_out.empty()) {
      for (Eigen::Index i = 0; i < k.rows(); ++i) {
        for (Eigen::Index j = 0; j < k.cols(); ++j)
          out << (j ? "," : "") << format_number(std::clamp(k(i, j), 0.0, 1.0));
        out << '\n';
      }
      return kExitOk;
    }
    write_kernel_csv(ker_out, k);
    const auto seed = dataset_seed(ker_data);
    json meta = {{"spec", spec_json(s)},
                 {"n_qubits", train.dim()},
                 {"P", train.size()},
                 {"kind", ker_test.empty() ? "gram" : "cross"},
                 {"seed", seed ? json(*seed) : json(nullptr)},
                 {"data_file", ker_data},
                 {"data_sha256", sha256_file(ker_data)},
                 {"rng_algorithm", std::string(Rng::kAlgorithm)},
                 {"library_version", QKERNEL_VERSION}};
    if (!ker_test.empty()) meta["test_sha256"] = sha256_file(ker_test);
    write_text(sidecar(ker_out), meta.dump(2) + "\n");
    return kExitOk;
  }

  if (spec->parsed()) {
    const Spectrum sp = normalized_spectrum(read_kernel(spec_kernel));
    Eigen::Index count = sp.values.size();
    if (spec_gamma) count = 1;
    else if (spec_top > 0) count = std::min<Eigen::Index>(count, spec_top);
    for (Eigen::Index i = 0; i < count; ++i) out << format_number(sp.values[i]) << '\n';
    return kExitOk;
  }

  if (gd->parsed()) {
    gd_cfg.clip_negative = !gd_no_clip;
    gd_cfg.validate();
    out << format_number(geometric_difference(read_kernel(gd_k1), read_kernel(gd_k2), gd_cfg)) << '\n';
    return kExitOk;
  }

  if (svm->parsed()) {
    if (!svm_model.empty()) {
      if (svm_cross.empty()) throw ValidationError("--model needs --cross");
      std::ifstream in(svm_model, std::ios::binary);
      if (!in) throw ValidationError("cannot read " + svm_model);
      std::ostringstream ss;
      ss << in.rdbuf();
      const SvmModel m = svm_model_from_json(ss.str());
      const Eigen::MatrixXd kx = read_matrix_csv(svm_cross);
      if (!svm_test_labels.empty()) {
        out << "test_score=" << format_number(svm_test_score(m, kx, labels_of(svm_test_labels))) << '\n';
      } else {
        const SvmPrediction p = svm_predict(m, kx);
        out << "label,decision\n";
        for (Eigen::Index i = 0; i < p.labels.size(); ++i)
          out << (p.labels[i] > 0 ? "1" : "-1") << ',' << format_number(p.decision[i]) << '\n';
      }
      return kExitOk;
    }
    if (svm_kernel.empty() || svm_labels.empty()) {
      throw ValidationError("svm needs --kernel and --labels to train, or --model and --cross");
    }
    const Eigen::MatrixXd k = read_kernel(svm_kernel);
    const Eigen::VectorXd y = labels_of(svm_labels);
    const SvmModel m = svm_train(k, y, svm_c, svm_opt);
    const SvmPrediction p = svm_predict(m, k);
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) correct += p.labels[i] == y[i];
    out << "converged=" << (m.converged ? 1 : 0) << '\n'
        << "iterations=" << m.iterations << '\n'
        << "support_vectors=" << m.support_indices.size() << '\n'
        << "bias=" << format_number(m.bias) << '\n'
        << "kkt_violation=" << format_number(svm_kkt_violation(m, k)) << '\n'
        << "train_accuracy=" << format_number(static_cast<double>(correct) / static_cast<double>(y.size()))
        << '\n';
    if (!svm_cross.empty() && !svm_test_labels.empty()) {
      out << "test_score="
          << format_number(svm_test_score(m, read_matrix_csv(svm_cross), labels_of(svm_test_labels))) << '\n';
    }
    if (!svm_model_out.empty()) write_text(svm_model_out, svm_model_to_json(m) + "\n");
    return kExitOk;
  }

  if (tune->parsed()) {
    CurveRequest req;
    req.map = tune_map.spec();
    req.data = tune_data;
    req.data.scaling = parse_scaling(tune_scaling);
    req.n_points = tune_points;
    req.qubits = tune_qubits;
    req.lambdas = tune_grid.grid();
    req.replicates = tune_reps;
    req.seed = tune_seed;
    req.threads = threads;
    const TuneCurve curve = gamma_max_curve(req);
    if (!tune_curve_out.empty()) write_curve_csv(tune_curve_out, curve);
    if (tune_targets.empty()) {
      out << kCurveCsvHeader << '\n';
      for (const auto& p : curve.points) out << curve_csv_row(p) << '\n';
      return kExitOk;
    }
    out << tuned_header() << '\n';
    for (int n : tune_qubits) {
      for (double t : tune_targets) {
        const TunedLambda r = tune_lambda(curve, req, n, t);
        if (!r.within_tolerance) warn(r.warning);
        out << n << ',' << format_number(t) << ',' << format_number(r.lambda) << ','
            << format_number(r.realized_gamma) << ',' << (r.within_tolerance ? 1 : 0) << '\n';
      }
    }
    return kExitOk;
  }

  if (mgd->parsed()) {
    KernelMatrix kq;
    kq.entries = read_kernel(mgd_kq);
    const Dataset d = load_dataset_csv(mgd_data);
    kq.n_qubits = static_cast<int>(d.dim());
    const auto ql = mgd_qlambda ? mgd_qlambda : kernel_lambda(mgd_kq);
    if (ql) {
      FeatureMapSpec q;
      q.lambda = *ql;
      kq.spec = q;
    }
    mgd_cfg.validate();
    const GdResult r = min_gd_over_classical(kq, mgd_map.spec(), mgd_grid.grid(), d, mgd_cfg, threads);
    out << kGdCsvHeader << '\n' << gd_csv_row(r) << '\n';
    return kExitOk;
  }

  if (exp->parsed()) {
    if (!exp_config.empty() && !exp_preset.empty()) {
      throw ValidationError("--config and --preset are mutually exclusive");
    }
    ExperimentConfig cfg;
    if (!exp_config.empty()) {
      cfg = load_config(exp_config);
      if (!exp_kind.empty()) cfg.kind = parse_experiment_kind(exp_kind);
    } else {
      const ExperimentKind kind =
          exp_kind.empty() ? ExperimentKind::SpectrumCurve : parse_experiment_kind(exp_kind);
      cfg = preset_config(exp_preset.empty() ? "desk" : exp_preset, kind);
    }
    if (!exp_out.empty()) cfg.output_dir = exp_out;
    if (exp_seed) cfg.seed = *exp_seed;
    if (exp_reps) cfg.replicates = *exp_reps;
    if (exp_points) cfg.data.n_points = *exp_points;
    if (!exp_qubits.empty()) cfg.qubits = exp_qubits;
    if (!exp_targets.empty()) cfg.gamma_targets = exp_targets;
    if (exp_dump) {
      cfg.validate();
      out << config_to_json(cfg) << '\n';
      return kExitOk;
    }
    RunOptions ropt;
    ropt.threads = threads;
    ropt.quiet = !exp_progress;
    const ExperimentResult res = run_experiment(cfg, ropt);
    out << "output_dir=" << res.output_dir.string() << '\n';
    for (const auto& f : res.files) out << f.path << ' ' << f.sha256 << '\n';
    out << "manifest.json\n";
    return kExitOk;
  }
  return kExitValidation;
}

void report(std::ostream& err, bool as_json, const char* kind, int code, const std::string& message) {
  if (as_json) {
    err << json{{"error", kind}, {"exit_code", code}, {"message", message}}.dump() << '\n';
  } else {
    err << "error: " << message << '\n';
  }
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  bool json_errors = std::find(args.begin(), args.end(), "--json-errors") != args.end();
  try {
    return run(args, out, err, json_errors);
  } catch (const CLI::ParseError& e) {
    report(err, json_errors, "usage", kExitValidation, e.what());
    return kExitValidation;
  } catch (const ValidationError& e) {
    report(err, json_errors, "validation", kExitValidation, e.what());
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    report(err, json_errors, "validation", kExitValidation, e.what());
    return kExitValidation;
  } catch (const NumericalError& e) {
    report(err, json_errors, "numerical", kExitNumerical, e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    report(err, json_errors, "numerical", kExitNumerical, e.what());
    return kExitNumerical;
  }
}

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_dispatch(args, out, err);
}

}  // namespace qk
