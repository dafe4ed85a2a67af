#include "qkernel/experiment.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>
#include "json.hpp"

#include "qkernel/error.hpp"
#include "qkernel/kernel.hpp"
#include "qkernel/parallel.hpp"
#include "qkernel/rng.hpp"
#include "qkernel/tuning.hpp"

namespace qk {

using ojson = nlohmann::ordered_json;

namespace {

std::string lower_alnum(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void check_grid(const std::vector<double>& grid, const char* name, std::size_t min_points) {
  if (grid.size() < min_points) {
    throw ValidationError(std::string(name) + " needs at least " + std::to_string(min_points) +
                          " points, got " + std::to_string(grid.size()));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
      throw ValidationError(std::string(name) + " values must be positive and finite");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw ValidationError(std::string(name) + " must be strictly increasing");
    }
  }
}

bool uses_targets(ExperimentKind k) {
  return k == ExperimentKind::FixedGammaGd || k == ExperimentKind::GdVsN ||
         k == ExperimentKind::CorrelatedGd;
}

template <class T>
T get_or(const ojson& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void reject_unknown(const ojson& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ValidationError("unknown config key '" + where + k + "'");
  }
}

ojson config_json(const ExperimentConfig& c) {
  ojson j;
  j["kind"] = std::string(to_string(c.kind));
  j["map"] = {{"family", std::string(to_string(c.map.family))},
              {"lambda", c.map.lambda},
              {"alpha", c.map.alpha},
              {"n_layers", c.map.n_layers},
              {"boundary", std::string(to_string(c.map.boundary))}};
  j["classical_family"] = c.classical ? ojson(std::string(to_string(*c.classical))) : ojson(nullptr);
  j["data"] = {{"beta", c.data.gennorm.beta},
               {"r", c.data.gennorm.r},
               {"scaling", std::string(to_string(c.data.gennorm.scaling))},
               {"n_points", c.data.n_points},
               {"csv", c.data.csv},
               {"has_labels", c.data.has_labels}};
  j["qubits"] = c.qubits;
  j["n_points_list"] = c.n_points_list;
  j["lambdas"] = c.lambdas;
  j["classical_lambdas"] = c.classical_lambdas;
  j["cs"] = c.cs;
  j["gamma_targets"] = c.gamma_targets;
  j["correlations"] = c.correlations;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["n_train"] = c.n_train;
  j["n_test"] = c.n_test;
  j["psd"] = {{"eps_rel", c.psd.eps_rel}, {"clip_negative", c.psd.clip_negative}};
  j["svm"] = {{"tol", c.svm_tol}, {"max_sweeps", c.svm_max_sweeps}};
  j["output_dir"] = c.output_dir;
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) { return sha256_hex(config_to_json(cfg)); }

/// CSV file that is flushed after every row.
class CsvSink {
 public:
  CsvSink(const std::filesystem::path& dir, std::string name, std::string_view header,
          std::vector<std::string>& registry)
      : out_(dir / name, std::ios::binary) {
    if (!out_) throw ValidationError("cannot write " + (dir / name).string());
    registry.push_back(std::move(name));
    out_ << header << '\n';
    out_.flush();
  }
  void row(const std::string& line) {
    out_ << line << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

constexpr const char* kTunedHeader =
    "r,n_qubits,n_points,target_gamma_max,lambda,realized_gamma_max,realized_gamma_max_std,within_tolerance";

struct Runner {
  const ExperimentConfig& cfg;
  std::filesystem::path dir;
  unsigned threads;
  bool quiet;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  ojson dataset_seeds = ojson::array();

  void note(const std::string& msg) {
    warnings.push_back(msg);
    warn(msg);
  }

  void progress(const std::string& msg) const {
    if (!quiet) std::cerr << "[qkernel] " << msg << '\n';
  }

  void record_seed(const char* purpose, int n, int p, int rep, std::uint64_t seed) {
    dataset_seeds.push_back(
        {{"purpose", purpose}, {"n_qubits", n}, {"n_points", p}, {"replicate", rep}, {"seed", seed}});
  }

  CurveRequest curve_request(const GenNormSpec& data, int n, int n_points) const {
    CurveRequest req;
    req.map = cfg.map;
    req.data = data;
    req.n_points = n_points;
    req.qubits = {n};
    req.lambdas = cfg.lambdas;
    req.replicates = cfg.replicates;
    req.seed = cfg.seed;
    req.threads = threads;
    return req;
  }

  TuneCurve curve_at(const GenNormSpec& data, int n, int n_points, CsvSink& sink) {
    const CurveRequest req = curve_request(data, n, n_points);
    for (int r = 0; r < cfg.replicates; ++r)
      record_seed("curve", n, n_points, r, replicate_seed(cfg.seed, "curve", n, n_points, r));
    TuneCurve curve = gamma_max_curve(req);
    for (const auto& p : curve.points) sink.row(curve_csv_row(p));
    return curve;
  }

  /// Tunes lambda for `target` and writes the tuned row; on success also
  /// computes the minimum geometric difference on a fresh dataset.
  void tuned_gd(const GenNormSpec& data, int n, int n_points, double target, const TuneCurve& curve,
                CsvSink& tuned, CsvSink& gd) {
    const CurveRequest req = curve_request(data, n, n_points);
    const std::string prefix = format_number(data.r) + "," + std::to_string(n) + "," +
                               std::to_string(n_points) + "," + format_number(target) + ",";
    TunedLambda t;
    try {
      t = tune_lambda(curve, req, n, target);
    } catch (const ValidationError& e) {
      note(e.what());
      tuned.row(prefix + "nan,nan,nan,0");
      return;
    }
    for (int r = 0; r < cfg.replicates; ++r)
      record_seed("tune-check", n, n_points, r, replicate_seed(cfg.seed, "tune-check", n, n_points, r));
    double var = 0.0;
    for (double g : t.realized_replicates) var += (g - t.realized_gamma) * (g - t.realized_gamma);
    const double sd = t.realized_replicates.size() > 1
                          ? std::sqrt(var / static_cast<double>(t.realized_replicates.size() - 1))
                          : 0.0;
    if (!t.within_tolerance) note(t.warning);
    tuned.row(prefix + format_number(t.lambda) + "," + format_number(t.realized_gamma) + "," +
              format_number(sd) + "," + (t.within_tolerance ? "1" : "0"));

    const std::uint64_t seed = replicate_seed(cfg.seed, "gd", n, n_points, 0);
    record_seed("gd", n, n_points, 0, seed);
    const Dataset d = sample_dataset(data, n_points, n, seed);
    FeatureMapSpec q = cfg.map;
    q.lambda = t.lambda;
    KernelOptions opt;
    opt.threads = threads;
    const KernelMatrix kq = build_kernel(q, d, opt);
    FeatureMapSpec c = cfg.map;
    c.family = cfg.classical_family();
    gd.row(gd_csv_row(min_gd_over_classical(kq, c, cfg.classical_lambdas, d, cfg.psd, threads)));
  }

  void spectrum_curve() {
    CsvSink curve(dir, "curve.csv", kCurveCsvHeader, files);
    for (int n : cfg.qubits) {
      progress("gamma_max curve, n = " + std::to_string(n));
      curve_at(cfg.data.gennorm, n, cfg.data.n_points, curve);
    }
  }

  void fixed_gamma(const GenNormSpec& data, const std::string& prefix, CsvSink& tuned) {
    CsvSink curve(dir, prefix + "curve.csv", kCurveCsvHeader, files);
    std::vector<std::unique_ptr<CsvSink>> gd;
    for (double t : cfg.gamma_targets)
      gd.push_back(std::make_unique<CsvSink>(dir, prefix + "gd_gamma_" + tag(t) + ".csv", kGdCsvHeader, files));
    for (int n : cfg.qubits) {
      progress(prefix + "n = " + std::to_string(n));
      const TuneCurve c = curve_at(data, n, cfg.data.n_points, curve);
      for (std::size_t k = 0; k < cfg.gamma_targets.size(); ++k)
        tuned_gd(data, n, cfg.data.n_points, cfg.gamma_targets[k], c, tuned, *gd[k]);
    }
  }

  void gd_vs_n() {
    CsvSink tuned(dir, "tuned.csv", kTunedHeader, files);
    std::vector<std::unique_ptr<CsvSink>> gd;
    for (double t : cfg.gamma_targets)
      gd.push_back(std::make_unique<CsvSink>(dir, "gd_gamma_" + tag(t) + ".csv", kGdCsvHeader, files));
    for (int p : cfg.n_points_list) {
      CsvSink curve(dir, "curve_P_" + std::to_string(p) + ".csv", kCurveCsvHeader, files);
      for (int n : cfg.qubits) {
        progress("n = " + std::to_string(n) + ", P = " + std::to_string(p));
        const TuneCurve c = curve_at(cfg.data.gennorm, n, p, curve);
        for (std::size_t k = 0; k < cfg.gamma_targets.size(); ++k)
          tuned_gd(cfg.data.gennorm, n, p, cfg.gamma_targets[k], c, tuned, *gd[k]);
      }
    }
  }

  void real_data() {
    const Dataset raw = load_csv(cfg.data.csv, cfg.data.has_labels);
    CsvSink cells(dir, "testscore.csv", "n_qubits,lambda,C,test_score", files);
    CsvSink best(dir, "best.csv",
                 "n_qubits,lambda,C,test_score,train_gamma_max,model_complexity,gd_min,classical_lambda_star",
                 files);
    TestScoreRequest req;
    req.map = cfg.map;
    req.lambdas = cfg.lambdas;
    req.cs = cfg.cs;
    req.n_train = cfg.n_train;
    req.n_test = cfg.n_test;
    req.seed = cfg.seed;
    req.threads = threads;
    req.svm.tol = cfg.svm_tol;
    req.svm.max_sweeps = cfg.svm_max_sweeps;
    for (int n : cfg.qubits) {
      progress("test-score search, n = " + std::to_string(n));
      Dataset d;
      d.points = standardize_normalize(pca_reduce(raw.points, n), cfg.data.gennorm.scaling);
      d.labels = raw.labels;
      d.preprocessing = {"pca(" + std::to_string(n) + ")", "standardize",
                         std::string(to_string(cfg.data.gennorm.scaling))};
      const TestScoreResult res = best_testscore_search(d, req);
      for (const auto& c : res.cells)
        cells.row(std::to_string(n) + "," + format_number(c.lambda) + "," + format_number(c.C) + "," +
                  format_number(c.test_score));

      FeatureMapSpec q = cfg.map;
      q.lambda = res.lambda;
      KernelOptions opt;
      opt.threads = threads;
      const KernelMatrix k = build_kernel(q, res.train, opt);
      FeatureMapSpec c = cfg.map;
      c.family = cfg.classical_family();
      const GdResult g = min_gd_over_classical(k, c, cfg.classical_lambdas, res.train, cfg.psd, threads);
      best.row(std::to_string(n) + "," + format_number(res.lambda) + "," + format_number(res.C) + "," +
               format_number(res.test_score) + "," + format_number(gamma_max(k.entries)) + "," +
               format_number(model_complexity(k.entries, *res.train.labels, cfg.psd)) + "," +
               format_number(g.gd_min) + "," + format_number(g.classical_lambda_star));

      const std::string model_name = "model_n" + std::to_string(n) + ".json";
      std::ofstream m(dir / model_name, std::ios::binary);
      m << svm_model_to_json(res.model) << '\n';
      files.push_back(model_name);
    }
  }

  void run() {
    switch (cfg.kind) {
      case ExperimentKind::SpectrumCurve:
        spectrum_curve();
        break;
      case ExperimentKind::FixedGammaGd: {
        CsvSink tuned(dir, "tuned.csv", kTunedHeader, files);
        fixed_gamma(cfg.data.gennorm, "", tuned);
        break;
      }
      case ExperimentKind::GdVsN:
        gd_vs_n();
        break;
      case ExperimentKind::CorrelatedGd: {
        CsvSink tuned(dir, "tuned.csv", kTunedHeader, files);
        for (double r : cfg.correlations) {
          GenNormSpec g = cfg.data.gennorm;
          g.r = r;
          fixed_gamma(g, "r_" + tag(r) + "_", tuned);
        }
        break;
      }
      case ExperimentKind::RealDataPipeline:
        real_data();
        break;
    }
  }
};

}  // namespace

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::SpectrumCurve: return "spectrum-curve";
    case ExperimentKind::FixedGammaGd: return "fixed-gamma-gd";
    case ExperimentKind::GdVsN: return "gd-vs-n";
    case ExperimentKind::RealDataPipeline: return "real-data";
    case ExperimentKind::CorrelatedGd: return "correlated-gd";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view s) {
  const std::string k = lower_alnum(s);
  if (k == "spectrumcurve") return ExperimentKind::SpectrumCurve;
  if (k == "fixedgammagd") return ExperimentKind::FixedGammaGd;
  if (k == "gdvsn") return ExperimentKind::GdVsN;
  if (k == "realdata" || k == "realdatapipeline") return ExperimentKind::RealDataPipeline;
  if (k == "correlatedgd") return ExperimentKind::CorrelatedGd;
  throw ValidationError("unknown experiment kind '" + std::string(s) +
                        "' (spectrum-curve|fixed-gamma-gd|gd-vs-n|real-data|correlated-gd)");
}

ExperimentConfig::ExperimentConfig()
    : qubits{4, 6, 8, 10, 12},
      n_points_list{100, 200, 300, 400},
      lambdas(default_lambda_grid()),
      classical_lambdas(default_lambda_grid()),
      cs(default_c_grid()),
      gamma_targets{0.3},
      correlations{0.0, 0.33, 0.66, 0.9, 0.95} {}

Family ExperimentConfig::classical_family() const {
  return classical ? *classical : classical_counterpart(map.family);
}

void ExperimentConfig::validate() const {
  map.validate();
  data.gennorm.validate();
  psd.validate();
  if (qubits.empty()) throw ValidationError("qubit list is empty");
  const bool heisenberg = map.family == Family::Heisenberg || classical_family() == Family::Heisenberg;
  for (int n : qubits) {
    if (n < 1 || n > kMaxQubits) {
      throw ValidationError("qubit count " + std::to_string(n) + " outside [1, " +
                            std::to_string(kMaxQubits) + "]");
    }
    if (heisenberg && n < 2) throw ValidationError("the Heisenberg map needs at least 2 qubits");
  }
  if (replicates < 1) throw ValidationError("replicates must be >= 1");
  if (!(svm_tol > 0.0)) throw ValidationError("svm tol must be positive");
  if (svm_max_sweeps < 1) throw ValidationError("svm max_sweeps must be >= 1");
  check_grid(classical_lambdas, "classical_lambdas", 1);

  std::vector<int> sizes{data.n_points};
  if (kind == ExperimentKind::RealDataPipeline) {
    check_grid(lambdas, "lambdas", 1);
    check_grid(cs, "cs", 1);
    if (data.csv.empty()) throw ValidationError("the real-data pipeline needs data.csv");
    if (!std::filesystem::exists(data.csv)) throw ValidationError("data file not found: " + data.csv);
    if (!data.has_labels) throw ValidationError("the real-data pipeline needs labelled data");
    if (n_train < 2 || n_test < 1) throw ValidationError("n_train must be >= 2 and n_test >= 1");
    const Dataset d = load_csv(data.csv, data.has_labels);
    for (int n : qubits) {
      if (n > d.dim()) {
        throw ValidationError("qubit count " + std::to_string(n) + " exceeds the data dimension " +
                              std::to_string(d.dim()));
      }
    }
    if (n_train + n_test > d.size()) {
      throw ValidationError("n_train + n_test = " + std::to_string(n_train + n_test) +
                            " exceeds the " + std::to_string(d.size()) + " rows of " + data.csv);
    }
    sizes = {n_train};
  } else {
    check_grid(lambdas, "lambdas", 5);
    if (data.n_points < 2) throw ValidationError("data.n_points must be >= 2");
  }
  if (uses_targets(kind)) {
    if (gamma_targets.empty()) throw ValidationError("gamma_targets is empty");
    for (double t : gamma_targets)
      if (!(t > 0.0 && t <= 1.0)) throw ValidationError("gamma targets must lie in (0, 1]");
  }
  if (kind == ExperimentKind::GdVsN) {
    if (n_points_list.empty()) throw ValidationError("n_points_list is empty");
    for (int p : n_points_list)
      if (p < 2) throw ValidationError("n_points_list entries must be >= 2");
    sizes = n_points_list;
  }
  if (kind == ExperimentKind::CorrelatedGd) {
    if (correlations.empty()) throw ValidationError("correlations is empty");
    for (double r : correlations) GenNormSpec{data.gennorm.beta, r}.validate();
  }

  const KernelOptions opt;
  for (int p : sizes) {
    for (int n : qubits) {
      const double bytes = static_cast<double>(p) * std::ldexp(16.0, n);
      if (bytes > static_cast<double>(opt.memory_limit)) {
        throw ValidationError("caching " + std::to_string(p) + " states of " + std::to_string(n) +
                              " qubits exceeds the memory limit");
      }
    }
  }
}

ExperimentConfig preset_config(std::string_view preset, ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  const std::string p = lower_alnum(preset);
  int lo = 4, hi = 12;
  if (p == "desk") {
    c.data.n_points = 200;
  } else if (p == "full") {
    c.data.n_points = 500;
    hi = 18;
  } else {
    throw ValidationError("unknown preset '" + std::string(preset) + "' (desk|full)");
  }
  c.qubits.clear();
  for (int n = lo; n <= hi; ++n) c.qubits.push_back(n);
  c.replicates = 3;
  if (kind == ExperimentKind::GdVsN) {
    c.qubits = {p == "full" ? 18 : 12};
    c.n_points_list = p == "full" ? std::vector<int>{100, 200, 300, 400, 500}
                                  : std::vector<int>{100, 200, 300, 400};
  }
  if (kind == ExperimentKind::RealDataPipeline) c.data.n_points = c.n_train + c.n_test;
  return c;
}

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2); }

ExperimentConfig config_from_json(std::string_view text) {
  ExperimentConfig c;
  try {
    const ojson j = ojson::parse(text);
    reject_unknown(j,
                   {"kind", "map", "classical_family", "data", "qubits", "n_points_list", "lambdas",
                    "classical_lambdas", "cs", "gamma_targets", "correlations", "replicates", "seed",
                    "n_train", "n_test", "psd", "svm", "output_dir"},
                   "");
    if (j.contains("kind")) c.kind = parse_experiment_kind(j.at("kind").get<std::string>());
    if (j.contains("map")) {
      const ojson& m = j.at("map");
      reject_unknown(m, {"family", "lambda", "alpha", "n_layers", "boundary"}, "map.");
      if (m.contains("family")) c.map.family = parse_family(m.at("family").get<std::string>());
      c.map.lambda = get_or(m, "lambda", c.map.lambda);
      c.map.alpha = get_or(m, "alpha", c.map.alpha);
      c.map.n_layers = get_or(m, "n_layers", c.map.n_layers);
      if (m.contains("boundary")) c.map.boundary = parse_boundary(m.at("boundary").get<std::string>());
    }
    if (j.contains("classical_family") && !j.at("classical_family").is_null())
      c.classical = parse_family(j.at("classical_family").get<std::string>());
    if (j.contains("data")) {
      const ojson& d = j.at("data");
      reject_unknown(d, {"beta", "r", "scaling", "n_points", "csv", "has_labels"}, "data.");
      c.data.gennorm.beta = get_or(d, "beta", c.data.gennorm.beta);
      c.data.gennorm.r = get_or(d, "r", c.data.gennorm.r);
      if (d.contains("scaling")) c.data.gennorm.scaling = parse_scaling(d.at("scaling").get<std::string>());
      c.data.n_points = get_or(d, "n_points", c.data.n_points);
      c.data.csv = get_or(d, "csv", c.data.csv);
      c.data.has_labels = get_or(d, "has_labels", c.data.has_labels);
    }
    c.qubits = get_or(j, "qubits", c.qubits);
    c.n_points_list = get_or(j, "n_points_list", c.n_points_list);
    c.lambdas = get_or(j, "lambdas", c.lambdas);
    c.classical_lambdas = get_or(j, "classical_lambdas", c.classical_lambdas);
    c.cs = get_or(j, "cs", c.cs);
    c.gamma_targets = get_or(j, "gamma_targets", c.gamma_targets);
    c.correlations = get_or(j, "correlations", c.correlations);
    c.replicates = get_or(j, "replicates", c.replicates);
    c.seed = get_or(j, "seed", c.seed);
    c.n_train = get_or(j, "n_train", c.n_train);
    c.n_test = get_or(j, "n_test", c.n_test);
    if (j.contains("psd")) {
      const ojson& p = j.at("psd");
      reject_unknown(p, {"eps_rel", "clip_negative"}, "psd.");
      c.psd.eps_rel = get_or(p, "eps_rel", c.psd.eps_rel);
      c.psd.clip_negative = get_or(p, "clip_negative", c.psd.clip_negative);
    }
    if (j.contains("svm")) {
      const ojson& s = j.at("svm");
      reject_unknown(s, {"tol", "max_sweeps"}, "svm.");
      c.svm_tol = get_or(s, "tol", c.svm_tol);
      c.svm_max_sweeps = get_or(s, "max_sweeps", c.svm_max_sweeps);
    }
    c.output_dir = get_or(j, "output_dir", c.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed experiment config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  const char* env = std::getenv(kOutputRootEnv);
  const std::filesystem::path root = env && *env ? env : "qkernel-out";
  return root / (std::string(to_string(cfg.kind)) + "-" + config_hash(cfg).substr(0, 12));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  ExperimentResult result;
  result.output_dir = resolve_output_dir(cfg);
  std::filesystem::create_directories(result.output_dir);

  Runner runner{cfg, result.output_dir, opt.threads == 0 ? default_threads() : opt.threads, opt.quiet,
                {}, {}, ojson::array()};
  std::string status = "complete";
  std::string error;
  std::exception_ptr failure;
  try {
    runner.run();
  } catch (const std::exception& e) {
    status = "failed";
    error = e.what();
    failure = std::current_exception();
  }

  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.warnings = runner.warnings;
  ojson files = ojson::array();
  for (const auto& name : runner.files) {
    const auto path = result.output_dir / name;
    OutputFile f{name, sha256_file(path), std::filesystem::file_size(path)};
    files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    result.files.push_back(std::move(f));
  }
  ojson manifest;
  manifest["schema_version"] = kManifestSchemaVersion;
  manifest["status"] = status;
  manifest["error"] = error.empty() ? ojson(nullptr) : ojson(error);
  manifest["library_version"] = QKERNEL_VERSION;
  manifest["rng_algorithm"] = std::string(Rng::kAlgorithm);
  manifest["config_sha256"] = config_hash(cfg);
  manifest["config"] = config_json(cfg);
  manifest["threads"] = runner.threads;
  manifest["seeds"] = {{"root", cfg.seed}, {"datasets", runner.dataset_seeds}};
  manifest["wall_time_seconds"] = result.wall_seconds;
  manifest["warnings"] = runner.warnings;
  manifest["files"] = files;
  std::ofstream out(result.output_dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  out.close();

  if (failure) std::rethrow_exception(failure);
  return result;
}

}  // namespace qk
