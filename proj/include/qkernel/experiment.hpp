#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qkernel/data.hpp"
#include "qkernel/feature_map.hpp"
#include "qkernel/spectral.hpp"
#include "qkernel/svm.hpp"

namespace qk {

enum class ExperimentKind { SpectrumCurve, FixedGammaGd, GdVsN, RealDataPipeline, CorrelatedGd };

std::string_view to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(std::string_view s);

/// Where the data comes from. Synthetic unless `csv` is set.
struct DataSource {
  GenNormSpec gennorm;
  int n_points = 200;
  std::string csv;         // labelled CSV for the real-data pipeline
  bool has_labels = true;  // only read with `csv`

  bool operator==(const DataSource&) const = default;
};

/// Declarative description of one experiment. Every field has a default;
/// `threads` is an execution knob and lives in RunOptions instead.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SpectrumCurve;
  FeatureMapSpec map;                  // lambda unused except by fixed-lambda runs
  std::optional<Family> classical;     // default: classical_counterpart(map.family)
  DataSource data;
  std::vector<int> qubits;
  std::vector<int> n_points_list;      // GdVsN
  std::vector<double> lambdas;         // quantum lambda grid
  std::vector<double> classical_lambdas;
  std::vector<double> cs;
  std::vector<double> gamma_targets;
  std::vector<double> correlations;    // CorrelatedGd
  int replicates = 3;
  std::uint64_t seed = 0;
  int n_train = 700;
  int n_test = 200;
  PsdFunctionConfig psd;
  double svm_tol = 1e-3;
  std::int64_t svm_max_sweeps = 100000;
  std::string output_dir;              // empty: derived from the output root

  ExperimentConfig();

  Family classical_family() const;

  /// Checks everything that can be checked without computing, including
  /// that referenced files exist. Throws ValidationError.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Named presets. "desk": P = 200, qubits 4..12, 3 replicates.
/// "full": P = 500, qubits 4..18 (hours of compute).
ExperimentConfig preset_config(std::string_view preset, ExperimentKind kind);

/// JSON text with every field spelled out. Unknown keys are rejected on
/// parse; missing keys take their defaults.
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "QKERNEL_OUTPUT_ROOT";
inline constexpr int kManifestSchemaVersion = 1;

/// Output directory the run will use: cfg.output_dir if set, otherwise
/// <root>/<kind>-<first 12 hex digits of the config hash>, where root is
/// $QKERNEL_OUTPUT_ROOT or "qkernel-out".
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

struct RunOptions {
  unsigned threads = 0;  // 0 = all logical cores
  bool quiet = true;
};

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct ExperimentResult {
  std::filesystem::path output_dir;
  std::vector<OutputFile> files;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

/// Validates, then runs the experiment and writes CSVs plus manifest.json.
/// CSV rows are flushed as each qubit count (or point count) completes; if
/// the run fails part way, the manifest is still written with status
/// "failed" and the error message, and the exception is rethrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

}  // namespace qk
