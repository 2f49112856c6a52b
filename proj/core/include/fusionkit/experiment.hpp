#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fusionkit/classifiers.hpp"
#include "fusionkit/datasets.hpp"
#include "fusionkit/evaluation.hpp"
#include "fusionkit/fusion.hpp"

// End-to-end experiment commands behind the `fusionkit` CLI:
//   train    -> models/, scores/ (test split), validation_report.txt, train_manifest.json
//   fuse     -> fused/<method>.csv, weights.json, fuse_manifest.json
//   evaluate -> reports/, comparison.{txt,csv}, evaluate_manifest.json
// All outputs are deterministic functions of the config and seed.

namespace fusionkit {

enum class DatasetKind { UciHar, WisdmArff, WisdmRaw };
enum class InputView { Features, InertialRaw, InertialFft2d };

std::string_view to_string(DatasetKind kind) noexcept;
std::string_view to_string(InputView view) noexcept;

struct ClassifierSpec {
  std::string name;
  ModelKind kind = ModelKind::SoftmaxRegression;
  InputView input = InputView::Features;
  TrainConfig train;
};

struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::UciHar;
  std::filesystem::path dataset_path;
  std::string dataset_label;
  // UCI-HAR only: keep the published train/test partition and carve
  // validation from train. Otherwise `split` partitions all samples.
  bool published_split = true;
  SplitSpec split;
  // WISDM raw windowing.
  std::size_t window = kWisdmWindowLength;
  double overlap = 0.5;
  std::vector<ClassifierSpec> classifiers;
  EntropyConfig entropy;
  bool fallback_uniform = false;
  bool renormalize = false;
  std::vector<std::string> methods;
  std::filesystem::path output = "fusionkit-run";
  std::uint64_t seed = 42;

  void validate() const;
};

/// Three stand-in classifiers (cnn-standin, rcn-standin, svm-standin) and the
/// sum / weighted / entropy / entropy-subset:rcn-standin,svm-standin methods.
ExperimentConfig default_experiment_config(DatasetKind kind);

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

/// Parses a JSON config (empty text means defaults for the dataset kind in
/// the overrides, else UCI-HAR) and applies dotted-name overrides such as
/// {"entropy.alpha", "2"} or {"classifiers.0.train.epochs", "50"}. Override
/// values are read as JSON when they parse, otherwise as strings.
ExperimentConfig parse_experiment_config(std::string_view json_text, const ConfigOverrides& overrides = {});

/// Canonical JSON snapshot (sorted keys) used in manifests.
std::string experiment_config_json(const ExperimentConfig& config);

struct ClassifierOutcome {
  std::string name;
  double validation_accuracy = 0.0;  // fraction
  double test_accuracy = 0.0;        // fraction
  std::filesystem::path model_path;
  std::filesystem::path scores_path;
};

struct TrainOutcome {
  std::vector<ClassifierOutcome> classifiers;
  std::filesystem::path manifest_path;
};

TrainOutcome run_train(const ExperimentConfig& config, std::ostream& log);

struct FuseRequest {
  std::optional<std::filesystem::path> run_dir;
  std::vector<std::filesystem::path> score_files;
  // Names for score_files (default: file stems).
  std::vector<std::string> names;
  // Weights for the "weighted" method when no run manifest supplies
  // validation accuracies.
  std::vector<double> fixed_weights;
  EntropyConfig entropy;
  bool fallback_uniform = false;
  bool renormalize = false;
  std::vector<std::string> methods;
  std::filesystem::path output;
};

/// Seeds a request from a train run: its entropy settings, methods and output directory.
FuseRequest fuse_request_from_run(const std::filesystem::path& run_dir);

struct FusedOutcome {
  std::string method;   // e.g. "entropy-subset:rcn-standin,svm-standin"
  std::string display;  // e.g. "Entropy Weighted Fusion (rcn-standin + svm-standin)"
  std::filesystem::path scores_path;
  std::vector<std::string> members;
  std::vector<double> weights;
  std::vector<double> entropies;  // entropy methods only
  std::vector<std::string> warnings;
};

struct FuseOutcome {
  std::vector<FusedOutcome> fused;
  std::filesystem::path manifest_path;
};

FuseOutcome run_fuse(const FuseRequest& request, std::ostream& log);

struct EvaluateRequest {
  std::optional<std::filesystem::path> run_dir;
  std::vector<std::filesystem::path> score_files;
  // One 0-based label per line; must match every scores file's row count.
  std::optional<std::filesystem::path> labels_file;
  std::string dataset_label;
  std::filesystem::path output;
};

struct EvaluateOutcome {
  std::vector<EvaluationReport> reports;
  ComparisonTable table;
  std::filesystem::path manifest_path;
};

EvaluateOutcome run_evaluate(const EvaluateRequest& request, std::ostream& log);

struct BenchRequest {
  std::vector<std::size_t> rows{1000, 10000, 100000, 1000000};
  std::vector<std::size_t> classes{6, 20};
  std::vector<std::size_t> classifier_counts{2, 3, 4, 5};
  int repeats = 3;
  std::uint64_t seed = 1;
};

struct BenchRow {
  std::size_t rows = 0;
  std::size_t classes = 0;
  std::size_t classifiers = 0;
  double seconds = 0.0;  // best of the repeats
};

/// Times entropy_weighted_fusion on random calibrated score matrices.
std::vector<BenchRow> run_bench(const BenchRequest& request, std::ostream& log);
std::string render_bench_table(const std::vector<BenchRow>& rows);

/// Random calibrated score matrix (rows drawn from a flat Dirichlet).
ScoreMatrix random_score_matrix(std::size_t rows, std::size_t classes, std::uint64_t seed);

}  // namespace fusionkit
