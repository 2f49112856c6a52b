#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fusionkit/error.hpp"
#include "fusionkit/experiment.hpp"
#include "fusionkit/surrogate.hpp"

namespace fs = std::filesystem;
using namespace fusionkit;

namespace {

struct EntropyFlags {
  std::optional<double> alpha;
  std::optional<double> tau;
  std::optional<std::string> column_mode;
  bool fallback_uniform = false;
  bool renormalize = false;
};

void add_entropy_flags(CLI::App* cmd, EntropyFlags& flags) {
  cmd->add_option("--alpha", flags.alpha, "Tsallis entropic index (default 2)");
  cmd->add_option("--tau", flags.tau, "filter threshold in [0, 1) (default 0.1)");
  cmd->add_option("--column-mode", flags.column_mode, "literal|normalized (default normalized)")
      ->check(CLI::IsMember({"literal", "normalized"}));
  cmd->add_flag("--fallback-uniform", flags.fallback_uniform, "use uniform weights when total entropy is 0");
  cmd->add_flag("--renormalize", flags.renormalize, "divide score rows by their sum instead of rejecting them");
}

void apply_entropy_flags(const EntropyFlags& flags, EntropyConfig& entropy, bool& fallback, bool& renormalize) {
  if (flags.alpha) entropy.alpha = *flags.alpha;
  if (flags.tau) entropy.tau = *flags.tau;
  if (flags.column_mode) entropy.column_mode = *flags.column_mode == "literal" ? ColumnMode::Literal : ColumnMode::Normalized;
  fallback = fallback || flags.fallback_uniform;
  renormalize = renormalize || flags.renormalize;
}

// Leftover "--a.b value" / "--a.b=value" arguments become config overrides.
ConfigOverrides dotted_overrides(const std::vector<std::string>& extras) {
  ConfigOverrides out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() < 3) throw Error(Errc::Usage, "unexpected argument '" + arg + "'");
    std::string key = arg.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else if (i + 1 < extras.size()) {
      value = extras[++i];
    } else {
      throw Error(Errc::Usage, "option '" + arg + "' needs a value");
    }
    out.emplace_back(key, value);
  }
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open config '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fusionkit: entropy-weighted decision fusion for classifier ensembles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fusionkit 0.1.0");

  // train
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> train_out;
  std::optional<std::string> dataset_path;
  EntropyFlags train_entropy;
  CLI::App* train_cmd = app.add_subcommand("train", "train the configured classifiers and score the test split");
  train_cmd->add_option("--config", config_path, "JSON experiment config");
  train_cmd->add_option("--seed", seed, "seed for splits and training (default 42)");
  train_cmd->add_option("--out", train_out, "output run directory");
  train_cmd->add_option("--dataset", dataset_path, "dataset root / file (same as --dataset.path)");
  add_entropy_flags(train_cmd, train_entropy);
  train_cmd->allow_extras();

  // fuse
  std::optional<std::string> fuse_run;
  std::vector<std::string> fuse_scores;
  std::optional<std::string> fuse_names;
  std::optional<std::string> fuse_weights;
  std::optional<std::string> fuse_methods;
  std::optional<std::string> fuse_out;
  EntropyFlags fuse_entropy;
  CLI::App* fuse_cmd = app.add_subcommand("fuse", "fuse classifier score files");
  fuse_cmd->add_option("--run", fuse_run, "run directory written by train");
  fuse_cmd->add_option("--scores", fuse_scores, "score CSV files (two or more)");
  fuse_cmd->add_option("--names", fuse_names, "comma-separated names for --scores (default: file stems)");
  fuse_cmd->add_option("--weights", fuse_weights, "comma-separated weights for the weighted method");
  fuse_cmd->add_option("--methods", fuse_methods, "methods separated by ';', e.g. sum;entropy;entropy-subset:a,b");
  fuse_cmd->add_option("--out", fuse_out, "output directory (default: the run directory or .)");
  add_entropy_flags(fuse_cmd, fuse_entropy);

  // evaluate
  std::optional<std::string> eval_run;
  std::vector<std::string> eval_scores;
  std::optional<std::string> eval_labels;
  std::optional<std::string> eval_dataset;
  std::optional<std::string> eval_out;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "score predictions and build the comparison table");
  eval_cmd->add_option("--run", eval_run, "run directory written by train/fuse");
  eval_cmd->add_option("--scores", eval_scores, "score or fused CSV files");
  eval_cmd->add_option("--labels", eval_labels, "file with one 0-based true label per line");
  eval_cmd->add_option("--dataset", eval_dataset, "dataset label for the comparison table");
  eval_cmd->add_option("--out", eval_out, "output directory (default: the run directory or .)");

  // bench
  BenchRequest bench;
  std::optional<std::string> bench_rows;
  std::optional<std::string> bench_classes;
  std::optional<std::string> bench_j;
  CLI::App* bench_cmd = app.add_subcommand("bench", "time entropy-weighted fusion");
  bench_cmd->add_option("--rows", bench_rows, "comma-separated row counts (default 1000,10000,100000,1000000)");
  bench_cmd->add_option("--classes", bench_classes, "comma-separated class counts (default 6,20)");
  bench_cmd->add_option("--classifiers", bench_j, "comma-separated classifier counts (default 2,3,4,5)");
  bench_cmd->add_option("--repeats", bench.repeats, "repeats per size; the best time is kept");
  bench_cmd->add_option("--seed", bench.seed, "seed for the random score matrices");

  // make-surrogate
  std::string surrogate_kind;
  std::string surrogate_out;
  std::optional<std::uint64_t> surrogate_seed;
  CLI::App* surrogate_cmd = app.add_subcommand("make-surrogate", "write a synthetic dataset in a public format");
  surrogate_cmd->add_option("kind", surrogate_kind, "uci-har|wisdm-arff|wisdm-raw")
      ->required()
      ->check(CLI::IsMember({"uci-har", "wisdm-arff", "wisdm-raw"}));
  surrogate_cmd->add_option("--out", surrogate_out, "output directory (uci-har) or file")->required();
  surrogate_cmd->add_option("--seed", surrogate_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) {
      ConfigOverrides overrides = dotted_overrides(train_cmd->remaining());
      if (seed) overrides.emplace_back("seed", std::to_string(*seed));
      if (train_out) overrides.emplace_back("output", *train_out);
      if (dataset_path) overrides.emplace_back("dataset.path", *dataset_path);
      ExperimentConfig config = parse_experiment_config(config_path ? read_text(*config_path) : std::string(), overrides);
      apply_entropy_flags(train_entropy, config.entropy, config.fallback_uniform, config.renormalize);
      config.validate();
      const TrainOutcome outcome = run_train(config, std::cout);
      std::cout << "wrote " << outcome.manifest_path.string() << "\n";
    } else if (*fuse_cmd) {
      FuseRequest request;
      if (fuse_run) request = fuse_request_from_run(*fuse_run);
      for (const std::string& s : fuse_scores) request.score_files.emplace_back(s);
      if (fuse_names) request.names = split_list(*fuse_names, ',');
      if (fuse_weights) {
        for (const std::string& w : split_list(*fuse_weights, ',')) {
          try {
            request.fixed_weights.push_back(std::stod(w));
          } catch (const std::exception&) {
            throw Error(Errc::Usage, "--weights: '" + w + "' is not a number");
          }
        }
      }
      if (fuse_methods) request.methods = split_list(*fuse_methods, ';');
      if (fuse_out) request.output = *fuse_out;
      apply_entropy_flags(fuse_entropy, request.entropy, request.fallback_uniform, request.renormalize);
      const FuseOutcome outcome = run_fuse(request, std::cout);
      std::cout << "wrote " << outcome.manifest_path.string() << "\n";
    } else if (*eval_cmd) {
      EvaluateRequest request;
      if (eval_run) {
        request.run_dir = fs::path(*eval_run);
        request.output = *eval_run;
      }
      for (const std::string& s : eval_scores) request.score_files.emplace_back(s);
      if (eval_labels) request.labels_file = fs::path(*eval_labels);
      if (eval_dataset) request.dataset_label = *eval_dataset;
      if (eval_out) request.output = *eval_out;
      const EvaluateOutcome outcome = run_evaluate(request, std::cout);
      std::cout << "wrote " << outcome.manifest_path.string() << "\n";
    } else if (*bench_cmd) {
      auto sizes = [](const std::string& s) {
        std::vector<std::size_t> out;
        for (const std::string& v : split_list(s, ',')) {
          try {
            out.push_back(static_cast<std::size_t>(std::stoull(v)));
          } catch (const std::exception&) {
            throw Error(Errc::Usage, "bench: '" + v + "' is not a count");
          }
        }
        return out;
      };
      if (bench_rows) bench.rows = sizes(*bench_rows);
      if (bench_classes) bench.classes = sizes(*bench_classes);
      if (bench_j) bench.classifier_counts = sizes(*bench_j);
      const std::vector<BenchRow> rows = run_bench(bench, std::cerr);
      std::cout << render_bench_table(rows);
    } else if (*surrogate_cmd) {
      if (surrogate_kind == "uci-har") {
        UciHarSurrogateOptions opts;
        if (surrogate_seed) opts.seed = *surrogate_seed;
        write_ucihar_surrogate(surrogate_out, opts);
      } else {
        WisdmSurrogateOptions opts;
        if (surrogate_seed) opts.seed = *surrogate_seed;
        if (surrogate_kind == "wisdm-arff") write_wisdm_arff_surrogate(surrogate_out, opts);
        else write_wisdm_raw_surrogate(surrogate_out, opts);
      }
      std::cout << "wrote " << surrogate_out << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
