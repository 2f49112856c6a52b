#include "fusionkit/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fusionkit/error.hpp"
#include "fusionkit/hash.hpp"
#include "fusionkit/model_io.hpp"
#include "fusionkit/preprocessing.hpp"
#include "text_util.hpp"

namespace fusionkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kTrainManifest = "train_manifest.json";
constexpr const char* kFuseManifest = "fuse_manifest.json";
constexpr const char* kEvaluateManifest = "evaluate_manifest.json";

template <typename Enum>
struct NameTable {
  Enum value;
  const char* name;
};

constexpr NameTable<DatasetKind> kDatasetNames[] = {
    {DatasetKind::UciHar, "uci-har"}, {DatasetKind::WisdmArff, "wisdm-arff"}, {DatasetKind::WisdmRaw, "wisdm-raw"}};
constexpr NameTable<InputView> kViewNames[] = {{InputView::Features, "features"},
                                               {InputView::InertialRaw, "inertial-raw"},
                                               {InputView::InertialFft2d, "inertial-fft2d"}};
constexpr NameTable<EntropyVariant> kVariantNames[] = {{EntropyVariant::Tsallis, "tsallis"},
                                                       {EntropyVariant::Shannon, "shannon"}};
constexpr NameTable<ColumnMode> kColumnModeNames[] = {{ColumnMode::Literal, "literal"},
                                                      {ColumnMode::Normalized, "normalized"}};

template <typename Enum, std::size_t N>
Enum parse_enum(const NameTable<Enum> (&table)[N], const std::string& name, const char* what) {
  for (const auto& entry : table) {
    if (name == entry.name) return entry.value;
  }
  std::string known;
  for (const auto& entry : table) known += std::string(known.empty() ? "" : ", ") + entry.name;
  throw Error(Errc::InvalidConfig, std::string("unknown ") + what + " '" + name + "' (expected one of: " + known + ")");
}

template <typename Enum, std::size_t N>
const char* enum_name(const NameTable<Enum> (&table)[N], Enum value) {
  for (const auto& entry : table) {
    if (entry.value == value) return entry.name;
  }
  return "?";
}

std::string default_label(DatasetKind kind) {
  return kind == DatasetKind::UciHar ? "UCI-HAR" : "WISDM";
}

json config_to_json(const ExperimentConfig& c) {
  json classifiers = json::array();
  for (const ClassifierSpec& s : c.classifiers) {
    classifiers.push_back({{"name", s.name},
                           {"kind", std::string(to_string(s.kind))},
                           {"input", std::string(to_string(s.input))},
                           {"train",
                            {{"learning_rate", s.train.learning_rate},
                             {"epochs", s.train.epochs},
                             {"l2", s.train.l2},
                             {"hidden_units", s.train.hidden_units},
                             {"batch_size", s.train.batch_size}}}});
  }
  return json{
      {"seed", c.seed},
      {"dataset",
       {{"kind", enum_name(kDatasetNames, c.dataset)},
        {"path", c.dataset_path.generic_string()},
        {"label", c.dataset_label},
        {"published_split", c.published_split},
        {"window", c.window},
        {"overlap", c.overlap}}},
      {"split",
       {{"train_fraction", c.split.train_fraction},
        {"validation_fraction", c.split.validation_fraction},
        {"stratified", c.split.stratified}}},
      {"classifiers", classifiers},
      {"entropy",
       {{"alpha", c.entropy.alpha},
        {"tau", c.entropy.tau},
        {"variant", enum_name(kVariantNames, c.entropy.variant)},
        {"column_mode", enum_name(kColumnModeNames, c.entropy.column_mode)},
        {"fallback_uniform", c.fallback_uniform}}},
      {"renormalize", c.renormalize},
      {"methods", c.methods},
      {"output", c.output.generic_string()},
  };
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(Errc::InvalidConfig, "config: missing field '" + where + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::InvalidConfig, "config: field '" + where + key + "' has the wrong type");
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.seed = get<std::uint64_t>(j, "seed", "");
  const json& d = j.at("dataset");
  c.dataset = parse_enum(kDatasetNames, get<std::string>(d, "kind", "dataset."), "dataset kind");
  c.dataset_path = get<std::string>(d, "path", "dataset.");
  c.dataset_label = get<std::string>(d, "label", "dataset.");
  if (c.dataset_label.empty()) c.dataset_label = default_label(c.dataset);
  c.published_split = get<bool>(d, "published_split", "dataset.");
  c.window = get<std::size_t>(d, "window", "dataset.");
  c.overlap = get<double>(d, "overlap", "dataset.");
  const json& s = j.at("split");
  c.split.train_fraction = get<double>(s, "train_fraction", "split.");
  c.split.validation_fraction = get<double>(s, "validation_fraction", "split.");
  c.split.stratified = get<bool>(s, "stratified", "split.");
  c.split.seed = c.seed;
  for (const json& cj : j.at("classifiers")) {
    ClassifierSpec spec;
    spec.name = get<std::string>(cj, "name", "classifiers[].");
    spec.kind = parse_model_kind(get<std::string>(cj, "kind", "classifiers[]."));
    spec.input = parse_enum(kViewNames, get<std::string>(cj, "input", "classifiers[]."), "classifier input");
    const json& t = cj.at("train");
    spec.train.seed = c.seed;
    spec.train.learning_rate = get<double>(t, "learning_rate", "classifiers[].train.");
    spec.train.epochs = get<int>(t, "epochs", "classifiers[].train.");
    spec.train.l2 = get<double>(t, "l2", "classifiers[].train.");
    spec.train.hidden_units = get<int>(t, "hidden_units", "classifiers[].train.");
    spec.train.batch_size = get<int>(t, "batch_size", "classifiers[].train.");
    c.classifiers.push_back(std::move(spec));
  }
  const json& e = j.at("entropy");
  c.entropy.alpha = get<double>(e, "alpha", "entropy.");
  c.entropy.tau = get<double>(e, "tau", "entropy.");
  c.entropy.variant = parse_enum(kVariantNames, get<std::string>(e, "variant", "entropy."), "entropy variant");
  c.entropy.column_mode =
      parse_enum(kColumnModeNames, get<std::string>(e, "column_mode", "entropy."), "column mode");
  c.fallback_uniform = get<bool>(e, "fallback_uniform", "entropy.");
  c.renormalize = get<bool>(j, "renormalize", "");
  c.methods = get<std::vector<std::string>>(j, "methods", "");
  c.output = get<std::string>(j, "output", "");
  return c;
}

void check_known_keys(const json& value, const json& templ, const std::string& where) {
  if (value.is_object() && templ.is_object()) {
    for (const auto& [key, child] : value.items()) {
      if (!templ.contains(key)) throw Error(Errc::Usage, "unknown config field '" + where + key + "'");
      check_known_keys(child, templ.at(key), where + key + ".");
    }
  } else if (value.is_array() && templ.is_array() && !templ.empty()) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      check_known_keys(value[i], templ[0], where + std::to_string(i) + ".");
    }
  }
}

void apply_override(json& root, const std::string& dotted, const std::string& raw) {
  json* node = &root;
  const auto parts = detail::split(dotted, '.');
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string key(parts[i]);
    if (node->is_array()) {
      const auto index = detail::parse_int<std::size_t>(key);
      if (!index || *index >= node->size()) {
        throw Error(Errc::Usage, "config override '" + dotted + "': bad array index '" + key + "'");
      }
      node = &(*node)[*index];
    } else if (node->is_object() && node->contains(key)) {
      node = &(*node)[key];
    } else {
      throw Error(Errc::Usage, "unknown config field '" + dotted + "'");
    }
  }
  json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;
  if (node->is_string() && !value.is_string()) value = raw;
  *node = std::move(value);
}

std::string split_description(const ExperimentConfig& c) {
  std::ostringstream out;
  if (c.dataset == DatasetKind::UciHar && c.published_split) {
    out << "published train/test";
  } else {
    out << "train " << c.split.train_fraction << " / test " << (1.0 - c.split.train_fraction);
  }
  out << "; validation " << c.split.validation_fraction << " of train; "
      << (c.split.stratified ? "stratified" : "unstratified");
  return out.str();
}

std::string safe_file_name(const std::string& method) {
  std::string out;
  for (char ch : method) {
    if (ch == ':') out += '_';
    else if (ch == ',') out += '+';
    else if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.' || ch == '+') out += ch;
    else out += '_';
  }
  return out;
}

std::string relative_to(const fs::path& target, const fs::path& base) {
  const fs::path t = fs::absolute(target).lexically_normal();
  const fs::path b = fs::absolute(base).lexically_normal();
  const fs::path rel = t.lexically_relative(b);
  return rel.empty() ? t.generic_string() : rel.generic_string();
}

json read_json(const fs::path& path) {
  const std::string text = detail::read_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::Parse, "'" + path.string() + "' is not valid JSON");
  return j;
}

void write_json(const fs::path& path, const json& j) { detail::write_file(path, j.dump(2) + "\n"); }

json artifact_hashes(const fs::path& base, const std::vector<fs::path>& files) {
  json out = json::object();
  for (const fs::path& f : files) out[relative_to(f, base)] = sha256_file(f);
  return out;
}

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string display_name(const std::string& method) {
  if (method == "sum") return "Score Fusion";
  if (method == "weighted") return "Weighted Score Fusion";
  if (method == "entropy") return "Entropy Weighted Fusion";
  const std::string prefix = "entropy-subset:";
  if (method.rfind(prefix, 0) == 0) {
    std::string members = method.substr(prefix.size());
    std::string pretty;
    for (const auto part : detail::split(members, ',')) {
      pretty += (pretty.empty() ? "" : " + ") + std::string(detail::trim(part));
    }
    return "Entropy Weighted Fusion (" + pretty + ")";
  }
  return method;
}

// ---------------------------------------------------------------------------
// Dataset preparation for run_train.

struct PreparedData {
  std::map<InputView, DatasetSplit> views;
  std::vector<std::string> class_names;
};

LabeledDataset with_features(Matrix features, const std::vector<std::size_t>& labels,
                             const std::vector<std::string>& names) {
  LabeledDataset d;
  d.features = std::move(features);
  d.labels = labels;
  d.class_names = names;
  return d;
}

Matrix stack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

PreparedData prepare_ucihar(const ExperimentConfig& c, std::set<InputView> needed, std::ostream& log) {
  PreparedData out;
  std::optional<UciHarFeatures> features;
  std::optional<UciHarInertial> inertial;
  if (needed.count(InputView::Features)) features = load_ucihar_features(c.dataset_path);
  if (needed.count(InputView::InertialRaw) || needed.count(InputView::InertialFft2d)) {
    inertial = load_ucihar_inertial(c.dataset_path);
  }
  const std::vector<std::size_t>& train_labels = features ? features->train.labels : inertial->train.labels;
  const std::vector<std::size_t>& test_labels = features ? features->test.labels : inertial->test.labels;
  out.class_names = features ? features->train.class_names : inertial->class_names;
  if (features && inertial &&
      (features->train.labels != inertial->train.labels || features->test.labels != inertial->test.labels)) {
    throw Error(Errc::Integrity, "UCI-HAR feature and inertial label files disagree");
  }
  log << "loaded UCI-HAR: " << train_labels.size() << " train / " << test_labels.size() << " test samples\n";

  std::vector<std::size_t> all_labels = train_labels;
  all_labels.insert(all_labels.end(), test_labels.begin(), test_labels.end());
  SplitIndices idx;
  if (c.published_split) {
    idx = validation_indices(train_labels, c.split.validation_fraction, c.seed, c.split.stratified);
    idx.test.resize(test_labels.size());
    for (std::size_t i = 0; i < test_labels.size(); ++i) idx.test[i] = train_labels.size() + i;
  } else {
    idx = split_indices(all_labels, c.split);
  }

  for (InputView view : needed) {
    Matrix train_x;
    Matrix test_x;
    switch (view) {
      case InputView::Features:
        train_x = features->train.features;
        test_x = features->test.features;
        break;
      case InputView::InertialRaw:
        train_x = inertial_raw_features(inertial->train.windows);
        test_x = inertial_raw_features(inertial->test.windows);
        break;
      case InputView::InertialFft2d:
        train_x = inertial_fft2d_features(inertial->train.windows);
        test_x = inertial_fft2d_features(inertial->test.windows);
        break;
    }
    const LabeledDataset pool = with_features(stack(train_x, test_x), all_labels, out.class_names);
    out.views[view] = DatasetSplit{pool.subset(idx.train), pool.subset(idx.validation), pool.subset(idx.test)};
  }
  return out;
}

PreparedData prepare_data(const ExperimentConfig& c, std::ostream& log) {
  std::set<InputView> needed;
  for (const ClassifierSpec& s : c.classifiers) needed.insert(s.input);
  if (c.dataset == DatasetKind::UciHar) return prepare_ucihar(c, needed, log);

  for (InputView v : needed) {
    if (v != InputView::Features) {
      throw Error(Errc::InvalidConfig, std::string("input '") + enum_name(kViewNames, v) +
                                           "' is only available for the uci-har dataset");
    }
  }
  LabeledDataset data;
  if (c.dataset == DatasetKind::WisdmArff) {
    data = load_wisdm_arff(c.dataset_path);
    log << "loaded WISDM ARFF: " << data.size() << " samples x " << data.feature_count() << " features\n";
  } else {
    const WisdmStream stream = load_wisdm_raw(c.dataset_path);
    for (const std::string& w : stream.warnings) log << "warning: " << w << "\n";
    log << "loaded WISDM raw: " << stream.samples.size() << " accepted, " << stream.skipped_malformed
        << " malformed, " << stream.skipped_blank << " blank\n";
    data = wisdm_window_features(stream, c.window, c.overlap);
    log << "windowed into " << data.size() << " samples\n";
  }
  DatasetSplit s = split(data, c.split);
  LabeledDataset* others[] = {&s.validation, &s.test};
  impute_missing(s.train, others);
  PreparedData out;
  out.class_names = data.class_names;
  out.views[InputView::Features] = std::move(s);
  return out;
}

}  // namespace

std::string_view to_string(DatasetKind kind) noexcept { return enum_name(kDatasetNames, kind); }
std::string_view to_string(InputView view) noexcept { return enum_name(kViewNames, view); }

void ExperimentConfig::validate() const {
  if (classifiers.empty()) throw Error(Errc::InvalidConfig, "config: at least one classifier is required");
  std::set<std::string> names;
  for (const ClassifierSpec& s : classifiers) {
    if (s.name.empty()) throw Error(Errc::InvalidConfig, "config: classifier names must be non-empty");
    if (!names.insert(s.name).second) throw Error(Errc::InvalidConfig, "config: duplicate classifier '" + s.name + "'");
    s.train.validate();
  }
  split.validate();
  entropy.validate();
  if (!(overlap >= 0.0 && overlap < 1.0)) throw Error(Errc::InvalidConfig, "config: overlap must be in [0, 1)");
  for (const std::string& m : methods) {
    if (m == "sum" || m == "weighted" || m == "entropy") continue;
    const std::string prefix = "entropy-subset:";
    if (m.rfind(prefix, 0) != 0) throw Error(Errc::InvalidConfig, "config: unknown fusion method '" + m + "'");
    const auto members = detail::split(std::string_view(m).substr(prefix.size()), ',');
    if (members.size() < 2) throw Error(Errc::InvalidConfig, "config: '" + m + "' must name at least two classifiers");
    for (const auto member : members) {
      if (!names.count(std::string(detail::trim(member)))) {
        throw Error(Errc::InvalidConfig, "config: '" + m + "' names unknown classifier '" + std::string(member) + "'");
      }
    }
  }
}

ExperimentConfig default_experiment_config(DatasetKind kind) {
  ExperimentConfig c;
  c.dataset = kind;
  c.dataset_label = default_label(kind);
  c.published_split = kind == DatasetKind::UciHar;

  TrainConfig nb;
  TrainConfig mlp;
  mlp.learning_rate = 0.2;
  mlp.epochs = 400;
  mlp.l2 = 1e-4;
  mlp.hidden_units = 64;
  TrainConfig softmax;
  softmax.learning_rate = 0.5;
  softmax.epochs = 1000;
  softmax.l2 = 1e-4;

  const InputView cnn_view = kind == DatasetKind::UciHar ? InputView::InertialFft2d : InputView::Features;
  const InputView rcn_view = kind == DatasetKind::UciHar ? InputView::InertialRaw : InputView::Features;
  c.classifiers = {
      {"cnn-standin", ModelKind::GaussianNaiveBayes, cnn_view, nb},
      {"rcn-standin", ModelKind::Mlp, rcn_view, mlp},
      {"svm-standin", ModelKind::SoftmaxRegression, InputView::Features, softmax},
  };
  for (ClassifierSpec& s : c.classifiers) s.train.seed = c.seed;
  c.split.seed = c.seed;
  c.methods = {"sum", "weighted", "entropy", "entropy-subset:rcn-standin,svm-standin"};
  return c;
}

ExperimentConfig parse_experiment_config(std::string_view json_text, const ConfigOverrides& overrides) {
  json user = json::object();
  if (!detail::trim(json_text).empty()) {
    user = json::parse(json_text, nullptr, false);
    if (user.is_discarded() || !user.is_object()) throw Error(Errc::Usage, "config file is not a JSON object");
  }
  std::string kind_name = "uci-har";
  if (user.contains("dataset") && user["dataset"].contains("kind") && user["dataset"]["kind"].is_string()) {
    kind_name = user["dataset"]["kind"].get<std::string>();
  }
  for (const auto& [key, value] : overrides) {
    if (key == "dataset.kind") kind_name = value;
  }
  const json templ = config_to_json(default_experiment_config(parse_enum(kDatasetNames, kind_name, "dataset kind")));
  check_known_keys(user, templ, "");

  json merged = templ;
  if (user.contains("classifiers") && user["classifiers"].is_array()) {
    json list = json::array();
    for (std::size_t i = 0; i < user["classifiers"].size(); ++i) {
      json base = i < templ["classifiers"].size() ? templ["classifiers"][i] : templ["classifiers"][0];
      base.merge_patch(user["classifiers"][i]);
      list.push_back(std::move(base));
    }
    user.erase("classifiers");
    merged["classifiers"] = std::move(list);
  }
  merged.merge_patch(user);
  for (const auto& [key, value] : overrides) apply_override(merged, key, value);

  ExperimentConfig c = config_from_json(merged);
  c.validate();
  return c;
}

std::string experiment_config_json(const ExperimentConfig& config) { return config_to_json(config).dump(2); }

// ---------------------------------------------------------------------------
// train

TrainOutcome run_train(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  if (!fs::exists(config.dataset_path)) {
    throw Error(Errc::Io, "dataset path does not exist: '" + config.dataset_path.string() + "'");
  }
  PreparedData data = prepare_data(config, log);

  const fs::path out = config.output;
  fs::create_directories(out / "models");
  fs::create_directories(out / "scores");

  TrainOutcome outcome;
  std::vector<fs::path> artifacts;
  json classifiers = json::array();
  std::ostringstream report;
  report << "validation accuracy per classifier (" << config.split.validation_fraction * 100.0
         << "% of training data held out, seed " << config.seed << ")\n";

  for (const ClassifierSpec& spec : config.classifiers) {
    const DatasetSplit& s = data.views.at(spec.input);
    const ZScoreFit z = zscore_fit_transform(s.train.features);
    if (!z.warnings.empty()) {
      log << "warning: " << spec.name << ": " << z.warnings.size() << " zero-spread feature column(s) floored\n";
    }
    LabeledDataset train_n = s.train;
    train_n.features = z.transformed;
    LabeledDataset val_n = s.validation;
    val_n.features = zscore_apply(s.validation.features, z.stats);
    LabeledDataset test_n = s.test;
    test_n.features = zscore_apply(s.test.features, z.stats);

    const auto start = std::chrono::steady_clock::now();
    const TrainedModel model = train(spec.kind, train_n, val_n, spec.train);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const ScoreMatrix scores = predict_proba(model, test_n.features);

    ClassifierOutcome result;
    result.name = spec.name;
    result.validation_accuracy = model.validation_accuracy.value_or(0.0);
    result.test_accuracy = accuracy(model, test_n);
    result.model_path = out / "models" / (spec.name + ".fkmodel");
    result.scores_path = out / "scores" / (spec.name + ".csv");
    save_model(model, result.model_path);
    save_scores_csv(scores.values(), scores.class_names(), test_n.labels, result.scores_path);
    artifacts.push_back(result.model_path);
    artifacts.push_back(result.scores_path);

    char line[256];
    std::snprintf(line, sizeof(line), "%-16s %-12s %-15s validation %.1f%%  test %.1f%%", spec.name.c_str(),
                  std::string(to_string(spec.kind)).c_str(), std::string(to_string(spec.input)).c_str(),
                  100.0 * result.validation_accuracy, 100.0 * result.test_accuracy);
    log << line << "  (" << std::fixed;
    log.precision(2);
    log << seconds << " s)\n";
    log.unsetf(std::ios::floatfield);
    log.precision(6);
    report << line << "\n";

    classifiers.push_back({{"name", spec.name},
                           {"kind", std::string(to_string(spec.kind))},
                           {"input", std::string(to_string(spec.input))},
                           {"validation_accuracy", result.validation_accuracy},
                           {"test_accuracy", result.test_accuracy},
                           {"model", relative_to(result.model_path, out)},
                           {"scores", relative_to(result.scores_path, out)}});
    outcome.classifiers.push_back(std::move(result));
  }

  const fs::path report_path = out / "validation_report.txt";
  detail::write_file(report_path, report.str());
  artifacts.push_back(report_path);

  const DatasetSplit& any = data.views.begin()->second;
  json manifest{{"stage", "train"},
                {"config", config_to_json(config)},
                {"seed", config.seed},
                {"split", split_description(config)},
                {"dataset",
                 {{"kind", enum_name(kDatasetNames, config.dataset)},
                  {"label", config.dataset_label},
                  {"classes", data.class_names},
                  {"train", any.train.size()},
                  {"validation", any.validation.size()},
                  {"test", any.test.size()}}},
                {"classifiers", classifiers},
                {"artifacts", artifact_hashes(out, artifacts)}};
  outcome.manifest_path = out / kTrainManifest;
  write_json(outcome.manifest_path, manifest);
  return outcome;
}

// ---------------------------------------------------------------------------
// fuse

FuseRequest fuse_request_from_run(const fs::path& run_dir) {
  const json manifest = read_json(run_dir / kTrainManifest);
  const ExperimentConfig c = config_from_json(manifest.at("config"));
  FuseRequest r;
  r.run_dir = run_dir;
  r.entropy = c.entropy;
  r.fallback_uniform = c.fallback_uniform;
  r.renormalize = c.renormalize;
  r.methods = c.methods;
  r.output = run_dir;
  return r;
}

namespace {

struct FuseInput {
  std::string name;
  fs::path path;
  std::optional<double> validation_accuracy;
};

std::vector<FuseInput> gather_fuse_inputs(const FuseRequest& request) {
  std::vector<FuseInput> inputs;
  if (request.run_dir && !request.score_files.empty()) {
    throw Error(Errc::Usage, "fuse: pass either a run directory or score files, not both");
  }
  if (request.run_dir) {
    const json manifest = read_json(*request.run_dir / kTrainManifest);
    for (const json& c : manifest.at("classifiers")) {
      inputs.push_back({c.at("name").get<std::string>(), *request.run_dir / c.at("scores").get<std::string>(),
                        c.at("validation_accuracy").get<double>()});
    }
  } else {
    if (!request.names.empty() && request.names.size() != request.score_files.size()) {
      throw Error(Errc::Usage, "fuse: number of names differs from number of score files");
    }
    for (std::size_t i = 0; i < request.score_files.size(); ++i) {
      const fs::path& p = request.score_files[i];
      inputs.push_back({request.names.empty() ? p.stem().string() : request.names[i], p, std::nullopt});
    }
  }
  if (inputs.size() < 2) throw Error(Errc::Usage, "fuse: at least two score files are required");
  std::set<std::string> seen;
  for (const FuseInput& in : inputs) {
    if (!seen.insert(in.name).second) throw Error(Errc::Usage, "fuse: duplicate input name '" + in.name + "'");
  }
  return inputs;
}

}  // namespace

FuseOutcome run_fuse(const FuseRequest& request, std::ostream& log) {
  request.entropy.validate();
  const std::vector<FuseInput> inputs = gather_fuse_inputs(request);

  std::vector<ScoreMatrix> scores;
  std::vector<std::size_t> labels;
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    ScoresFile file = load_scores_csv(inputs[j].path, request.renormalize);
    if (j > 0) {
      const ScoreMatrix& first = scores.front();
      if (file.scores.rows() != first.rows() || file.scores.cols() != first.cols() ||
          file.scores.class_names() != first.class_names()) {
        std::ostringstream msg;
        msg << "fuse: '" << inputs[j].path.string() << "' (" << file.scores.rows() << "x" << file.scores.cols()
            << ") is not shape-compatible with '" << inputs[0].path.string() << "' (" << first.rows() << "x"
            << first.cols() << ", same class order required)";
        throw Error(Errc::Shape, msg.str());
      }
      if (file.labels != labels) {
        throw Error(Errc::Integrity, "fuse: true labels in '" + inputs[j].path.string() + "' differ from '" +
                                         inputs[0].path.string() + "'");
      }
    } else {
      labels = file.labels;
    }
    scores.push_back(std::move(file.scores));
  }

  std::vector<std::string> methods = request.methods;
  if (methods.empty()) {
    methods = {"sum"};
    const bool have_acc = std::all_of(inputs.begin(), inputs.end(),
                                      [](const FuseInput& i) { return i.validation_accuracy.has_value(); });
    if (have_acc || !request.fixed_weights.empty()) methods.push_back("weighted");
    methods.push_back("entropy");
  }

  const fs::path out = request.output.empty() ? fs::path(".") : request.output;
  fs::create_directories(out / "fused");
  const OnDegenerate on_degenerate = request.fallback_uniform ? OnDegenerate::Uniform : OnDegenerate::Error;

  FuseOutcome outcome;
  json fused_json = json::array();
  json weights_json = json::object();
  std::vector<fs::path> artifacts;

  for (const std::string& method : methods) {
    FusedOutcome fo;
    fo.method = method;
    fo.display = display_name(method);
    std::vector<std::size_t> members;
    FusedDecision decision;

    if (method == "sum") {
      for (std::size_t j = 0; j < inputs.size(); ++j) members.push_back(j);
      decision = sum_fusion(scores);
      fo.weights.assign(inputs.size(), 1.0);
    } else if (method == "weighted") {
      for (std::size_t j = 0; j < inputs.size(); ++j) members.push_back(j);
      if (!request.fixed_weights.empty()) {
        if (request.fixed_weights.size() != inputs.size()) {
          throw Error(Errc::Usage, "fuse: --weights needs one value per score file");
        }
        fo.weights = request.fixed_weights;
      } else {
        std::vector<double> acc;
        for (const FuseInput& in : inputs) {
          if (!in.validation_accuracy) {
            throw Error(Errc::Usage, "fuse: the weighted method needs --weights or a run directory with validation accuracies");
          }
          acc.push_back(*in.validation_accuracy);
        }
        fo.weights = weights_from_accuracies(acc);
      }
      decision = weighted_sum_fusion(scores, fo.weights);
    } else if (method == "entropy" || method.rfind("entropy-subset:", 0) == 0) {
      if (method == "entropy") {
        for (std::size_t j = 0; j < inputs.size(); ++j) members.push_back(j);
      } else {
        for (const auto part : detail::split(std::string_view(method).substr(15), ',')) {
          const std::string name(detail::trim(part));
          const auto it = std::find_if(inputs.begin(), inputs.end(), [&](const FuseInput& i) { return i.name == name; });
          if (it == inputs.end()) throw Error(Errc::Usage, "fuse: '" + method + "' names unknown input '" + name + "'");
          members.push_back(static_cast<std::size_t>(it - inputs.begin()));
        }
      }
      std::vector<ScoreMatrix> chosen;
      for (std::size_t j : members) chosen.push_back(scores[j]);
      EntropyFusionResult r = entropy_weighted_fusion(chosen, request.entropy, on_degenerate);
      decision = std::move(r.decision);
      fo.weights = r.weights.weights;
      fo.entropies = r.weights.entropies;
      fo.warnings = r.weights.warnings;
    } else {
      throw Error(Errc::Usage, "fuse: unknown method '" + method + "'");
    }

    for (std::size_t j : members) fo.members.push_back(inputs[j].name);
    for (const std::string& w : fo.warnings) log << "warning: " << fo.display << ": " << w << "\n";

    double total = 0.0;
    for (double w : fo.weights) total += w;
    Matrix values = decision.fused_scores;
    if (total != 0.0 && total != 1.0) values /= total;
    fo.scores_path = out / "fused" / (safe_file_name(method) + ".csv");
    save_scores_csv(values, scores.front().class_names(), labels, fo.scores_path);
    artifacts.push_back(fo.scores_path);

    log << fo.display << " weights:";
    for (std::size_t k = 0; k < fo.members.size(); ++k) {
      log << " " << fo.members[k] << "=" << detail::format_double(fo.weights[k]);
    }
    log << "\n";

    json entry{{"method", fo.method},
               {"display", fo.display},
               {"scores", relative_to(fo.scores_path, out)},
               {"members", fo.members},
               {"weights", fo.weights}};
    if (!fo.entropies.empty()) entry["entropies"] = fo.entropies;
    weights_json[fo.method] = {{"members", fo.members}, {"weights", fo.weights}, {"entropies", fo.entropies},
                               {"warnings", fo.warnings}};
    fused_json.push_back(std::move(entry));
    outcome.fused.push_back(std::move(fo));
  }

  const fs::path weights_path = out / "weights.json";
  write_json(weights_path, weights_json);
  artifacts.push_back(weights_path);

  json input_json = json::array();
  for (const FuseInput& in : inputs) {
    input_json.push_back({{"name", in.name}, {"path", relative_to(in.path, out)}, {"sha256", sha256_file(in.path)}});
  }
  json manifest{{"stage", "fuse"},
                {"entropy",
                 {{"alpha", request.entropy.alpha},
                  {"tau", request.entropy.tau},
                  {"variant", enum_name(kVariantNames, request.entropy.variant)},
                  {"column_mode", enum_name(kColumnModeNames, request.entropy.column_mode)}}},
                {"fallback_uniform", request.fallback_uniform},
                {"renormalize", request.renormalize},
                {"inputs", input_json},
                {"fused", fused_json},
                {"artifacts", artifact_hashes(out, artifacts)}};
  outcome.manifest_path = out / kFuseManifest;
  write_json(outcome.manifest_path, manifest);
  return outcome;
}

// ---------------------------------------------------------------------------
// evaluate

namespace {

struct EvalInput {
  std::string method;
  fs::path path;
  std::vector<std::pair<std::string, double>> weights;
  std::vector<std::pair<std::string, std::string>> config;
};

std::vector<std::size_t> read_label_file(const fs::path& path) {
  std::ifstream in = detail::open_input(path);
  std::vector<std::size_t> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = detail::trim(line);
    if (t.empty()) continue;
    const auto v = detail::parse_int<std::size_t>(t);
    if (!v) throw Error(Errc::Parse, path.string() + ":" + std::to_string(line_no) + ": not a class index");
    labels.push_back(*v);
  }
  return labels;
}

}  // namespace

EvaluateOutcome run_evaluate(const EvaluateRequest& request, std::ostream& log) {
  std::vector<EvalInput> inputs;
  std::string dataset = request.dataset_label;

  if (request.run_dir && !request.score_files.empty()) {
    throw Error(Errc::Usage, "evaluate: pass either a run directory or score files, not both");
  }
  if (request.run_dir) {
    const fs::path& run = *request.run_dir;
    const json train = read_json(run / kTrainManifest);
    if (dataset.empty()) dataset = train.at("dataset").at("label").get<std::string>();
    const std::vector<std::pair<std::string, std::string>> base{
        {"seed", std::to_string(train.at("seed").get<std::uint64_t>())},
        {"split", train.at("split").get<std::string>()}};
    for (const json& c : train.at("classifiers")) {
      inputs.push_back({c.at("name").get<std::string>(), run / c.at("scores").get<std::string>(), {}, base});
    }
    if (fs::exists(run / kFuseManifest)) {
      const json fuse = read_json(run / kFuseManifest);
      const json& e = fuse.at("entropy");
      auto config = base;
      config.emplace_back("alpha", shortest(e.at("alpha").get<double>()));
      config.emplace_back("tau", shortest(e.at("tau").get<double>()));
      config.emplace_back("variant", e.at("variant").get<std::string>());
      config.emplace_back("column_mode", e.at("column_mode").get<std::string>());
      for (const json& f : fuse.at("fused")) {
        EvalInput in{f.at("display").get<std::string>(), run / f.at("scores").get<std::string>(), {}, config};
        const auto members = f.at("members").get<std::vector<std::string>>();
        const auto weights = f.at("weights").get<std::vector<double>>();
        for (std::size_t k = 0; k < members.size(); ++k) in.weights.emplace_back(members[k], weights[k]);
        inputs.push_back(std::move(in));
      }
    }
  } else {
    for (const fs::path& p : request.score_files) inputs.push_back({p.stem().string(), p, {}, {}});
  }
  if (inputs.empty()) throw Error(Errc::Usage, "evaluate: no score files to evaluate");
  if (dataset.empty()) dataset = "dataset";

  std::optional<std::vector<std::size_t>> label_override;
  if (request.labels_file) label_override = read_label_file(*request.labels_file);

  const fs::path out = request.output.empty() ? fs::path(".") : request.output;
  fs::create_directories(out / "reports");

  EvaluateOutcome outcome;
  std::vector<fs::path> artifacts;
  for (const EvalInput& in : inputs) {
    const ScoreTable table = read_score_table(in.path);
    std::vector<std::size_t> truth = table.labels;
    if (label_override) {
      if (label_override->size() != table.labels.size()) {
        std::ostringstream msg;
        msg << "evaluate: label file has " << label_override->size() << " rows but '" << in.path.string()
            << "' has " << table.labels.size();
        throw Error(Errc::Integrity, msg.str());
      }
      truth = *label_override;
    }
    const std::vector<std::size_t> predicted = argmax_labels(table.values);
    EvaluationReport report = evaluate(in.method, dataset, truth, predicted, table.class_names);
    report.fusion_weights = in.weights;
    report.config = in.config;

    const std::string stem = safe_file_name(in.method);
    const fs::path text_path = out / "reports" / (stem + ".txt");
    const fs::path csv_path = out / "reports" / (stem + ".csv");
    const fs::path cm_path = out / "reports" / (stem + "_confusion.csv");
    detail::write_file(text_path, render_report_text(report));
    detail::write_file(csv_path, render_report_csv(report));
    detail::write_file(cm_path, render_confusion_csv(report.confusion));
    artifacts.insert(artifacts.end(), {text_path, csv_path, cm_path});
    outcome.reports.push_back(std::move(report));
  }

  outcome.table = comparison_table(outcome.reports);
  const fs::path table_txt = out / "comparison.txt";
  const fs::path table_csv = out / "comparison.csv";
  detail::write_file(table_txt, "F1-score is macro-averaged over classes.\n" + outcome.table.text);
  detail::write_file(table_csv, outcome.table.csv);
  artifacts.insert(artifacts.end(), {table_txt, table_csv});
  log << outcome.table.text;

  json inputs_json = json::array();
  for (const EvalInput& in : inputs) {
    inputs_json.push_back({{"method", in.method}, {"path", relative_to(in.path, out)}, {"sha256", sha256_file(in.path)}});
  }
  json manifest{{"stage", "evaluate"},
                {"dataset", dataset},
                {"f1", "macro"},
                {"inputs", inputs_json},
                {"artifacts", artifact_hashes(out, artifacts)}};
  outcome.manifest_path = out / kEvaluateManifest;
  write_json(outcome.manifest_path, manifest);
  return outcome;
}

// ---------------------------------------------------------------------------
// bench

ScoreMatrix random_score_matrix(std::size_t rows, std::size_t classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(classes));
  std::vector<std::string> names;
  for (std::size_t k = 0; k < classes; ++k) names.push_back("c" + std::to_string(k));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double total = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = -std::log(1.0 - unit(rng));
      total += m(r, c);
    }
    m.row(r) /= total;
  }
  return ScoreMatrix(std::move(m), std::move(names));
}

std::vector<BenchRow> run_bench(const BenchRequest& request, std::ostream& log) {
  if (request.repeats < 1) throw Error(Errc::Usage, "bench: repeats must be >= 1");
  for (std::size_t j : request.classifier_counts) {
    if (j < 2) throw Error(Errc::Usage, "bench: fusion needs at least 2 classifiers (got J=" + std::to_string(j) + ")");
  }
  for (std::size_t c : request.classes) {
    if (c < 2) throw Error(Errc::Usage, "bench: at least 2 classes are required");
  }
  for (std::size_t d : request.rows) {
    if (d < 1) throw Error(Errc::Usage, "bench: row counts must be >= 1");
  }
  const EntropyConfig config;
  std::vector<BenchRow> out;
  for (std::size_t c : request.classes) {
    for (std::size_t j : request.classifier_counts) {
      for (std::size_t d : request.rows) {
        std::vector<ScoreMatrix> scores;
        for (std::size_t k = 0; k < j; ++k) scores.push_back(random_score_matrix(d, c, request.seed + k));
        double best = 1e300;
        for (int rep = 0; rep < request.repeats; ++rep) {
          const auto start = std::chrono::steady_clock::now();
          const EntropyFusionResult r = entropy_weighted_fusion(scores, config);
          const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          if (r.decision.predicted_labels.size() != d) throw Error(Errc::Shape, "bench: unexpected output size");
          best = std::min(best, s);
        }
        out.push_back({d, c, j, best});
        log << "d=" << d << " c=" << c << " J=" << j << " : " << best << " s\n";
      }
    }
  }
  return out;
}

std::string render_bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "        d    c  J      seconds   ns/entry  ratio-vs-prev-d\n";
  const BenchRow* prev = nullptr;
  for (const BenchRow& r : rows) {
    char line[160];
    const double entries = static_cast<double>(r.rows * r.classes * r.classifiers);
    std::string ratio = "-";
    if (prev && prev->classes == r.classes && prev->classifiers == r.classifiers && prev->seconds > 0) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.2f (d x%.0f)", r.seconds / prev->seconds,
                    static_cast<double>(r.rows) / static_cast<double>(prev->rows));
      ratio = buf;
    }
    std::snprintf(line, sizeof(line), "%9zu %4zu %2zu %12.6f %10.2f  %s\n", r.rows, r.classes, r.classifiers,
                  r.seconds, 1e9 * r.seconds / entries, ratio.c_str());
    out << line;
    prev = &r;
  }
  return out.str();
}

}  // namespace fusionkit
