#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "fusionkit/fusion.hpp"
#include "fusionkit/labeled_dataset.hpp"
#include "fusionkit/preprocessing.hpp"

namespace fusionkit {

// ---------------------------------------------------------------------------
// UCI-HAR
// ---------------------------------------------------------------------------

inline constexpr std::size_t kUciHarClassCount = 6;
inline constexpr std::size_t kUciHarWindowLength = 128;
inline constexpr std::size_t kUciHarChannelCount = 9;

struct UciHarFeatures {
  LabeledDataset train;
  LabeledDataset test;
};

struct InertialSet {
  std::vector<MultiChannelWindow> windows;  // 9 x 128 each
  std::vector<std::size_t> labels;
};

struct UciHarInertial {
  InertialSet train;
  InertialSet test;
  std::vector<std::string> class_names;
};

/// Class names from activity_labels.txt when present, else the six standard
/// activity names. Labels on disk are 1-based and are returned 0-based.
std::vector<std::string> ucihar_class_names(const std::filesystem::path& root);

/// train/X_train.txt, train/y_train.txt, test/X_test.txt, test/y_test.txt.
UciHarFeatures load_ucihar_features(const std::filesystem::path& root);

/// train|test/Inertial Signals/{body_acc,total_acc,body_gyro}_{x,y,z}_<split>.txt,
/// channels in that order.
UciHarInertial load_ucihar_inertial(const std::filesystem::path& root);

// ---------------------------------------------------------------------------
// WISDM
// ---------------------------------------------------------------------------

struct WisdmSample {
  std::uint32_t user = 0;
  std::size_t label = 0;
  std::int64_t timestamp = 0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const WisdmSample&) const = default;
};

struct WisdmStream {
  std::vector<WisdmSample> samples;
  std::vector<std::string> class_names;
  std::size_t skipped_malformed = 0;
  std::size_t skipped_blank = 0;
  std::vector<std::string> warnings;
};

/// Walking, Jogging, Upstairs, Downstairs, Sitting, Standing.
const std::vector<std::string>& wisdm_class_names();

inline constexpr double kWisdmMaxMalformedFraction = 0.01;

/// Lines of "user,activity,timestamp,x,y,z" with an optional trailing ';'.
/// Malformed lines are skipped and counted; more than 1% malformed is an
/// error, as is any activity name outside the six known ones.
WisdmStream parse_wisdm_raw(std::istream& in, const std::string& source = "<stream>");
WisdmStream load_wisdm_raw(const std::filesystem::path& path);

/// Windows each user's contiguous run of samples and extracts the 13 window
/// features.
LabeledDataset wisdm_window_features(const WisdmStream& stream, std::size_t window = kWisdmWindowLength,
                                     double overlap = 0.5);

/// ARFF subset: @relation, @attribute (numeric/real/integer or nominal
/// {...}), @data with comma-separated dense rows, '%' comments and '?' for
/// missing values. Features are the numeric attributes other than a
/// UNIQUE_ID/ID column; labels come from the nominal attribute named "class"
/// (or the last nominal attribute). Missing values are NaN until
/// impute_missing() runs with the training split.
LabeledDataset parse_arff(std::istream& in, const std::string& source = "<stream>");
LabeledDataset load_wisdm_arff(const std::filesystem::path& path);

/// Replaces NaN features everywhere with the column means of `train`
/// (computed over its non-missing values). Returns those means.
RowVector impute_missing(LabeledDataset& train, std::span<LabeledDataset* const> others);

// ---------------------------------------------------------------------------
// Scores CSV: "label,<class_0>,...,<class_{c-1}>" then one row per sample.
// ---------------------------------------------------------------------------

inline constexpr double kScoresCsvRowTolerance = 1e-4;

struct ScoresFile {
  ScoreMatrix scores;
  std::vector<std::size_t> labels;
};

/// Unvalidated score table: any finite reals. Used for fused outputs whose
/// rows need not be calibrated.
struct ScoreTable {
  Matrix values;
  std::vector<std::string> class_names;
  std::vector<std::size_t> labels;
};

ScoreTable parse_score_table(std::istream& in, const std::string& source = "<stream>");
ScoreTable read_score_table(const std::filesystem::path& path);

/// Rows must sum to 1 within 1e-4 unless `renormalize`, in which case each
/// row is divided by its sum.
ScoresFile load_scores_csv(const std::filesystem::path& path, bool renormalize = false);
ScoresFile scores_from_table(ScoreTable table, bool renormalize, const std::string& source);

/// Writes 17 significant digits so a reload is value-exact.
std::string format_scores_csv(const Matrix& values, std::span<const std::string> class_names,
                              std::span<const std::size_t> labels);
void save_scores_csv(const Matrix& values, std::span<const std::string> class_names,
                     std::span<const std::size_t> labels, const std::filesystem::path& path);
void save_scores_csv(const ScoresFile& file, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

struct SplitSpec {
  double train_fraction = 0.7;
  double validation_fraction = 0.1;  // carved from the training portion
  std::uint64_t seed = 42;
  bool stratified = true;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Deterministic given the seed. With stratification, per-class quotas are
/// allocated by largest remainder so totals match round(fraction * n) and
/// every class is within one sample of its proportional share.
SplitIndices split_indices(std::span<const std::size_t> labels, const SplitSpec& spec);

/// Only carves validation out of a fixed training set (UCI-HAR keeps its
/// published train/test partition). `test` is left empty.
SplitIndices validation_indices(std::span<const std::size_t> labels, double validation_fraction,
                                std::uint64_t seed, bool stratified);

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset validation;
  LabeledDataset test;
};

DatasetSplit split(const LabeledDataset& data, const SplitSpec& spec);

}  // namespace fusionkit
