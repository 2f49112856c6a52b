#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fusionkit/datasets.hpp"
#include "test_support.hpp"

using namespace fusionkit;
using testsupport::error_code;
using testsupport::error_message;
using testsupport::Gen;

namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = FUSIONKIT_FIXTURES_DIR;

void copy_tree(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  fs::copy(from, to, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

std::vector<std::size_t> labels_with_counts(std::initializer_list<std::size_t> counts) {
  std::vector<std::size_t> out;
  std::size_t label = 0;
  for (std::size_t n : counts) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(label);
    ++label;
  }
  return out;
}

}  // namespace

TEST_SUITE("datasets") {

TEST_CASE("UCI-HAR feature fixture parses exactly") {
  const UciHarFeatures f = load_ucihar_features(kFixtures / "ucihar");
  Matrix train(3, 4);
  train << 2.8858451e-001, -2.0294171e-002, -1.3290514e-001, -9.9527860e-001,
      2.7841883e-001, -1.6410568e-002, -1.2352019e-001, -9.9824528e-001,
      2.7965306e-001, -1.9467156e-002, -1.1346169e-001, -9.9537956e-001;
  CHECK(f.train.features == train);
  CHECK(f.train.labels == std::vector<std::size_t>{4, 4, 0});
  CHECK(f.test.features.rows() == 2);
  CHECK(f.test.features(1, 3) == -9.7541469e-001);
  CHECK(f.test.labels == std::vector<std::size_t>{5, 1});
  CHECK(f.train.class_names.size() == kUciHarClassCount);
  CHECK(f.train.class_names[2] == "WALKING_DOWNSTAIRS");
}

TEST_CASE("UCI-HAR inertial fixture parses exactly") {
  const UciHarInertial in = load_ucihar_inertial(kFixtures / "ucihar");
  REQUIRE(in.train.windows.size() == 3);
  REQUIRE(in.test.windows.size() == 2);
  for (std::size_t r = 0; r < 3; ++r) {
    const Matrix& w = in.train.windows[r].values;
    REQUIRE(w.rows() == 9);
    REQUIRE(w.cols() == 128);
    for (Eigen::Index ch = 0; ch < 9; ++ch) {
      for (Eigen::Index t = 0; t < 128; ++t) {
        CHECK(w(ch, t) == static_cast<double>(ch * 1000 + static_cast<Eigen::Index>(r) * 200 + t));
      }
    }
  }
  CHECK(in.test.labels == std::vector<std::size_t>{5, 1});
}

TEST_CASE("UCI-HAR errors name the file") {
  testsupport::TempDir dir("ucihar-errors");
  copy_tree(kFixtures / "ucihar", dir.path());
  fs::remove(dir / "test/X_test.txt");
  const std::string missing = error_message([&] { load_ucihar_features(dir.path()); });
  CHECK(missing.find("X_test.txt") != std::string::npos);
  CHECK(error_code([&] { load_ucihar_features(dir.path()); }) == Errc::Io);

  copy_tree(kFixtures / "ucihar", dir.path());
  testsupport::write_file(dir / "train/y_train.txt", "5\n5\n");
  CHECK(error_code([&] { load_ucihar_features(dir.path()); }) == Errc::Integrity);
  CHECK(error_code([&] { load_ucihar_inertial(dir.path()); }) == Errc::Integrity);

  testsupport::write_file(dir / "train/y_train.txt", "5\n9\n1\n");
  CHECK(error_code([&] { load_ucihar_features(dir.path()); }) == Errc::Integrity);
  CHECK(error_code([] { load_ucihar_features("/nonexistent/ucihar"); }) == Errc::Io);
}

TEST_CASE("WISDM raw fixture parses exactly") {
  const WisdmStream s = load_wisdm_raw(kFixtures / "wisdm_raw.txt");
  const std::vector<WisdmSample> expected{
      {33, 1, 49105962326000, -0.6946377, 12.680544, 0.50395286},
      {33, 1, 49106062271000, 5.012288, 11.264028, 0.95342433},
      {33, 0, 49106112167000, 4.903325, 10.882658, -0.08172209},
      {17, 4, 49106222305000, -1.1849703, 12.108489, 7.205164},
      {17, 5, 49106332290000, 1.3756552, -0.61291564, 0.15},
  };
  CHECK(s.samples == expected);
  CHECK(s.skipped_malformed == 0);
  CHECK(s.skipped_blank == 1);
}

TEST_CASE("WISDM trailing semicolon is optional") {
  std::istringstream with("7,Walking,100,1.5,2.5,3.5;\n");
  std::istringstream without("7,Walking,100,1.5,2.5,3.5\n");
  CHECK(parse_wisdm_raw(with).samples == parse_wisdm_raw(without).samples);
}

TEST_CASE("WISDM malformed lines are counted, then rejected above 1%") {
  std::ostringstream text;
  for (int i = 0; i < 199; ++i) text << "1,Walking," << i << ",0.1,0.2,0.3;\n";
  text << "1,Walking,oops;\n";
  std::istringstream ok(text.str());
  const WisdmStream s = parse_wisdm_raw(ok);
  CHECK(s.samples.size() == 199);
  CHECK(s.skipped_malformed == 1);
  CHECK_FALSE(s.warnings.empty());

  CHECK(error_code([] { load_wisdm_raw(kFixtures / "wisdm_raw_malformed.txt"); }) == Errc::ParseQuality);
  const std::string unknown = error_message([] { load_wisdm_raw(kFixtures / "wisdm_raw_unknown.txt"); });
  CHECK(unknown.find("Cycling") != std::string::npos);
  CHECK(error_code([] { load_wisdm_raw(kFixtures / "wisdm_raw_unknown.txt"); }) == Errc::UnknownLabel);
}

TEST_CASE("WISDM raw windows become 13-feature rows") {
  std::ostringstream text;
  for (int user : {1, 2}) {
    for (int i = 0; i < 400; ++i) {
      text << user << "," << (i < 200 ? "Walking" : "Jogging") << "," << i << "," << std::sin(i * 0.3) << ",9.8,"
           << (user * 0.1) << ";\n";
    }
  }
  std::istringstream in(text.str());
  const LabeledDataset d = wisdm_window_features(parse_wisdm_raw(in));
  CHECK(d.feature_count() == kWisdmFeatureCount);
  // Per user: windows at 0, 100, 200; the one at 100 is an even split and is dropped.
  CHECK(d.labels == std::vector<std::size_t>{0, 1, 0, 1});
}

TEST_CASE("ARFF fixture parses and imputes") {
  LabeledDataset d = load_wisdm_arff(kFixtures / "minimal.arff");
  REQUIRE(d.features.rows() == 4);
  REQUIRE(d.features.cols() == 2);
  CHECK(d.features(0, 0) == 0.04);
  CHECK(d.features(0, 1) == -1.5);
  CHECK(std::isnan(d.features(1, 0)));
  CHECK(std::isnan(d.features(2, 1)));
  CHECK(d.features(3, 0) == 0.30);
  CHECK(d.labels == std::vector<std::size_t>{0, 1, 0, 4});
  CHECK(d.class_names.size() == 6);

  const std::vector<std::size_t> train_rows{0, 1, 2};
  const std::vector<std::size_t> test_rows{3};
  LabeledDataset train = d.subset(train_rows);
  LabeledDataset test = d.subset(test_rows);
  test.features(0, 1) = NAN;
  LabeledDataset* others[] = {&test};
  const RowVector means = impute_missing(train, others);
  CHECK(means(0) == (0.04 + 0.10) / 2.0);
  CHECK(means(1) == (-1.5 + 2.5) / 2.0);
  CHECK(train.features(1, 0) == means(0));
  CHECK(train.features(2, 1) == means(1));
  CHECK(test.features(0, 1) == means(1));
  CHECK(test.features(0, 0) == 0.30);
}

TEST_CASE("ARFF errors") {
  CHECK(error_code([] { load_wisdm_arff(kFixtures / "no_class.arff"); }) == Errc::Schema);
  const std::string bad = error_message([] { load_wisdm_arff(kFixtures / "bad_value.arff"); });
  CHECK(bad.find(":6") != std::string::npos);
  CHECK(error_code([] { load_wisdm_arff(kFixtures / "bad_value.arff"); }) == Errc::Parse);
}

TEST_CASE("scores CSV round-trips at 17 significant digits") {
  Gen gen(51);
  testsupport::TempDir dir("scores-csv");
  for (int trial = 0; trial < 20; ++trial) {
    const ScoreMatrix s = gen.scores(gen.index(1, 30), gen.index(2, 6));
    std::vector<std::size_t> labels;
    for (std::size_t r = 0; r < s.rows(); ++r) labels.push_back(gen.index(0, s.cols() - 1));
    const ScoresFile file{s, labels};
    save_scores_csv(file, dir / "s.csv");
    const ScoresFile back = load_scores_csv(dir / "s.csv");
    CHECK(back.scores.values() == s.values());
    CHECK(back.scores.class_names() == s.class_names());
    CHECK(back.labels == labels);
  }
}

TEST_CASE("scores CSV calibration rules") {
  testsupport::TempDir dir("scores-cal");
  testsupport::write_file(dir / "low.csv", "label,a,b\n0,0.5,0.5\n1,0.5,0.4\n");
  const std::string msg = error_message([&] { load_scores_csv(dir / "low.csv"); });
  CHECK(msg.find("row 2") != std::string::npos);
  CHECK(error_code([&] { load_scores_csv(dir / "low.csv"); }) == Errc::Calibration);

  testsupport::write_file(dir / "near.csv", "\xEF\xBB\xBFlabel,a,b\r\n0,0.6,0.399\r\n1,0.25,0.75\r\n");
  CHECK(error_code([&] { load_scores_csv(dir / "near.csv"); }) == Errc::Calibration);
  const ScoresFile fixed = load_scores_csv(dir / "near.csv", true);
  CHECK(fixed.scores.values()(0, 0) == 0.6 / 0.999);
  CHECK(fixed.scores.values()(0, 1) == 0.399 / 0.999);
  CHECK(fixed.scores.values()(1, 1) == 0.75);

  testsupport::write_file(dir / "tolerated.csv", "label,a,b\n0,0.50004,0.5\n");
  CHECK(load_scores_csv(dir / "tolerated.csv").scores.values()(0, 0) == 0.50004);

  testsupport::write_file(dir / "badlabel.csv", "label,a,b\n2,0.5,0.5\n");
  CHECK(error_code([&] { load_scores_csv(dir / "badlabel.csv"); }) == Errc::Parse);
  testsupport::write_file(dir / "noheader.csv", "0,0.5,0.5\n");
  CHECK(error_code([&] { load_scores_csv(dir / "noheader.csv"); }) == Errc::Parse);
  CHECK(error_code([&] { load_scores_csv(dir / "absent.csv"); }) == Errc::Io);
}

TEST_CASE("split sizes and determinism") {
  const std::vector<std::size_t> labels = labels_with_counts({50, 50});
  const SplitSpec spec;
  const SplitIndices a = split_indices(labels, spec);
  CHECK(a.train.size() == 63);
  CHECK(a.validation.size() == 7);
  CHECK(a.test.size() == 30);
  const SplitIndices b = split_indices(labels, spec);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  CHECK(a.test == b.test);
  SplitSpec other = spec;
  other.seed = 43;
  CHECK(split_indices(labels, other).test != a.test);
}

TEST_CASE("splits are disjoint, exhaustive and stratified") {
  Gen gen(52);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n0 = gen.index(6, 80);
    const std::size_t n1 = gen.index(6, 80);
    const std::size_t n2 = gen.index(6, 80);
    const std::vector<std::size_t> labels = labels_with_counts({n0, n1, n2});
    SplitSpec spec;
    spec.seed = trial;
    spec.train_fraction = gen.uniform(0.4, 0.8);
    const SplitIndices s = split_indices(labels, spec);
    std::set<std::size_t> seen;
    for (const auto* part : {&s.train, &s.validation, &s.test}) {
      for (std::size_t i : *part) CHECK(seen.insert(i).second);
    }
    CHECK(seen.size() == labels.size());

    const std::vector<std::size_t> counts{n0, n1, n2};
    const auto train_portion = s.train.size() + s.validation.size();
    for (std::size_t k = 0; k < 3; ++k) {
      std::size_t in_test = 0;
      for (std::size_t i : s.test) in_test += labels[i] == k;
      const double share = static_cast<double>(counts[k]) / static_cast<double>(labels.size());
      CHECK(std::abs(static_cast<double>(in_test) - share * static_cast<double>(s.test.size())) <= 1.0 + 1e-9);
      std::size_t in_train_portion = 0;
      for (const auto* part : {&s.train, &s.validation}) {
        for (std::size_t i : *part) in_train_portion += labels[i] == k;
      }
      CHECK(std::abs(static_cast<double>(in_train_portion) - share * static_cast<double>(train_portion)) <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("60/40 class mix keeps its ratio in every partition") {
  const std::vector<std::size_t> labels = labels_with_counts({60, 40});
  const SplitIndices s = split_indices(labels, SplitSpec{});
  for (const auto* part : {&s.train, &s.validation, &s.test}) {
    std::size_t zeros = 0;
    for (std::size_t i : *part) zeros += labels[i] == 0;
    CHECK(std::abs(static_cast<double>(zeros) - 0.6 * static_cast<double>(part->size())) <= 1.0);
  }
}

TEST_CASE("split errors") {
  const std::vector<std::size_t> labels = labels_with_counts({10, 2});
  CHECK(error_code([&] { split_indices(labels, SplitSpec{}); }) == Errc::Stratification);
  SplitSpec unstratified;
  unstratified.stratified = false;
  CHECK_NOTHROW(split_indices(labels, unstratified));
  SplitSpec bad;
  bad.train_fraction = 1.0;
  CHECK(error_code([&] { split_indices(labels, bad); }) == Errc::InvalidConfig);
}

TEST_CASE("dataset split carries rows with their labels") {
  LabeledDataset d;
  d.class_names = {"a", "b"};
  d.features.resize(40, 1);
  for (Eigen::Index i = 0; i < 40; ++i) {
    d.features(i, 0) = static_cast<double>(i);
    d.labels.push_back(static_cast<std::size_t>(i % 2));
  }
  const DatasetSplit s = split(d, SplitSpec{});
  for (const LabeledDataset* part : {&s.train, &s.validation, &s.test}) {
    for (std::size_t r = 0; r < part->size(); ++r) {
      CHECK(part->labels[r] == static_cast<std::size_t>(part->features(static_cast<Eigen::Index>(r), 0)) % 2);
    }
  }
}

}  // TEST_SUITE
