#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "fusionkit/evaluation.hpp"
#include "test_support.hpp"

using namespace fusionkit;
using testsupport::error_code;
using testsupport::Gen;

namespace {

ConfusionMatrix from_counts(const std::vector<std::vector<std::size_t>>& counts) {
  ConfusionMatrix cm(counts.size());
  for (std::size_t t = 0; t < counts.size(); ++t) {
    for (std::size_t p = 0; p < counts.size(); ++p) cm.add(t, p, counts[t][p]);
  }
  return cm;
}

std::vector<std::size_t> random_labels(Gen& gen, std::size_t n, std::size_t c) {
  std::vector<std::size_t> out(n);
  for (auto& x : out) x = gen.index(0, c - 1);
  return out;
}

EvaluationReport report(const std::string& method, const std::string& dataset, double acc, double f1) {
  EvaluationReport r;
  r.method = method;
  r.dataset = dataset;
  r.accuracy = acc;
  r.macro_f1 = f1;
  return r;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("confusion examples") {
  const std::vector<std::size_t> truth{0, 1, 2, 2, 1};
  const ConfusionMatrix perfect = confusion(truth, truth, 3);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t p = 0; p < 3; ++p) CHECK(perfect.at(t, p) == (t == p ? perfect.row_sum(t) : 0));
  }
  CHECK(accuracy_percent(perfect) == 100.0);

  const std::vector<std::size_t> zeros(5, 0);
  const ConfusionMatrix all_zero = confusion(truth, zeros, 3);
  CHECK(all_zero.column_sum(0) == 5);
  CHECK(all_zero.column_sum(1) == 0);
  CHECK(all_zero.column_sum(2) == 0);

  Gen gen(61);
  const auto t = random_labels(gen, 200, 4);
  const auto p = random_labels(gen, 200, 4);
  const ConfusionMatrix cm = confusion(t, p, 4);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      std::size_t n = 0;
      for (std::size_t i = 0; i < t.size(); ++i) n += t[i] == a && p[i] == b;
      CHECK(cm.at(a, b) == n);
    }
  }
  CHECK(cm.total() == 200);

  const std::vector<std::size_t> out_of_range{0, 3};
  const std::vector<std::size_t> two{0, 1};
  CHECK(error_code([&] { confusion(two, out_of_range, 3); }) == Errc::InvalidInput);
  const std::vector<std::size_t> one{0};
  CHECK(error_code([&] { confusion(two, one, 3); }) == Errc::Shape);
}

TEST_CASE("macro F1 examples") {
  CHECK(macro_f1(from_counts({{4, 0}, {0, 6}})) == 100.0);
  CHECK(macro_f1(from_counts({{1, 1}, {1, 1}})) == 50.0);
  // Class 2 has no true samples and is never predicted: it contributes 0.
  const ConfusionMatrix missing = from_counts({{5, 0, 0}, {0, 5, 0}, {0, 0, 0}});
  CHECK(macro_f1(missing) == doctest::Approx(200.0 / 3.0));
}

TEST_CASE("per-class recall examples") {
  const std::vector<double> diag = per_class_recall(from_counts({{3, 0}, {0, 7}}));
  CHECK(diag == std::vector<double>{100.0, 100.0});
  const std::vector<double> r = per_class_recall(from_counts({{8, 2}, {1, 1}}));
  CHECK(r[0] == 80.0);
  CHECK(per_class_recall(from_counts({{0, 0}, {1, 1}}))[0] == 0.0);

  Gen gen(62);
  const auto t = random_labels(gen, 150, 5);
  const auto p = random_labels(gen, 150, 5);
  const std::vector<double> rec = per_class_recall(confusion(t, p, 5));
  for (std::size_t k = 0; k < 5; ++k) {
    std::size_t hit = 0;
    std::size_t all = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      all += t[i] == k;
      hit += t[i] == k && p[i] == k;
    }
    CHECK(rec[k] == doctest::Approx(all ? 100.0 * hit / all : 0.0));
  }
}

TEST_CASE("metric invariants") {
  Gen gen(63);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t c = gen.index(2, 6);
    const auto t = random_labels(gen, gen.index(1, 100), c);
    const auto p = random_labels(gen, t.size(), c);
    const ConfusionMatrix cm = confusion(t, p, c);
    CHECK(accuracy_percent(cm) == 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(cm.total()));

    const std::vector<double> rec = per_class_recall(cm);
    double weighted = 0.0;
    for (std::size_t k = 0; k < c; ++k) weighted += rec[k] * static_cast<double>(cm.row_sum(k));
    CHECK(weighted / static_cast<double>(cm.total()) == doctest::Approx(accuracy_percent(cm)).epsilon(1e-12));

    const auto perm = gen.permutation(c);
    std::vector<std::size_t> pt;
    std::vector<std::size_t> pp;
    for (std::size_t i = 0; i < t.size(); ++i) {
      pt.push_back(perm[t[i]]);
      pp.push_back(perm[p[i]]);
    }
    CHECK(macro_f1(confusion(pt, pp, c)) == doctest::Approx(macro_f1(cm)).epsilon(1e-12));
  }
}

TEST_CASE("report rendering") {
  const std::vector<std::size_t> t{0, 0, 1, 1, 1};
  const std::vector<std::size_t> p{0, 1, 1, 1, 1};
  EvaluationReport r = evaluate("Entropy Weighted Fusion", "UCI-HAR", t, p, {"walk", "run"});
  CHECK(r.accuracy == 80.0);
  r.fusion_weights = {{"a", 0.25}, {"b", 0.75}};
  r.config = {{"alpha", "2"}, {"tau", "0.1"}};
  const std::string text = render_report_text(r);
  CHECK(text.find("macro") != std::string::npos);
  CHECK(text.find("accuracy: 80.0") != std::string::npos);
  CHECK(text.find("alpha: 2") != std::string::npos);
  CHECK(text.find("b: 0.75") != std::string::npos);
  const std::string csv = render_report_csv(r);
  CHECK(csv.find("accuracy,80") != std::string::npos);
  const std::string cm = render_confusion_csv(r.confusion);
  CHECK(cm == "true\\predicted,walk,run\nwalk,1,1\nrun,0,3\n");
}

TEST_CASE("comparison table layout") {
  const std::vector<EvaluationReport> single{report("Score Fusion", "UCI-HAR", 94.0, 94.0)};
  const ComparisonTable one = comparison_table(single);
  CHECK(std::count(one.csv.begin(), one.csv.end(), '\n') == 2);

  const char* const methods[] = {"CNN", "RCN", "SVM", "Score Fusion", "Weighted Score Fusion", "Proposed",
                                 "Proposed (RCN + SVM)"};
  const double uci[][2] = {{91.9, 91}, {93.8, 93.7}, {96, 96}, {94, 94}, {94.7, 94.8}, {96.4, 96.3}, {97.4, 97.4}};
  const double wisdm[][2] = {{81.7, 81.5}, {94, 92.3}, {82, 81}, {86, 84}, {88.7, 86.7}, {89.5, 89.4}, {91.5, 91}};
  std::vector<EvaluationReport> reports;
  for (int i = 0; i < 7; ++i) reports.push_back(report(methods[i], "UCI-HAR", uci[i][0], uci[i][1]));
  for (int i = 0; i < 7; ++i) reports.push_back(report(methods[i], "WISDM", wisdm[i][0], wisdm[i][1]));
  const ComparisonTable table = comparison_table(reports);

  std::istringstream lines(table.csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "method,UCI-HAR acc,UCI-HAR f1,WISDM acc,WISDM f1");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') >= 4);
  }
  CHECK(rows == 7);
  CHECK(table.text.find("96.4") != std::string::npos);
  CHECK(table.text.find("Acc (%)") != std::string::npos);

  const std::vector<ComparisonCell> cells = parse_comparison_csv(table.csv);
  REQUIRE(cells.size() == 14);
  for (const ComparisonCell& cell : cells) {
    const auto it = std::find_if(reports.begin(), reports.end(), [&](const EvaluationReport& r) {
      return r.method == cell.method && r.dataset == cell.dataset;
    });
    REQUIRE(it != reports.end());
    CHECK(cell.accuracy == it->accuracy);
    CHECK(cell.macro_f1 == it->macro_f1);
  }
}

}  // TEST_SUITE
