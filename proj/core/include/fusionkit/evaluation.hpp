#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fusionkit {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix(std::size_t classes, std::vector<std::string> class_names = {});

  std::size_t classes() const noexcept { return classes_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_.at(truth * classes_ + predicted); }
  void add(std::size_t truth, std::size_t predicted, std::size_t count = 1);
  std::size_t total() const noexcept;
  std::size_t trace() const noexcept;
  std::size_t row_sum(std::size_t truth) const;
  std::size_t column_sum(std::size_t predicted) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t classes_;
  std::vector<std::string> class_names_;
  std::vector<std::size_t> counts_;
};

ConfusionMatrix confusion(std::span<const std::size_t> true_labels,
                          std::span<const std::size_t> predicted_labels, std::size_t classes,
                          std::vector<std::string> class_names = {});

/// 100 * trace / total; 0 for an empty matrix.
double accuracy_percent(const ConfusionMatrix& cm);

/// Unweighted mean over classes of 2PR/(P+R), in percent. A class with
/// P + R = 0 contributes 0.
double macro_f1(const ConfusionMatrix& cm);

/// Percent recall per class; 0 for classes with no true samples.
std::vector<double> per_class_recall(const ConfusionMatrix& cm);

struct EvaluationReport {
  std::string method;
  std::string dataset;
  double accuracy = 0.0;  // percent
  double macro_f1 = 0.0;  // percent
  std::vector<double> per_class_recall;
  ConfusionMatrix confusion{0};
  // (classifier name, weight) when the method is a fusion rule.
  std::vector<std::pair<std::string, double>> fusion_weights;
  // Ordered echo of the settings that produced the scores (alpha, tau, seed, split ...).
  std::vector<std::pair<std::string, std::string>> config;
};

EvaluationReport evaluate(std::string method, std::string dataset, std::span<const std::size_t> true_labels,
                          std::span<const std::size_t> predicted_labels,
                          const std::vector<std::string>& class_names);

/// Human-readable report; percentages with one decimal.
std::string render_report_text(const EvaluationReport& report);
/// key,value rows with full-precision numbers.
std::string render_report_csv(const EvaluationReport& report);
/// Header of predicted class names, one row per true class.
std::string render_confusion_csv(const ConfusionMatrix& cm);

struct ComparisonTable {
  std::string text;
  std::string csv;
};

/// Methods as rows (first-appearance order), Acc/F1 column pairs per dataset.
ComparisonTable comparison_table(std::span<const EvaluationReport> reports);

struct ComparisonCell {
  std::string method;
  std::string dataset;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

/// Reads back the CSV produced by comparison_table (blank cells are skipped).
std::vector<ComparisonCell> parse_comparison_csv(const std::string& csv);

}  // namespace fusionkit
