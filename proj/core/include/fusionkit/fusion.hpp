#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fusionkit/matrix.hpp"

namespace fusionkit {

/// Per-sample class probabilities from one classifier: d rows, c columns.
///
/// Construction validates the calibration contract (entries finite and in
/// [0, 1], rows summing to one) so every instance in circulation is usable
/// as a fusion input.
class ScoreMatrix {
 public:
  static constexpr double kDefaultRowTolerance = 1e-6;

  ScoreMatrix(Matrix values, std::vector<std::string> class_names,
              double row_tolerance = kDefaultRowTolerance);

  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }

 private:
  Matrix values_;
  std::vector<std::string> class_names_;
};

enum class EntropyVariant { Tsallis, Shannon };

// Literal feeds raw column values into the entropy; Normalized first rescales
// the surviving values of a column to sum to one.
enum class ColumnMode { Literal, Normalized };

struct EntropyConfig {
  double alpha = 2.0;
  double tau = 0.1;
  EntropyVariant variant = EntropyVariant::Tsallis;
  ColumnMode column_mode = ColumnMode::Normalized;

  /// Throws Error(InvalidConfig) on alpha == 1 for Tsallis, tau < 0 or tau >= 1,
  /// or non-finite parameters.
  void validate() const;
};

enum class OnDegenerate { Error, Uniform };

struct FusionWeights {
  std::vector<double> weights;
  std::vector<double> entropies;
  // Non-fatal findings, e.g. negative classifier entropy under Literal mode.
  std::vector<std::string> warnings;
  bool used_uniform_fallback = false;
};

struct FusedDecision {
  Matrix fused_scores;
  std::vector<std::size_t> predicted_labels;
};

double shannon_column_entropy(std::span<const double> column, const EntropyConfig& config);
double tsallis_column_entropy(std::span<const double> column, const EntropyConfig& config);

/// Dispatches on config.variant.
double column_entropy(std::span<const double> column, const EntropyConfig& config);

/// Sum of the configured column entropy over every class column.
double classifier_entropy(const ScoreMatrix& scores, const EntropyConfig& config);

/// Relative weights E_j / sum_k E_k. Requires at least two shape-compatible
/// score matrices. A zero entropy total is an error unless `on_degenerate`
/// asks for the uniform fallback.
FusionWeights entropy_weights(std::span<const ScoreMatrix> all_scores, const EntropyConfig& config,
                              OnDegenerate on_degenerate = OnDegenerate::Error);

FusedDecision sum_fusion(std::span<const ScoreMatrix> all_scores);

FusedDecision weighted_sum_fusion(std::span<const ScoreMatrix> all_scores,
                                  std::span<const double> weights);

struct EntropyFusionResult {
  FusedDecision decision;
  FusionWeights weights;
};

EntropyFusionResult entropy_weighted_fusion(std::span<const ScoreMatrix> all_scores,
                                            const EntropyConfig& config,
                                            OnDegenerate on_degenerate = OnDegenerate::Error);

/// Row-wise argmax; ties go to the lowest column index.
std::vector<std::size_t> argmax_labels(const Matrix& scores);

/// Normalizes non-negative performance figures (e.g. validation accuracies)
/// into fixed weights for weighted_sum_fusion.
std::vector<double> weights_from_accuracies(std::span<const double> accuracies);

}  // namespace fusionkit
