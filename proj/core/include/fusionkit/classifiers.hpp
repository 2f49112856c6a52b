#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fusionkit/fusion.hpp"
#include "fusionkit/labeled_dataset.hpp"
#include "fusionkit/matrix.hpp"

namespace fusionkit {

enum class ModelKind : std::uint32_t { SoftmaxRegression = 0, GaussianNaiveBayes = 1, Mlp = 2 };

std::string_view to_string(ModelKind kind) noexcept;
/// Accepts "softmax", "naive-bayes", "mlp" (and the enum spellings).
ModelKind parse_model_kind(std::string_view name);

struct TrainConfig {
  std::uint64_t seed = 42;
  double learning_rate = 0.1;
  int epochs = 200;
  double l2 = 1e-4;
  int hidden_units = 64;
  // 0 (or >= sample count) means full-batch gradient descent.
  int batch_size = 0;

  void validate() const;
};

struct TrainedModel {
  ModelKind kind = ModelKind::SoftmaxRegression;
  std::size_t feature_count = 0;
  std::vector<std::string> class_names;
  // Layout depends on kind:
  //   SoftmaxRegression: {W (f x c), b (1 x c)}
  //   GaussianNaiveBayes: {means (c x f), variances (c x f), log_priors (1 x c)}
  //   Mlp: {W1 (f x h), b1 (1 x h), W2 (h x c), b2 (1 x c)}
  std::vector<Matrix> parameters;
  std::optional<double> validation_accuracy;

  bool operator==(const TrainedModel&) const = default;
};

inline constexpr double kNaiveBayesVarianceFloor = 1e-6;
inline constexpr double kProbabilityFloor = 1e-12;

TrainedModel train(ModelKind kind, const LabeledDataset& data, const TrainConfig& config);

/// Trains on `data` and records accuracy on `validation`.
TrainedModel train(ModelKind kind, const LabeledDataset& data, const LabeledDataset& validation,
                   const TrainConfig& config);

ScoreMatrix predict_proba(const TrainedModel& model, const Matrix& features);

/// Fraction of rows whose argmax matches the label, in [0, 1].
double accuracy(const TrainedModel& model, const LabeledDataset& data);

/// Mean cross-entropy (+ L2 on weight matrices) and its analytic gradient,
/// exposed for finite-difference checking.
struct LossGradient {
  double loss = 0.0;
  std::vector<Matrix> gradients;
};

LossGradient softmax_loss_gradient(const std::vector<Matrix>& parameters, const Matrix& features,
                                   const std::vector<std::size_t>& labels, double l2);

LossGradient mlp_loss_gradient(const std::vector<Matrix>& parameters, const Matrix& features,
                               const std::vector<std::size_t>& labels, double l2);

/// Row-wise numerically stable softmax.
Matrix softmax_rows(const Matrix& logits);

}  // namespace fusionkit
