#include "fusionkit/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "fusionkit/error.hpp"

namespace fusionkit {

void LabeledDataset::validate(bool allow_missing) const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    std::ostringstream msg;
    msg << "dataset has " << features.rows() << " feature rows but " << labels.size() << " labels";
    throw Error(Errc::Integrity, msg.str());
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= class_names.size()) {
      std::ostringstream msg;
      msg << "label " << labels[i] << " at row " << i << " is out of range for "
          << class_names.size() << " classes";
      throw Error(Errc::Integrity, msg.str());
    }
  }
  if (!allow_missing && !features.allFinite()) {
    throw Error(Errc::InvalidInput, "dataset contains non-finite feature values");
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.class_names = class_names;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(indices[i]);
    if (indices[i] >= labels.size()) throw Error(Errc::Shape, "subset index out of range");
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(src);
    out.labels.push_back(labels[indices[i]]);
  }
  return out;
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (std::size_t y : labels) {
    if (y < counts.size()) ++counts[y];
  }
  return counts;
}

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::SoftmaxRegression: return "softmax";
    case ModelKind::GaussianNaiveBayes: return "naive-bayes";
    case ModelKind::Mlp: return "mlp";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "softmax" || name == "SoftmaxRegression") return ModelKind::SoftmaxRegression;
  if (name == "naive-bayes" || name == "GaussianNaiveBayes") return ModelKind::GaussianNaiveBayes;
  if (name == "mlp" || name == "Mlp") return ModelKind::Mlp;
  throw Error(Errc::InvalidConfig, "unknown classifier kind '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(Errc::InvalidConfig, "train config: learning_rate must be > 0");
  }
  if (epochs < 1) throw Error(Errc::InvalidConfig, "train config: epochs must be >= 1");
  if (!(l2 >= 0.0)) throw Error(Errc::InvalidConfig, "train config: l2 must be >= 0");
  if (hidden_units < 1) throw Error(Errc::InvalidConfig, "train config: hidden_units must be >= 1");
  if (batch_size < 0) throw Error(Errc::InvalidConfig, "train config: batch_size must be >= 0");
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double peak = logits.row(r).maxCoeff();
    double total = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      out(r, c) = std::exp(logits(r, c) - peak);
      total += out(r, c);
    }
    out.row(r) /= total;
  }
  return out;
}

namespace {

Matrix one_hot(const std::vector<std::size_t>& labels, Eigen::Index classes) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])) = 1.0;
  return y;
}

double cross_entropy(const Matrix& probs, const std::vector<std::size_t>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i]));
    total -= std::log(std::clamp(p, kProbabilityFloor, 1.0));
  }
  return total / static_cast<double>(labels.size());
}

void check_training_data(const LabeledDataset& data) {
  data.validate();
  if (data.class_count() < 2) throw Error(Errc::InvalidInput, "training needs at least 2 classes");
  std::size_t present = 0;
  for (std::size_t n : data.class_counts()) present += n > 0 ? 1 : 0;
  if (present < 2) {
    throw Error(Errc::InvalidInput, "training data contains fewer than 2 distinct classes");
  }
}

void check_width(const TrainedModel& model, const Matrix& features) {
  if (static_cast<std::size_t>(features.cols()) != model.feature_count) {
    std::ostringstream msg;
    msg << "model expects " << model.feature_count << " features, got " << features.cols();
    throw Error(Errc::Shape, msg.str());
  }
}

using GradientFn = LossGradient (*)(const std::vector<Matrix>&, const Matrix&,
                                    const std::vector<std::size_t>&, double);

// Fixed-rate gradient descent; full batch unless config.batch_size selects
// seeded minibatches.
void descend(std::vector<Matrix>& params, const LabeledDataset& data, const TrainConfig& config,
             GradientFn gradient, std::mt19937_64& rng) {
  const std::size_t n = data.size();
  const bool full_batch = config.batch_size == 0 || static_cast<std::size_t>(config.batch_size) >= n;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (full_batch) {
      LossGradient lg = gradient(params, data.features, data.labels, config.l2);
      for (std::size_t k = 0; k < params.size(); ++k) params[k] -= config.learning_rate * lg.gradients[k];
      continue;
    }
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    const auto batch = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const LabeledDataset mini =
          data.subset(std::span<const std::size_t>(order.data() + start, stop - start));
      LossGradient lg = gradient(params, mini.features, mini.labels, config.l2);
      for (std::size_t k = 0; k < params.size(); ++k) params[k] -= config.learning_rate * lg.gradients[k];
    }
  }
}

TrainedModel train_softmax(const LabeledDataset& data, const TrainConfig& config) {
  const auto f = static_cast<Eigen::Index>(data.feature_count());
  const auto c = static_cast<Eigen::Index>(data.class_count());
  std::vector<Matrix> params{Matrix::Zero(f, c), Matrix::Zero(1, c)};
  std::mt19937_64 rng(config.seed);
  descend(params, data, config, &softmax_loss_gradient, rng);
  TrainedModel model;
  model.kind = ModelKind::SoftmaxRegression;
  model.parameters = std::move(params);
  return model;
}

TrainedModel train_naive_bayes(const LabeledDataset& data) {
  const auto f = static_cast<Eigen::Index>(data.feature_count());
  const auto c = static_cast<Eigen::Index>(data.class_count());
  Matrix means = Matrix::Zero(c, f);
  Matrix variances = Matrix::Zero(c, f);
  Matrix log_priors = Matrix::Zero(1, c);
  const std::vector<std::size_t> counts = data.class_counts();

  for (std::size_t i = 0; i < data.size(); ++i) {
    means.row(static_cast<Eigen::Index>(data.labels[i])) += data.features.row(static_cast<Eigen::Index>(i));
  }
  for (Eigen::Index k = 0; k < c; ++k) {
    if (counts[static_cast<std::size_t>(k)] > 0) means.row(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(data.labels[i]);
    const RowVector diff = data.features.row(static_cast<Eigen::Index>(i)) - means.row(k);
    variances.row(k) += diff.cwiseProduct(diff);
  }
  const double n = static_cast<double>(data.size());
  for (Eigen::Index k = 0; k < c; ++k) {
    const auto count = counts[static_cast<std::size_t>(k)];
    if (count > 0) variances.row(k) /= static_cast<double>(count);
    variances.row(k) = variances.row(k).cwiseMax(kNaiveBayesVarianceFloor);
    // Classes absent from training keep a floor prior so scores stay finite.
    log_priors(0, k) = std::log(std::max(static_cast<double>(count), 0.5) / n);
  }

  TrainedModel model;
  model.kind = ModelKind::GaussianNaiveBayes;
  model.parameters = {std::move(means), std::move(variances), std::move(log_priors)};
  return model;
}

TrainedModel train_mlp(const LabeledDataset& data, const TrainConfig& config) {
  const auto f = static_cast<Eigen::Index>(data.feature_count());
  const auto c = static_cast<Eigen::Index>(data.class_count());
  const auto h = static_cast<Eigen::Index>(config.hidden_units);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(f)));
  Matrix w1(f, h);
  for (Eigen::Index i = 0; i < w1.size(); ++i) w1.data()[i] = normal(rng);
  std::vector<Matrix> params{std::move(w1), Matrix::Zero(1, h), Matrix::Zero(h, c), Matrix::Zero(1, c)};
  descend(params, data, config, &mlp_loss_gradient, rng);
  TrainedModel model;
  model.kind = ModelKind::Mlp;
  model.parameters = std::move(params);
  return model;
}

Matrix naive_bayes_log_joint(const TrainedModel& model, const Matrix& features) {
  const Matrix& means = model.parameters.at(0);
  const Matrix& variances = model.parameters.at(1);
  const Matrix& log_priors = model.parameters.at(2);
  const Eigen::Index c = means.rows();
  Matrix out(features.rows(), c);
  constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
  for (Eigen::Index k = 0; k < c; ++k) {
    const RowVector inv_var = variances.row(k).cwiseInverse();
    const double log_norm = -0.5 * (variances.row(k).array().log().sum() +
                                    static_cast<double>(means.cols()) * kLogTwoPi);
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
      const RowVector diff = features.row(r) - means.row(k);
      out(r, k) = log_priors(0, k) + log_norm - 0.5 * diff.cwiseProduct(diff).cwiseProduct(inv_var).sum();
    }
  }
  return out;
}

}  // namespace

LossGradient softmax_loss_gradient(const std::vector<Matrix>& parameters, const Matrix& features,
                                   const std::vector<std::size_t>& labels, double l2) {
  const Matrix& w = parameters.at(0);
  const Matrix& b = parameters.at(1);
  const double n = static_cast<double>(labels.size());
  Matrix logits = features * w;
  logits.rowwise() += b.row(0);
  const Matrix probs = softmax_rows(logits);

  LossGradient out;
  out.loss = cross_entropy(probs, labels) + 0.5 * l2 * w.squaredNorm();
  const Matrix delta = (probs - one_hot(labels, w.cols())) / n;
  out.gradients.push_back(features.transpose() * delta + l2 * w);
  out.gradients.push_back(delta.colwise().sum());
  return out;
}

LossGradient mlp_loss_gradient(const std::vector<Matrix>& parameters, const Matrix& features,
                               const std::vector<std::size_t>& labels, double l2) {
  const Matrix& w1 = parameters.at(0);
  const Matrix& b1 = parameters.at(1);
  const Matrix& w2 = parameters.at(2);
  const Matrix& b2 = parameters.at(3);
  const double n = static_cast<double>(labels.size());

  Matrix pre = features * w1;
  pre.rowwise() += b1.row(0);
  const Matrix hidden = pre.cwiseMax(0.0);
  Matrix logits = hidden * w2;
  logits.rowwise() += b2.row(0);
  const Matrix probs = softmax_rows(logits);

  LossGradient out;
  out.loss = cross_entropy(probs, labels) + 0.5 * l2 * (w1.squaredNorm() + w2.squaredNorm());
  const Matrix delta_out = (probs - one_hot(labels, w2.cols())) / n;
  Matrix delta_hidden = delta_out * w2.transpose();
  delta_hidden = delta_hidden.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());

  out.gradients.push_back(features.transpose() * delta_hidden + l2 * w1);
  out.gradients.push_back(delta_hidden.colwise().sum());
  out.gradients.push_back(hidden.transpose() * delta_out + l2 * w2);
  out.gradients.push_back(delta_out.colwise().sum());
  return out;
}

TrainedModel train(ModelKind kind, const LabeledDataset& data, const TrainConfig& config) {
  config.validate();
  check_training_data(data);
  TrainedModel model;
  switch (kind) {
    case ModelKind::SoftmaxRegression: model = train_softmax(data, config); break;
    case ModelKind::GaussianNaiveBayes: model = train_naive_bayes(data); break;
    case ModelKind::Mlp: model = train_mlp(data, config); break;
  }
  model.feature_count = data.feature_count();
  model.class_names = data.class_names;
  return model;
}

TrainedModel train(ModelKind kind, const LabeledDataset& data, const LabeledDataset& validation,
                   const TrainConfig& config) {
  TrainedModel model = train(kind, data, config);
  if (validation.class_names != data.class_names) {
    throw Error(Errc::Shape, "validation split uses a different class table than training");
  }
  if (validation.size() > 0) model.validation_accuracy = accuracy(model, validation);
  return model;
}

ScoreMatrix predict_proba(const TrainedModel& model, const Matrix& features) {
  check_width(model, features);
  if (!features.allFinite()) throw Error(Errc::InvalidInput, "predict_proba: non-finite features");
  Matrix probs;
  switch (model.kind) {
    case ModelKind::SoftmaxRegression: {
      Matrix logits = features * model.parameters.at(0);
      logits.rowwise() += model.parameters.at(1).row(0);
      probs = softmax_rows(logits);
      break;
    }
    case ModelKind::GaussianNaiveBayes:
      probs = softmax_rows(naive_bayes_log_joint(model, features));
      break;
    case ModelKind::Mlp: {
      Matrix pre = features * model.parameters.at(0);
      pre.rowwise() += model.parameters.at(1).row(0);
      Matrix logits = pre.cwiseMax(0.0) * model.parameters.at(2);
      logits.rowwise() += model.parameters.at(3).row(0);
      probs = softmax_rows(logits);
      break;
    }
  }
  return ScoreMatrix(std::move(probs), model.class_names);
}

double accuracy(const TrainedModel& model, const LabeledDataset& data) {
  if (data.size() == 0) throw Error(Errc::Shape, "accuracy: empty dataset");
  const ScoreMatrix scores = predict_proba(model, data.features);
  const std::vector<std::size_t> predicted = argmax_labels(scores.values());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == data.labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace fusionkit
