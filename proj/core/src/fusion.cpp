#include "fusionkit/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fusionkit/error.hpp"

namespace fusionkit {

namespace {

// Summation in ascending order. Makes every reduction independent of the
// order samples or classes arrive in, so permuting rows or columns gives
// bit-identical entropies and weights.
double ordered_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

// Values strictly above tau, sorted ascending, optionally rescaled to sum to one.
std::vector<double> surviving_values(std::span<const double> column, const EntropyConfig& config) {
  std::vector<double> kept;
  kept.reserve(column.size());
  for (double p : column) {
    if (!std::isfinite(p)) {
      throw Error(Errc::InvalidInput, "column entropy: non-finite probability value");
    }
    if (p < 0.0) {
      throw Error(Errc::InvalidInput, "column entropy: negative probability value");
    }
    if (p > config.tau) kept.push_back(p);
  }
  std::sort(kept.begin(), kept.end());
  if (config.column_mode == ColumnMode::Normalized && !kept.empty()) {
    double total = 0.0;
    for (double p : kept) total += p;
    for (double& p : kept) p /= total;
  }
  return kept;
}

void check_compatible(std::span<const ScoreMatrix> all_scores, std::size_t min_count,
                      const char* op) {
  if (all_scores.size() < min_count) {
    std::ostringstream msg;
    msg << op << ": need at least " << min_count << " score matrices, got " << all_scores.size();
    throw Error(Errc::Shape, msg.str());
  }
  const ScoreMatrix& first = all_scores.front();
  for (std::size_t j = 1; j < all_scores.size(); ++j) {
    const ScoreMatrix& s = all_scores[j];
    if (s.rows() != first.rows() || s.cols() != first.cols()) {
      std::ostringstream msg;
      msg << op << ": score matrix " << j << " is " << s.rows() << "x" << s.cols()
          << " but matrix 0 is " << first.rows() << "x" << first.cols();
      throw Error(Errc::Shape, msg.str());
    }
    if (s.class_names() != first.class_names()) {
      std::ostringstream msg;
      msg << op << ": score matrix " << j << " has a different class order than matrix 0";
      throw Error(Errc::Shape, msg.str());
    }
  }
}

Matrix weighted_accumulate(std::span<const ScoreMatrix> all_scores, std::span<const double> weights) {
  const auto rows = static_cast<Eigen::Index>(all_scores.front().rows());
  const auto cols = static_cast<Eigen::Index>(all_scores.front().cols());
  Matrix fused = Matrix::Zero(rows, cols);
  for (std::size_t j = 0; j < all_scores.size(); ++j) {
    const Matrix& s = all_scores[j].values();
    const double w = weights[j];
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) fused(r, c) += w * s(r, c);
    }
  }
  return fused;
}

}  // namespace

ScoreMatrix::ScoreMatrix(Matrix values, std::vector<std::string> class_names, double row_tolerance)
    : values_(std::move(values)), class_names_(std::move(class_names)) {
  if (values_.rows() < 1 || values_.cols() < 2) {
    throw Error(Errc::Shape, "score matrix needs at least 1 row and 2 class columns");
  }
  if (class_names_.size() != static_cast<std::size_t>(values_.cols())) {
    std::ostringstream msg;
    msg << "score matrix has " << values_.cols() << " columns but " << class_names_.size()
        << " class names";
    throw Error(Errc::Shape, msg.str());
  }
  for (Eigen::Index r = 0; r < values_.rows(); ++r) {
    double row_sum = 0.0;
    for (Eigen::Index c = 0; c < values_.cols(); ++c) {
      const double v = values_(r, c);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        std::ostringstream msg;
        msg << "score matrix entry (" << r << ", " << c << ") = " << v << " is outside [0, 1]";
        throw Error(Errc::InvalidInput, msg.str());
      }
      row_sum += v;
    }
    if (std::abs(row_sum - 1.0) > row_tolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "score matrix row " << r << " sums to " << row_sum << ", not 1";
      throw Error(Errc::Calibration, msg.str());
    }
  }
}

void EntropyConfig::validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(tau)) {
    throw Error(Errc::InvalidConfig, "entropy config: alpha and tau must be finite");
  }
  if (variant == EntropyVariant::Tsallis && alpha == 1.0) {
    throw Error(Errc::InvalidConfig, "entropy config: Tsallis entropy is undefined at alpha = 1");
  }
  if (tau < 0.0 || tau >= 1.0) {
    throw Error(Errc::InvalidConfig, "entropy config: tau must lie in [0, 1)");
  }
}

double shannon_column_entropy(std::span<const double> column, const EntropyConfig& config) {
  const std::vector<double> kept = surviving_values(column, config);
  std::vector<double> terms;
  terms.reserve(kept.size());
  for (double p : kept) terms.push_back(-p * std::log2(p));
  return ordered_sum(std::move(terms));
}

double tsallis_column_entropy(std::span<const double> column, const EntropyConfig& config) {
  if (config.alpha == 1.0) {
    throw Error(Errc::InvalidConfig, "Tsallis entropy is undefined at alpha = 1");
  }
  const std::vector<double> kept = surviving_values(column, config);
  if (kept.empty()) return 0.0;
  std::vector<double> powers;
  powers.reserve(kept.size());
  for (double p : kept) powers.push_back(config.alpha == 2.0 ? p * p : std::pow(p, config.alpha));
  return (1.0 - ordered_sum(std::move(powers))) / (config.alpha - 1.0);
}

double column_entropy(std::span<const double> column, const EntropyConfig& config) {
  return config.variant == EntropyVariant::Tsallis ? tsallis_column_entropy(column, config)
                                                   : shannon_column_entropy(column, config);
}

double classifier_entropy(const ScoreMatrix& scores, const EntropyConfig& config) {
  config.validate();
  const Matrix& values = scores.values();
  std::vector<double> column(scores.rows());
  std::vector<double> per_class;
  per_class.reserve(scores.cols());
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    for (Eigen::Index r = 0; r < values.rows(); ++r) column[static_cast<std::size_t>(r)] = values(r, c);
    per_class.push_back(column_entropy(column, config));
  }
  return ordered_sum(std::move(per_class));
}

FusionWeights entropy_weights(std::span<const ScoreMatrix> all_scores, const EntropyConfig& config,
                              OnDegenerate on_degenerate) {
  check_compatible(all_scores, 2, "entropy_weights");
  config.validate();

  FusionWeights out;
  out.entropies.reserve(all_scores.size());
  for (const ScoreMatrix& s : all_scores) out.entropies.push_back(classifier_entropy(s, config));

  for (std::size_t j = 0; j < out.entropies.size(); ++j) {
    if (out.entropies[j] < 0.0) {
      std::ostringstream msg;
      msg.precision(6);
      msg << "classifier " << j << " has negative entropy " << out.entropies[j]
          << " (literal column mode); its weight falls outside [0, 1]";
      out.warnings.push_back(msg.str());
    }
  }

  const double total = ordered_sum(out.entropies);
  if (total == 0.0 || !std::isfinite(total)) {
    if (on_degenerate == OnDegenerate::Error) {
      throw Error(Errc::DegenerateWeights,
                  "entropy_weights: classifier entropies sum to zero; no relative weights exist "
                  "(use the uniform fallback to fuse anyway)");
    }
    out.weights.assign(all_scores.size(), 1.0 / static_cast<double>(all_scores.size()));
    out.used_uniform_fallback = true;
    out.warnings.push_back("entropy total is zero; substituted uniform weights");
    return out;
  }
  out.weights.reserve(out.entropies.size());
  for (double e : out.entropies) out.weights.push_back(e / total);
  return out;
}

FusedDecision sum_fusion(std::span<const ScoreMatrix> all_scores) {
  check_compatible(all_scores, 1, "sum_fusion");
  const std::vector<double> ones(all_scores.size(), 1.0);
  FusedDecision out;
  out.fused_scores = weighted_accumulate(all_scores, ones);
  out.predicted_labels = argmax_labels(out.fused_scores);
  return out;
}

FusedDecision weighted_sum_fusion(std::span<const ScoreMatrix> all_scores,
                                  std::span<const double> weights) {
  check_compatible(all_scores, 1, "weighted_sum_fusion");
  if (weights.size() != all_scores.size()) {
    std::ostringstream msg;
    msg << "weighted_sum_fusion: " << weights.size() << " weights for " << all_scores.size()
        << " score matrices";
    throw Error(Errc::Shape, msg.str());
  }
  for (double w : weights) {
    if (!std::isfinite(w)) throw Error(Errc::InvalidInput, "weighted_sum_fusion: non-finite weight");
  }
  FusedDecision out;
  out.fused_scores = weighted_accumulate(all_scores, weights);
  out.predicted_labels = argmax_labels(out.fused_scores);
  return out;
}

EntropyFusionResult entropy_weighted_fusion(std::span<const ScoreMatrix> all_scores,
                                            const EntropyConfig& config,
                                            OnDegenerate on_degenerate) {
  EntropyFusionResult out;
  out.weights = entropy_weights(all_scores, config, on_degenerate);
  out.decision = weighted_sum_fusion(all_scores, out.weights.weights);
  return out;
}

std::vector<std::size_t> argmax_labels(const Matrix& scores) {
  if (scores.rows() == 0 || scores.cols() == 0) {
    throw Error(Errc::Shape, "argmax_labels: empty score matrix");
  }
  std::vector<std::size_t> labels(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
      const double v = scores(r, c);
      if (!std::isfinite(v)) throw Error(Errc::InvalidInput, "argmax_labels: non-finite score");
      if (v > scores(r, best)) best = c;
    }
    labels[static_cast<std::size_t>(r)] = static_cast<std::size_t>(best);
  }
  return labels;
}

std::vector<double> weights_from_accuracies(std::span<const double> accuracies) {
  double total = 0.0;
  for (double a : accuracies) {
    if (!std::isfinite(a) || a < 0.0) {
      throw Error(Errc::InvalidInput, "classifier accuracies must be finite and non-negative");
    }
    total += a;
  }
  if (total == 0.0) {
    throw Error(Errc::DegenerateWeights, "classifier accuracies sum to zero");
  }
  std::vector<double> out;
  out.reserve(accuracies.size());
  for (double a : accuracies) out.push_back(a / total);
  return out;
}

}  // namespace fusionkit
