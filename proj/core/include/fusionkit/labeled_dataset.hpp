#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fusionkit/matrix.hpp"

namespace fusionkit {

/// Feature rows with 0-based class labels into `class_names`.
struct LabeledDataset {
  Matrix features;
  std::vector<std::size_t> labels;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t feature_count() const noexcept { return static_cast<std::size_t>(features.cols()); }
  std::size_t class_count() const noexcept { return class_names.size(); }

  /// Row/label count agreement, label range and (unless `allow_missing`)
  /// finiteness of every feature. Missing ARFF values are carried as NaN
  /// until imputation, hence the escape hatch.
  void validate(bool allow_missing = false) const;

  /// Rows selected by `indices`, in that order.
  LabeledDataset subset(std::span<const std::size_t> indices) const;

  /// Number of samples per class.
  std::vector<std::size_t> class_counts() const;
};

}  // namespace fusionkit
