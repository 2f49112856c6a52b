#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fusionkit/matrix.hpp"

namespace fusionkit {

struct ZScoreStats {
  RowVector means;
  RowVector stddevs;
};

struct ZScoreFit {
  Matrix transformed;
  ZScoreStats stats;
  std::vector<std::string> warnings;
};

inline constexpr double kStddevFloor = 1e-12;

/// Column-wise standardization with population statistics of `train`.
/// Zero-spread columns get a floored stddev and a warning.
ZScoreFit zscore_fit_transform(const Matrix& train);

/// Applies previously fitted statistics; never looks at `data`'s own moments.
Matrix zscore_apply(const Matrix& data, const ZScoreStats& stats);

/// k channels by w samples (UCI-HAR inertial windows are 9 x 128).
struct MultiChannelWindow {
  Matrix values;
};

enum class FillOrder { RowMajor, ColumnMajor };

Matrix restructure_1d_to_2d(std::span<const double> vector, std::size_t rows, std::size_t cols,
                            FillOrder order = FillOrder::RowMajor);

/// Inverse of restructure_1d_to_2d under the same fill order.
std::vector<double> flatten_2d(const Matrix& matrix, FillOrder order = FillOrder::RowMajor);

/// Elementwise magnitude of the unnormalized, unshifted forward 2-D DFT,
/// computed with a radix-2 FFT. Both dimensions must be powers of two.
Matrix fft2d_magnitude(const Matrix& matrix);

inline constexpr std::size_t kWisdmWindowLength = 200;
inline constexpr std::size_t kWisdmFeatureCount = 13;

/// Per axis (x, y, z): mean, stddev, mean absolute deviation, mean interval
/// between peaks in samples; then the mean resultant magnitude. A peak is a
/// strict local maximum above the axis mean; fewer than two peaks gives 0.
std::vector<double> extract_wisdm_features(const Matrix& window);

struct LabeledWindow {
  std::size_t start = 0;
  std::size_t label = 0;
  Matrix values;  // window x channels
};

/// Cuts `samples` (n x channels) into windows with stride
/// window * (1 - overlap). A window keeps its plurality label (lowest index on
/// ties) only when that label covers more than half of it.
std::vector<LabeledWindow> sliding_windows(const Matrix& samples, std::span<const std::size_t> labels,
                                           std::size_t window, double overlap);

/// Concatenates each window's channels into one feature row.
Matrix inertial_raw_features(std::span<const MultiChannelWindow> windows);

/// Restructures each channel to rows x cols, takes the 2-D FFT magnitude and
/// concatenates the flattened results.
Matrix inertial_fft2d_features(std::span<const MultiChannelWindow> windows, std::size_t rows = 16,
                               std::size_t cols = 8, FillOrder order = FillOrder::RowMajor);

}  // namespace fusionkit
