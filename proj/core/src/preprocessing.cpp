#include "fusionkit/preprocessing.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "fusionkit/error.hpp"

namespace fusionkit {

ZScoreFit zscore_fit_transform(const Matrix& train) {
  if (train.rows() == 0 || train.cols() == 0) throw Error(Errc::Shape, "zscore: empty training matrix");
  ZScoreFit fit;
  const double n = static_cast<double>(train.rows());
  fit.stats.means = train.colwise().sum() / n;
  fit.stats.stddevs.resize(train.cols());
  for (Eigen::Index c = 0; c < train.cols(); ++c) {
    const double var = (train.col(c).array() - fit.stats.means(c)).square().sum() / n;
    double sd = std::sqrt(var);
    if (!(sd > kStddevFloor)) {
      std::ostringstream msg;
      msg << "zscore: column " << c << " has zero spread; stddev floored at " << kStddevFloor;
      fit.warnings.push_back(msg.str());
      sd = kStddevFloor;
    }
    fit.stats.stddevs(c) = sd;
  }
  fit.transformed = zscore_apply(train, fit.stats);
  return fit;
}

Matrix zscore_apply(const Matrix& data, const ZScoreStats& stats) {
  if (data.cols() != stats.means.size()) {
    std::ostringstream msg;
    msg << "zscore: data has " << data.cols() << " columns, statistics have " << stats.means.size();
    throw Error(Errc::Shape, msg.str());
  }
  Matrix out = data;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    out.row(r) = (out.row(r) - stats.means).cwiseQuotient(stats.stddevs);
  }
  return out;
}

Matrix restructure_1d_to_2d(std::span<const double> vector, std::size_t rows, std::size_t cols,
                            FillOrder order) {
  if (rows * cols != vector.size() || rows == 0) {
    std::ostringstream msg;
    msg << "restructure: " << rows << "x" << cols << " does not hold " << vector.size() << " values";
    throw Error(Errc::Shape, msg.str());
  }
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t src = order == FillOrder::RowMajor ? i * cols + j : j * rows + i;
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vector[src];
    }
  }
  return out;
}

std::vector<double> flatten_2d(const Matrix& matrix, FillOrder order) {
  const auto rows = static_cast<std::size_t>(matrix.rows());
  const auto cols = static_cast<std::size_t>(matrix.cols());
  std::vector<double> out(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t dst = order == FillOrder::RowMajor ? i * cols + j : j * rows + i;
      out[dst] = matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

namespace {

using Complex = std::complex<double>;

// In-place iterative Cooley-Tukey, forward direction (exp(-2 pi i k n / N)).
void fft_inplace(std::vector<Complex>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const Complex w = std::polar(1.0, angle * static_cast<double>(k));
        const Complex u = a[start + k];
        const Complex v = a[start + k + len / 2] * w;
        a[start + k] = u + v;
        a[start + k + len / 2] = u - v;
      }
    }
  }
}

}  // namespace

Matrix fft2d_magnitude(const Matrix& matrix) {
  const auto rows = static_cast<std::size_t>(matrix.rows());
  const auto cols = static_cast<std::size_t>(matrix.cols());
  if (rows == 0 || cols == 0 || !std::has_single_bit(rows) || !std::has_single_bit(cols)) {
    std::ostringstream msg;
    msg << "fft2d: unsupported size " << rows << "x" << cols << " (both dimensions must be powers of two)";
    throw Error(Errc::Shape, msg.str());
  }
  if (!matrix.allFinite()) throw Error(Errc::InvalidInput, "fft2d: non-finite input");

  std::vector<Complex> grid(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      grid[i * cols + j] = matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  std::vector<Complex> line(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(i * cols), cols, line.begin());
    fft_inplace(line);
    std::copy(line.begin(), line.end(), grid.begin() + static_cast<std::ptrdiff_t>(i * cols));
  }
  line.resize(rows);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) line[i] = grid[i * cols + j];
    fft_inplace(line);
    for (std::size_t i = 0; i < rows; ++i) grid[i * cols + j] = line[i];
  }

  Matrix out(matrix.rows(), matrix.cols());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::abs(grid[i * cols + j]);
    }
  }
  return out;
}

std::vector<double> extract_wisdm_features(const Matrix& window) {
  if (static_cast<std::size_t>(window.rows()) != kWisdmWindowLength || window.cols() != 3) {
    std::ostringstream msg;
    msg << "wisdm features: expected a " << kWisdmWindowLength << "x3 window, got " << window.rows()
        << "x" << window.cols();
    throw Error(Errc::Shape, msg.str());
  }
  const double n = static_cast<double>(window.rows());
  std::vector<double> out;
  out.reserve(kWisdmFeatureCount);
  for (Eigen::Index axis = 0; axis < 3; ++axis) {
    const auto x = window.col(axis);
    const double mean = x.sum() / n;
    const double sd = std::sqrt((x.array() - mean).square().sum() / n);
    const double mad = (x.array() - mean).abs().sum() / n;

    std::vector<Eigen::Index> peaks;
    for (Eigen::Index i = 1; i + 1 < x.size(); ++i) {
      if (x(i) > mean && x(i) > x(i - 1) && x(i) > x(i + 1)) peaks.push_back(i);
    }
    double interval = 0.0;
    if (peaks.size() >= 2) {
      interval = static_cast<double>(peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
    }
    out.insert(out.end(), {mean, sd, mad, interval});
  }
  out.push_back(window.rowwise().norm().sum() / n);
  return out;
}

std::vector<LabeledWindow> sliding_windows(const Matrix& samples, std::span<const std::size_t> labels,
                                           std::size_t window, double overlap) {
  const auto n = static_cast<std::size_t>(samples.rows());
  if (labels.size() != n) throw Error(Errc::Shape, "sliding_windows: label count differs from sample count");
  if (window == 0 || window > n) throw Error(Errc::Shape, "sliding_windows: window must be in [1, n]");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw Error(Errc::InvalidConfig, "sliding_windows: overlap must be in [0, 1)");

  const auto stride = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(static_cast<double>(window) * (1.0 - overlap) + 1e-9)));
  std::vector<LabeledWindow> out;
  for (std::size_t start = 0; start + window <= n; start += stride) {
    std::vector<std::size_t> counts;
    for (std::size_t i = start; i < start + window; ++i) {
      if (labels[i] >= counts.size()) counts.resize(labels[i] + 1, 0);
      ++counts[labels[i]];
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < counts.size(); ++k) {
      if (counts[k] > counts[best]) best = k;
    }
    if (2 * counts[best] <= window) continue;
    out.push_back({start, best,
                   samples.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(window))});
  }
  return out;
}

Matrix inertial_raw_features(std::span<const MultiChannelWindow> windows) {
  if (windows.empty()) return Matrix(0, 0);
  const Eigen::Index width = windows.front().values.size();
  Matrix out(static_cast<Eigen::Index>(windows.size()), width);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Matrix& v = windows[i].values;
    if (v.size() != width) throw Error(Errc::Shape, "inertial windows differ in size");
    out.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const RowVector>(v.data(), width);
  }
  return out;
}

Matrix inertial_fft2d_features(std::span<const MultiChannelWindow> windows, std::size_t rows,
                               std::size_t cols, FillOrder order) {
  if (windows.empty()) return Matrix(0, 0);
  const Eigen::Index channels = windows.front().values.rows();
  const auto per_channel = static_cast<Eigen::Index>(rows * cols);
  Matrix out(static_cast<Eigen::Index>(windows.size()), channels * per_channel);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Matrix& v = windows[i].values;
    if (v.rows() != channels) throw Error(Errc::Shape, "inertial windows differ in channel count");
    for (Eigen::Index ch = 0; ch < channels; ++ch) {
      const RowVector signal = v.row(ch);
      const Matrix grid = restructure_1d_to_2d(std::span<const double>(signal.data(), static_cast<std::size_t>(signal.size())),
                                               rows, cols, order);
      const std::vector<double> mags = flatten_2d(fft2d_magnitude(grid));
      for (Eigen::Index k = 0; k < per_channel; ++k) {
        out(static_cast<Eigen::Index>(i), ch * per_channel + k) = mags[static_cast<std::size_t>(k)];
      }
    }
  }
  return out;
}

}  // namespace fusionkit
