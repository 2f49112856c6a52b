#include "fusionkit/surrogate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fusionkit/datasets.hpp"
#include "fusionkit/matrix.hpp"
#include "fusionkit/preprocessing.hpp"
#include "text_util.hpp"

namespace fusionkit {

namespace {

namespace fs = std::filesystem;
using std::numbers::pi;

constexpr std::size_t kUciFeatureCount = 561;
constexpr double kUciRate = 50.0;
constexpr double kWisdmRate = 20.0;

// Per-class motion profile shared by both surrogates: dominant gait
// frequency (Hz), per-axis oscillation amplitude and gravity direction.
struct Motion {
  double frequency;
  std::array<double, 3> amplitude;
  std::array<double, 3> gravity;
};

// UCI-HAR order: walking, upstairs, downstairs, sitting, standing, laying.
constexpr std::array<Motion, 6> kUciMotions{{
    {1.9, {0.30, 0.18, 0.12}, {0.98, -0.15, 0.10}},
    {1.6, {0.24, 0.16, 0.14}, {0.96, -0.22, 0.12}},
    {2.1, {0.38, 0.20, 0.16}, {0.97, -0.10, 0.18}},
    {0.0, {0.012, 0.012, 0.012}, {0.86, 0.36, 0.36}},
    {0.0, {0.012, 0.012, 0.012}, {0.95, 0.26, 0.12}},
    {0.0, {0.010, 0.010, 0.010}, {0.10, 0.30, 0.95}},
}};

// WISDM order: walking, jogging, upstairs, downstairs, sitting, standing (m/s^2).
constexpr std::array<Motion, 6> kWisdmMotions{{
    {2.0, {3.5, 4.5, 2.0}, {0.5, 9.2, 0.9}},
    {2.8, {8.0, 9.5, 4.0}, {-0.5, 8.5, 0.2}},
    {1.7, {3.0, 3.8, 2.2}, {0.2, 9.0, 1.6}},
    {2.1, {3.8, 5.0, 2.5}, {0.4, 9.1, 1.2}},
    {0.0, {0.15, 0.15, 0.15}, {6.8, 1.5, 7.0}},
    {0.0, {0.20, 0.20, 0.20}, {0.8, 9.5, 0.6}},
}};

constexpr std::array<double, 6> kWisdmClassShare{0.38, 0.30, 0.11, 0.09, 0.065, 0.055};

std::size_t draw_class(std::mt19937_64& rng, std::span<const double> shares) {
  std::discrete_distribution<std::size_t> pick(shares.begin(), shares.end());
  return pick(rng);
}

// Three-axis window: gravity + harmonic gait signal + white noise. The
// per-window jitter plays the role of between-subject variation.
Matrix motion_window(const Motion& m, std::size_t length, double rate, double noise, double jitter,
                     std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
  const double freq = m.frequency * (1.0 + 0.08 * jitter * gauss(rng));
  const double scale = 1.0 + 0.25 * jitter * gauss(rng);
  std::array<double, 3> g{};
  std::array<double, 3> ph{};
  for (int a = 0; a < 3; ++a) {
    g[a] = m.gravity[a] * (1.0 + 0.05 * jitter * gauss(rng)) + 0.04 * jitter * gauss(rng) * std::abs(m.gravity[a] + 1.0);
    ph[a] = phase(rng);
  }
  Matrix w(static_cast<Eigen::Index>(length), 3);
  for (std::size_t t = 0; t < length; ++t) {
    const double time = static_cast<double>(t) / rate;
    for (int a = 0; a < 3; ++a) {
      const double s = std::sin(2.0 * pi * freq * time + ph[a]) + 0.35 * std::sin(4.0 * pi * freq * time + 1.3 * ph[a]);
      w(static_cast<Eigen::Index>(t), a) = g[a] + scale * m.amplitude[a] * s + noise * gauss(rng);
    }
  }
  return w;
}

void append_row(std::string& out, const double* values, std::size_t n) {
  char buf[40];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "%s%.7e", i == 0 ? " " : " ", values[i]);
    out += buf;
  }
  out += '\n';
}

struct UciSplitText {
  std::string features;
  std::string labels;
  std::array<std::string, kUciHarChannelCount> channels;
};

void write_ucihar_split(const fs::path& dir, const std::string& name, std::size_t count, const Matrix& projection,
                        std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, kUciHarClassCount - 1);
  UciSplitText text;
  const Eigen::Index latent = projection.cols();
  std::vector<double> feature_row(kUciFeatureCount);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t label = pick(rng);
    const Motion& m = kUciMotions[label];
    // Inertial view: body acceleration, total acceleration, gyroscope.
    const Matrix body = motion_window({m.frequency, m.amplitude, {0, 0, 0}}, kUciHarWindowLength, kUciRate, 0.06, 1.0, rng);
    Matrix total = body;
    for (int a = 0; a < 3; ++a) total.col(a).array() += m.gravity[a] * (1.0 + 0.04 * gauss(rng));
    const Matrix gyro = motion_window({m.frequency, {m.amplitude[2] * 2.0, m.amplitude[0] * 1.5, m.amplitude[1] * 1.5}, {0, 0, 0}},
                                      kUciHarWindowLength, kUciRate, 0.08, 1.0, rng);
    const Matrix* sources[] = {&body, &total, &gyro};
    for (std::size_t ch = 0; ch < kUciHarChannelCount; ++ch) {
      const Matrix& src = *sources[ch / 3];
      std::vector<double> series(kUciHarWindowLength);
      for (std::size_t t = 0; t < kUciHarWindowLength; ++t) series[t] = src(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(ch % 3));
      append_row(text.channels[ch], series.data(), series.size());
    }

    // Feature view: summary statistics of the window mixed through a fixed
    // projection, plus noise, clipped to [-1, 1] like the published features.
    Vector z(latent);
    Eigen::Index k = 0;
    for (const Matrix* src : sources) {
      for (int a = 0; a < 3; ++a) {
        const auto col = src->col(a);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().mean());
        if (k < latent) z(k++) = mean;
        if (k < latent) z(k++) = std::log(sd + 1e-3);
      }
    }
    while (k < latent) z(k++) = gauss(rng);
    const Vector f = projection * z;
    for (std::size_t j = 0; j < kUciFeatureCount; ++j) {
      feature_row[j] = std::clamp(std::tanh(f(static_cast<Eigen::Index>(j)) + 0.45 * gauss(rng)), -1.0, 1.0);
    }
    append_row(text.features, feature_row.data(), feature_row.size());
    text.labels += std::to_string(label + 1) + "\n";
  }

  const fs::path split_dir = dir / name;
  fs::create_directories(split_dir / "Inertial Signals");
  detail::write_file(split_dir / ("X_" + name + ".txt"), text.features);
  detail::write_file(split_dir / ("y_" + name + ".txt"), text.labels);
  static const char* const kChannels[] = {"body_acc_x", "body_acc_y", "body_acc_z", "total_acc_x", "total_acc_y",
                                          "total_acc_z", "body_gyro_x", "body_gyro_y", "body_gyro_z"};
  for (std::size_t ch = 0; ch < kUciHarChannelCount; ++ch) {
    detail::write_file(split_dir / "Inertial Signals" / (std::string(kChannels[ch]) + "_" + name + ".txt"),
                       text.channels[ch]);
  }
}

// Window statistics in the transformed WISDM layout (43 values).
std::vector<double> wisdm_transformed_features(const Matrix& w) {
  std::vector<double> out;
  for (int a = 0; a < 3; ++a) {
    const auto col = w.col(a);
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    std::array<double, 10> bins{};
    for (Eigen::Index t = 0; t < col.size(); ++t) {
      const auto b = hi > lo ? std::min<std::size_t>(9, static_cast<std::size_t>(10.0 * (col(t) - lo) / (hi - lo))) : 0;
      bins[b] += 1.0;
    }
    for (double b : bins) out.push_back(b / static_cast<double>(col.size()));
  }
  const std::vector<double> stats = extract_wisdm_features(w);
  for (int a = 0; a < 3; ++a) out.push_back(stats[4 * a]);
  for (int a = 0; a < 3; ++a) out.push_back(stats[4 * a + 3] * 1000.0 / kWisdmRate);
  for (int a = 0; a < 3; ++a) out.push_back(stats[4 * a + 2]);
  for (int a = 0; a < 3; ++a) out.push_back(stats[4 * a + 1]);
  out.push_back(stats[12]);
  return out;
}

std::vector<std::size_t> segment_users(std::size_t segments, std::size_t users, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(1, std::max<std::size_t>(1, users));
  std::vector<std::size_t> out(segments);
  for (auto& u : out) u = pick(rng);
  return out;
}

}  // namespace

void write_ucihar_surrogate(const fs::path& root, const UciHarSurrogateOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  constexpr Eigen::Index kLatent = 24;
  Matrix projection(static_cast<Eigen::Index>(kUciFeatureCount), kLatent);
  for (Eigen::Index r = 0; r < projection.rows(); ++r) {
    for (Eigen::Index c = 0; c < kLatent; ++c) projection(r, c) = 0.35 * gauss(rng);
  }
  fs::create_directories(root);
  std::string names;
  const char* const kNames[] = {"WALKING", "WALKING_UPSTAIRS", "WALKING_DOWNSTAIRS", "SITTING", "STANDING", "LAYING"};
  for (std::size_t k = 0; k < kUciHarClassCount; ++k) names += std::to_string(k + 1) + " " + kNames[k] + "\n";
  detail::write_file(root / "activity_labels.txt", names);
  write_ucihar_split(root, "train", options.train_count, projection, rng);
  write_ucihar_split(root, "test", options.test_count, projection, rng);
}

void write_wisdm_arff_surrogate(const fs::path& path, const WisdmSurrogateOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<std::string>& classes = wisdm_class_names();
  const std::vector<std::size_t> users = segment_users(options.segments, options.users, rng);

  std::ostringstream out;
  out << "@relation person_activities_labeled\n\n";
  out << "@attribute \"UNIQUE_ID\" numeric\n@attribute \"user\" {";
  for (std::size_t u = 1; u <= options.users; ++u) out << (u > 1 ? "," : "") << u;
  out << "}\n";
  for (const char axis : {'X', 'Y', 'Z'}) {
    for (int b = 0; b < 10; ++b) out << "@attribute \"" << axis << b << "\" numeric\n";
  }
  for (const char* stat : {"AVG", "PEAK", "ABSOLDEV", "STANDDEV"}) {
    for (const char axis : {'X', 'Y', 'Z'}) out << "@attribute \"" << axis << stat << "\" numeric\n";
  }
  out << "@attribute \"RESULTANT\" numeric\n@attribute class {";
  for (std::size_t k = 0; k < classes.size(); ++k) out << (k ? "," : "") << classes[k];
  out << "}\n\n@data\n";

  char buf[40];
  for (std::size_t i = 0; i < options.segments; ++i) {
    const std::size_t label = draw_class(rng, kWisdmClassShare);
    const Matrix w = motion_window(kWisdmMotions[label], kWisdmWindowLength, kWisdmRate, 1.1, 1.6, rng);
    const std::vector<double> f = wisdm_transformed_features(w);
    out << (i + 1) << "," << users[i];
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (unit(rng) < 0.004) {
        out << ",?";
      } else {
        std::snprintf(buf, sizeof(buf), ",%.4f", f[j]);
        out << buf;
      }
    }
    out << "," << classes[label] << "\n";
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  detail::write_file(path, out.str());
}

void write_wisdm_raw_surrogate(const fs::path& path, const WisdmSurrogateOptions& options) {
  std::mt19937_64 rng(options.seed);
  const std::vector<std::string>& classes = wisdm_class_names();
  const std::vector<std::size_t> users = segment_users(options.segments, options.users, rng);
  std::vector<std::size_t> order(options.segments);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return users[a] < users[b]; });

  std::string out;
  char buf[160];
  std::uint64_t timestamp = 49105962326000ULL;
  for (std::size_t i : order) {
    const std::size_t label = draw_class(rng, kWisdmClassShare);
    const Matrix w = motion_window(kWisdmMotions[label], kWisdmWindowLength, kWisdmRate, 1.1, 1.6, rng);
    for (Eigen::Index t = 0; t < w.rows(); ++t) {
      timestamp += 50000000ULL;
      std::snprintf(buf, sizeof(buf), "%zu,%s,%llu,%.2f,%.2f,%.2f;\n", users[i], classes[label].c_str(),
                    static_cast<unsigned long long>(timestamp), w(t, 0), w(t, 1), w(t, 2));
      out += buf;
    }
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  detail::write_file(path, out);
}

}  // namespace fusionkit
