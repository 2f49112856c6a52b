#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

// Synthetic stand-ins for the public activity datasets, written in the same
// on-disk formats as the originals so the regular loaders read them.

namespace fusionkit {

struct UciHarSurrogateOptions {
  std::size_t train_count = 1200;
  std::size_t test_count = 600;
  std::uint64_t seed = 7;
};

/// Writes activity_labels.txt, {train,test}/X_*.txt (561 features),
/// y_*.txt (1-based) and the nine Inertial Signals files (128 samples).
void write_ucihar_surrogate(const std::filesystem::path& root, const UciHarSurrogateOptions& options = {});

struct WisdmSurrogateOptions {
  std::size_t segments = 1800;  // ARFF rows, or 200-sample segments for raw
  std::size_t users = 20;
  std::uint64_t seed = 11;
};

/// Transformed-format ARFF: UNIQUE_ID, user, 43 numeric features, class.
/// A small fraction of feature values is written as "?".
void write_wisdm_arff_surrogate(const std::filesystem::path& path, const WisdmSurrogateOptions& options = {});

/// Raw "user,activity,timestamp,x,y,z;" lines at 20 Hz.
void write_wisdm_raw_surrogate(const std::filesystem::path& path, const WisdmSurrogateOptions& options = {});

}  // namespace fusionkit
