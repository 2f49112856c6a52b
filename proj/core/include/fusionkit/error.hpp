#pragma once

#include <stdexcept>
#include <string>

namespace fusionkit {

enum class Errc {
  InvalidInput,
  InvalidConfig,
  Shape,
  DegenerateWeights,
  Io,
  Integrity,
  Parse,
  ParseQuality,
  Schema,
  Calibration,
  Stratification,
  UnknownLabel,
  Usage,
};

const char* to_string(Errc code) noexcept;

// Process exit status for the CLI: 1 usage, 2 data/parse, 3 numeric/degenerate.
int exit_code_for(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace fusionkit
