#include "fusionkit/error.hpp"

namespace fusionkit {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidInput: return "invalid input";
    case Errc::InvalidConfig: return "invalid config";
    case Errc::Shape: return "shape error";
    case Errc::DegenerateWeights: return "degenerate weights";
    case Errc::Io: return "I/O error";
    case Errc::Integrity: return "integrity error";
    case Errc::Parse: return "parse error";
    case Errc::ParseQuality: return "parse-quality error";
    case Errc::Schema: return "schema error";
    case Errc::Calibration: return "calibration error";
    case Errc::Stratification: return "stratification error";
    case Errc::UnknownLabel: return "unknown label";
    case Errc::Usage: return "usage error";
  }
  return "error";
}

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::Usage:
    case Errc::InvalidConfig:
      return 1;
    case Errc::InvalidInput:
    case Errc::DegenerateWeights:
      return 3;
    default:
      return 2;
  }
}

}  // namespace fusionkit
