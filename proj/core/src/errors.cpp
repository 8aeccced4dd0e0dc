#include "specnet/errors.hpp"

namespace specnet {

const char* to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::kInput: return "input";
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kState: return "state";
    case ErrorCategory::kDivergence: return "divergence";
    case ErrorCategory::kDegenerate: return "degenerate";
    case ErrorCategory::kRank: return "rank";
    case ErrorCategory::kNotSpd: return "not-spd";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace specnet
