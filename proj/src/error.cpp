#include "fedfolio/error.hpp"

namespace fedfolio {

const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kInvalidConfig:
      return "invalid-config";
    case ErrorCategory::kInsufficientHistory:
      return "insufficient-history";
    case ErrorCategory::kSingularCovariance:
      return "singular-covariance";
    case ErrorCategory::kDimensionMismatch:
      return "dimension-mismatch";
    case ErrorCategory::kDegenerateMeans:
      return "degenerate-means";
    case ErrorCategory::kInvalidAllocation:
      return "invalid-allocation";
    case ErrorCategory::kUnknownClient:
      return "unknown-client";
    case ErrorCategory::kDuplicateSeed:
      return "duplicate-seed";
    case ErrorCategory::kWarmupTooLong:
      return "warmup-too-long";
    case ErrorCategory::kNoConvergence:
      return "no-convergence";
    case ErrorCategory::kIo:
      return "io-error";
    case ErrorCategory::kUsage:
      return "usage-error";
  }
  return "unknown-error";
}

bool is_usage_error(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kInvalidConfig:
    case ErrorCategory::kDuplicateSeed:
    case ErrorCategory::kWarmupTooLong:
    case ErrorCategory::kUsage:
      return true;
    default:
      return false;
  }
}

}  // namespace fedfolio
