#pragma once

#include <stdexcept>
#include <string>

namespace fedfolio {

// Machine-readable failure categories. The string form is stable and is
// what the CLI prints; exit codes are derived from is_usage_error().
enum class ErrorCategory {
  kInvalidConfig,
  kInsufficientHistory,
  kSingularCovariance,
  kDimensionMismatch,
  kDegenerateMeans,
  kInvalidAllocation,
  kUnknownClient,
  kDuplicateSeed,
  kWarmupTooLong,
  kNoConvergence,
  kIo,
  kUsage,
};

const char* category_name(ErrorCategory c);

// Validation-type failures map to CLI exit code 2, runtime failures to 1.
bool is_usage_error(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(std::string(category_name(category)) + ": " +
                           message),
        category_(category),
        message_(message) {}

  ErrorCategory category() const { return category_; }
  // The message without the category prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorCategory category_;
  std::string message_;
};

}  // namespace fedfolio
