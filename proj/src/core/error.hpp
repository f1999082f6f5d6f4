#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bb {

enum class ErrorCode {
  kValidationFailed = 1,
  kParse,
  kCutoff,
  kNoConvergence,
  kPositiveFeedback,
  kDiverged,
  kWindowTooShort,
  kNonCoherentWindow,
  kRecordTooShort,
  kNonlinearRegime,
  kInvalidArgument,
  kIo,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Carries every violated invariant, not just the first one found.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Raised when a feedback transistor leaves the triode region.
class CutoffError : public Error {
 public:
  CutoffError(const std::string& what, double time_s)
      : Error(ErrorCode::kCutoff, what), time_s_(time_s) {}
  /// Simulation time of the event; negative for static analyses.
  double time_s() const noexcept { return time_s_; }

 private:
  double time_s_;
};

}  // namespace bb
