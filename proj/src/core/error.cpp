#include "error.hpp"

namespace bb {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidationFailed: return "VALIDATION_FAILED";
    case ErrorCode::kParse: return "PARSE_ERROR";
    case ErrorCode::kCutoff: return "CUTOFF";
    case ErrorCode::kNoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::kPositiveFeedback: return "POSITIVE_FEEDBACK";
    case ErrorCode::kDiverged: return "DIVERGED";
    case ErrorCode::kWindowTooShort: return "WINDOW_TOO_SHORT";
    case ErrorCode::kNonCoherentWindow: return "NON_COHERENT_WINDOW";
    case ErrorCode::kRecordTooShort: return "RECORD_TOO_SHORT";
    case ErrorCode::kNonlinearRegime: return "NONLINEAR_REGIME";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kIo: return "IO_ERROR";
  }
  return "UNKNOWN";
}

namespace {
std::string join_violations(const std::vector<std::string>& v) {
  std::string out = "VALIDATION_FAILED:";
  for (const auto& s : v) {
    out += "\n  - ";
    out += s;
  }
  return out;
}
}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(ErrorCode::kValidationFailed, join_violations(violations)),
      violations_(std::move(violations)) {}

}  // namespace bb
