#include "lp/error.hpp"

namespace lp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidAnnotation: return "codec.INVALID_ANNOTATION";
    case ErrorCode::AlignmentError: return "evaluation.ALIGNMENT_ERROR";
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::NoTokens: return "synthetic.NO_TOKENS";
    case ErrorCode::FormatError: return "io.FORMAT_ERROR";
    case ErrorCode::ErrorBudgetExceeded: return "io.ERROR_BUDGET_EXCEEDED";
    case ErrorCode::IoError: return "io.IO_ERROR";
    case ErrorCode::BackendUnreachable: return "backends.BACKEND_UNREACHABLE";
    case ErrorCode::BackendError: return "backends.BACKEND_ERROR";
    case ErrorCode::ScorerUnavailable: return "corpus.SCORER_UNAVAILABLE";
    case ErrorCode::ConfigError: return "cli.CONFIG_ERROR";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

BackendError::BackendError(int status, std::string body_excerpt)
    : Error(ErrorCode::BackendError,
            "status " + std::to_string(status) + ": " + body_excerpt),
      status_(status),
      body_excerpt_(std::move(body_excerpt)) {}

}  // namespace lp
