#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lp {

enum class ErrorCode {
  InvalidAnnotation,
  AlignmentError,
  EmptyInput,
  NoTokens,
  FormatError,
  ErrorBudgetExceeded,
  IoError,
  BackendUnreachable,
  BackendError,
  ScorerUnavailable,
  ConfigError,
};

/// Module-qualified name, e.g. "codec.INVALID_ANNOTATION".
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Non-2xx answer from a remote backend. Carries the status and the first
/// bytes of the response body.
class BackendError : public Error {
 public:
  BackendError(int status, std::string body_excerpt);

  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return body_excerpt_; }

 private:
  int status_;
  std::string body_excerpt_;
};

}  // namespace lp
