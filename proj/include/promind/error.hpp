#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace promind {

enum class ErrorCode {
  InvalidArgument,  // violates a domain invariant
  NotFound,
  StaleResponse,
  TerminalStage,
  Rejected,         // operation not applicable (e.g. trigger on a time-based task)
  Storage,          // retryable I/O failure
  Corrupt,
};

/// A single field-level problem, as surfaced by the service's 422 bodies.
struct FieldError {
  std::string field;
  std::string message;

  bool operator==(const FieldError&) const = default;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<FieldError> fields = {})
      : std::runtime_error(message), code_(code), fields_(std::move(fields)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<FieldError>& fields() const noexcept { return fields_; }

 private:
  ErrorCode code_;
  std::vector<FieldError> fields_;
};

/// InvalidArgument whose message names the first field problem.
inline Error invalid_fields(std::vector<FieldError> fields, const std::string& prefix = {}) {
  std::string message = prefix;
  if (!fields.empty()) message += fields.front().field + ": " + fields.front().message;
  return Error(ErrorCode::InvalidArgument, message, std::move(fields));
}

}  // namespace promind
