#pragma once

#include <stdexcept>
#include <string>

namespace qguard {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  Validation,
  Io,
  BackendTransport,
  BackendTimeout,
  TokenNotFound,
  Indeterminate,
  Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qguard
