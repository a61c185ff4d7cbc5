#pragma once

#include <stdexcept>
#include <string>

namespace ising_lwc {

enum class ErrorCode {
  invalid_degree,
  invalid_argument,
  size_limit,
  nonzero_field,
  config_error,
  io_error,
};

const char* to_string(ErrorCode code) noexcept;

/// Library-wide exception. `code()` distinguishes the failure class so
/// callers (the CLI in particular) can map it to a message or exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ising_lwc
