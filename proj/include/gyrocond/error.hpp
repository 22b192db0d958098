#pragma once

#include <stdexcept>
#include <string>

namespace gyrocond {

/// Error raised by every module. `code()` is a short stable identifier
/// (e.g. "read-only", "unknown-tap") that the command protocol forwards
/// to clients unchanged.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace gyrocond
