#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace interlab {

enum class ErrorCode {
  invalid_argument,
  parse,
  asymmetric,
  disconnected,
  singular,
  not_converged,
  budget_exceeded,
  too_large,
  io,
  usage,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code is
/// stable and is what the command-line tool reports in its JSON errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace interlab
