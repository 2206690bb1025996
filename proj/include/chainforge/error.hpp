#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chainforge {

// Closed set of failure categories. The names double as the `code` field of
// service error bodies.
enum class ErrorCode {
  invalid_spectrum,
  solver_overflow,
  eigensolver_failure,
  bad_request,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_spectrum: return "invalid_spectrum";
    case ErrorCode::solver_overflow: return "solver_overflow";
    case ErrorCode::eigensolver_failure: return "eigensolver_failure";
    case ErrorCode::bad_request: return "bad_request";
  }
  return "bad_request";
}

// True for failures caused by floating point limits rather than bad input.
constexpr bool is_numerical(ErrorCode code) {
  return code == ErrorCode::solver_overflow || code == ErrorCode::eigensolver_failure;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(message), code_(code), index_(index) {}

  ErrorCode code() const noexcept { return code_; }

  // Offending element (eigenvalue, weight, sample) when one can be named.
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace chainforge
