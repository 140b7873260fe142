#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace layoutkit {

/// Machine-readable failure categories. The CLI prints these verbatim.
enum class ErrorCode {
  domain,
  io,
  format,
  no_consensus,
  insufficient_corners,
  horizon_violation,
  invalid_layout,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Precondition or argument outside the operation's domain.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorCode::format, what) {}
};

}  // namespace layoutkit
