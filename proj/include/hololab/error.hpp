#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hololab {

enum class ErrorCode {
  InvalidArgument,
  OutOfDomain,
  SingularMetric,
  BadSignature,
  BadDimension,
  StepUnderflow,
  NotClosed,
  FamilyNotTrivial,
  EmptyRegion,
  NotTotallyGeodesic,
  LogUndefined,
  ShapeMismatch,
  OrderingViolated,
  SyntaxError,
  UnknownIdentifier,
  DomainError,
  UnboundVariable,
  UnknownExample,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::string expected)
      : Error(ErrorCode::SyntaxError,
              "at offset " + std::to_string(offset) + ": expected " + expected),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

}  // namespace hololab
