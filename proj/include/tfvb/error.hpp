#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tfvb {

enum class Errc {
  OutOfRangeCoordinate,
  DuplicateCoordinate,
  NegativeValue,
  UnknownIndex,
  TooLargeToMaterialize,
  InvalidPrior,
  SyntaxError,
  UncoveredVisibleIndex,
  OrphanFactor,
  ShapeMismatch,
  NonFiniteResult,
  FactorNotConnected,
  NonFiniteUpdate,
  DomainError,
  InvalidConfig,
  EmptyTensor,
  DegenerateSplit,
  SingleClass,
  SupportMismatch,
  InvalidSpec,
  ConflictingDuplicate,
  IoError,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, int line = 0)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        line_(line) {}

  Errc code() const noexcept { return code_; }
  // 1-based source line for parse errors, 0 otherwise.
  int line() const noexcept { return line_; }

  // Numeric failures map to exit code 2 in the command-line tool.
  bool is_numeric() const noexcept {
    return code_ == Errc::NonFiniteResult || code_ == Errc::NonFiniteUpdate ||
           code_ == Errc::DomainError;
  }

 private:
  Errc code_;
  int line_;
};

}  // namespace tfvb
