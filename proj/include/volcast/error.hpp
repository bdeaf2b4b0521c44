#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace volcast {

enum class ErrorCode {
  // data layer
  MissingColumn,
  NonAlignedCalendar,
  NonFiniteValue,
  NegativeRV,
  ParseError,
  IoError,
  TooFewObservations,
  EmptyDay,
  TooFewIntraday,
  WindowExceedsSeries,
  MeasureUnavailable,
  EmptyRangeAfterTrim,
  // numerics
  ZeroVarianceColumn,
  SingularDesign,
  NotConverged,
  NonFiniteInput,
  TooFewRows,
  InsufficientWindow,
  EmptySequence,
  DegenerateSeries,
  SingularOmega,
  ExplosiveDynamics,
  // configuration / orchestration
  ExpandingSchemeRejected,
  InvalidConfig,
  EmptyResults,
};

/// Coarse grouping used by the CLI to pick an exit code.
enum class ErrorCategory { Config, Data, Numerical };

std::string_view to_string(ErrorCode code) noexcept;
ErrorCategory category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Re-throws `e` with `context` prepended to its message, keeping the code.
[[noreturn]] void rethrow_with_context(const Error& e, std::string_view context);

}  // namespace volcast
