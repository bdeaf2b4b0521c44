#include "volcast/error.hpp"

namespace volcast {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonAlignedCalendar: return "NonAlignedCalendar";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NegativeRV: return "NegativeRV";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::EmptyDay: return "EmptyDay";
    case ErrorCode::TooFewIntraday: return "TooFewIntraday";
    case ErrorCode::WindowExceedsSeries: return "WindowExceedsSeries";
    case ErrorCode::MeasureUnavailable: return "MeasureUnavailable";
    case ErrorCode::EmptyRangeAfterTrim: return "EmptyRangeAfterTrim";
    case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::InsufficientWindow: return "InsufficientWindow";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::SingularOmega: return "SingularOmega";
    case ErrorCode::ExplosiveDynamics: return "ExplosiveDynamics";
    case ErrorCode::ExpandingSchemeRejected: return "ExpandingSchemeRejected";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyResults: return "EmptyResults";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingColumn:
    case ErrorCode::NonAlignedCalendar:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::NegativeRV:
    case ErrorCode::ParseError:
    case ErrorCode::IoError:
    case ErrorCode::TooFewObservations:
    case ErrorCode::EmptyDay:
    case ErrorCode::TooFewIntraday:
    case ErrorCode::WindowExceedsSeries:
    case ErrorCode::MeasureUnavailable:
    case ErrorCode::EmptyRangeAfterTrim:
    case ErrorCode::InsufficientWindow:
    case ErrorCode::EmptyResults:
      return ErrorCategory::Data;
    case ErrorCode::ExpandingSchemeRejected:
    case ErrorCode::InvalidConfig:
      return ErrorCategory::Config;
    default:
      return ErrorCategory::Numerical;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void rethrow_with_context(const Error& e, std::string_view context) {
  std::string what = e.what();
  // Strip the "<Code>: " prefix added by the constructor so it is not repeated.
  const auto prefix = std::string(to_string(e.code())) + ": ";
  if (what.rfind(prefix, 0) == 0) what.erase(0, prefix.size());
  throw Error(e.code(), std::string(context) + ": " + what);
}

}  // namespace volcast
