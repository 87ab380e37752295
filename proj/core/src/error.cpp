#include "dnar/error.hpp"

namespace dnar {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularEvaluation: return "SingularEvaluation";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MarginalMismatch: return "MarginalMismatch";
    case ErrorCode::NonNormalizable: return "NonNormalizable";
    case ErrorCode::KernelTooWide: return "KernelTooWide";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::CenterMismatch: return "CenterMismatch";
    case ErrorCode::NonzeroMeanOmega: return "NonzeroMeanOmega";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::VersionError: return "VersionError";
    case ErrorCode::FormatError: return "FormatError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace dnar
