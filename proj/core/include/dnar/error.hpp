#pragma once

#include <stdexcept>
#include <string>

namespace dnar {

enum class ErrorCode {
  InvalidArgument,
  SingularEvaluation,
  NonFiniteState,
  DimensionMismatch,
  MarginalMismatch,
  NonNormalizable,
  KernelTooWide,
  DomainMismatch,
  CenterMismatch,
  NonzeroMeanOmega,
  SchemaError,
  VersionError,
  FormatError,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// command line layer can map it to an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::InvalidArgument, message);
}

}  // namespace dnar
