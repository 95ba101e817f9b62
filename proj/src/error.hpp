#pragma once

#include <stdexcept>
#include <string>

namespace nak {

enum class ErrorCode {
  InvalidArgument = 1,
  DivergentFunctional,
  DivergentDrift,
  SingularKernel,
  UnsupportedRegion,
  DegenerateGroup,
  FitFailure,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure inside the library surfaces as this exception; the C API maps
// `code()` onto its status enum.
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

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace nak
