#include "error.hpp"

namespace nak {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::DivergentFunctional: return "divergent-functional";
    case ErrorCode::DivergentDrift: return "divergent-drift";
    case ErrorCode::SingularKernel: return "singular-kernel";
    case ErrorCode::UnsupportedRegion: return "unsupported-region";
    case ErrorCode::DegenerateGroup: return "degenerate-group";
    case ErrorCode::FitFailure: return "fit-failure";
    case ErrorCode::ConfigError: return "config-error";
    case ErrorCode::IoError: return "io-error";
  }
  return "unknown";
}

}  // namespace nak
