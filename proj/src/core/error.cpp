#include "cylsfm/core/error.hpp"

namespace cylsfm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegenerateRay: return "DegenerateRay";
    case ErrorCode::BadPad: return "BadPad";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::CoverageGap: return "CoverageGap";
    case ErrorCode::BadFov: return "BadFov";
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EyeInsideGeometry: return "EyeInsideGeometry";
    case ErrorCode::BadArgument: return "BadArgument";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

}  // namespace cylsfm
