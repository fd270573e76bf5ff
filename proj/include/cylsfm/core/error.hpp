#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cylsfm {

enum class ErrorCode {
  DegenerateRay,
  BadPad,
  ShapeMismatch,
  EmptyMask,
  Diverged,
  CoverageGap,
  BadFov,
  TooFewFrames,
  NonPositiveDepth,
  LengthMismatch,
  EyeInsideGeometry,
  BadArgument,
  BadConfig,
  Io,
  Format,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Throws Error(code, message) unless cond holds.
inline void require(bool cond, ErrorCode code, const std::string& message) {
  if (!cond) throw Error(code, message);
}

}  // namespace cylsfm
