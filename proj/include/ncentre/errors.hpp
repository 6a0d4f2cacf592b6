#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ncentre {

enum class ErrorCode {
  CollisionPoint,
  NonpositiveEnergy,
  DegenerateElements,
  ExactCollision,
  NotHyperbolic,
  BelowPericentre,
  CollisionAbort,
  StepLimit,
  NoConvergence,
  NotScattering,
  HorizonAmbiguous,
  StencilFailure,
  NotTwoCentres,
  WrongItinerary,
  Inadmissible,
  ParseError,
  ValidationError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// that batch drivers can record it per row instead of aborting.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ncentre
