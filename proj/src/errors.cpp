#include "ncentre/errors.hpp"

namespace ncentre {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CollisionPoint: return "CollisionPoint";
    case ErrorCode::NonpositiveEnergy: return "NonpositiveEnergy";
    case ErrorCode::DegenerateElements: return "DegenerateElements";
    case ErrorCode::ExactCollision: return "ExactCollision";
    case ErrorCode::NotHyperbolic: return "NotHyperbolic";
    case ErrorCode::BelowPericentre: return "BelowPericentre";
    case ErrorCode::CollisionAbort: return "CollisionAbort";
    case ErrorCode::StepLimit: return "StepLimit";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotScattering: return "NotScattering";
    case ErrorCode::HorizonAmbiguous: return "HorizonAmbiguous";
    case ErrorCode::StencilFailure: return "StencilFailure";
    case ErrorCode::NotTwoCentres: return "NotTwoCentres";
    case ErrorCode::WrongItinerary: return "WrongItinerary";
    case ErrorCode::Inadmissible: return "Inadmissible";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

}  // namespace ncentre
