#include "geolab/errors.hpp"

namespace geolab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::precondition: return "PreconditionViolation";
    case ErrorCode::non_admissible_psi: return "NonAdmissiblePsi";
    case ErrorCode::interior_too_thin: return "InteriorTooThin";
    case ErrorCode::incompatible_mass: return "IncompatibleMass";
    case ErrorCode::singular_system: return "SingularSystem";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::positivity_loss: return "PositivityLoss";
    case ErrorCode::non_convex_input: return "NonConvexInput";
    case ErrorCode::negative_density: return "NegativeDensity";
    case ErrorCode::family_mismatch: return "FamilyMismatch";
    case ErrorCode::not_a_solution: return "NotASolution";
    case ErrorCode::invalid_sequence: return "InvalidSequence";
    case ErrorCode::unsupported_scheme: return "UnsupportedScheme";
    case ErrorCode::config: return "ConfigError";
    case ErrorCode::io: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace geolab
