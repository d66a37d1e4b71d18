#include "tdel/error.hpp"

namespace tdel {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::BeyondInjectivityFloor: return "BeyondInjectivityFloor";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::NoNegativeSlope: return "NoNegativeSlope";
    case ErrorKind::SeparationViolated: return "SeparationViolated";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::RootsCoincide: return "RootsCoincide";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::CoverageImpossible: return "CoverageImpossible";
    case ErrorKind::MissingArtifacts: return "MissingArtifacts";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace tdel
