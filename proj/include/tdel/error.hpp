#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tdel {

enum class ErrorKind {
  InvalidArgument,
  NotConverged,
  BeyondInjectivityFloor,
  SolverFailure,
  NoNegativeSlope,
  SeparationViolated,
  NewtonDiverged,
  RootsCoincide,
  SingularJacobian,
  CoverageImpossible,
  MissingArtifacts,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-readable kind; the CLI maps it to the
/// structured error document.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tdel
