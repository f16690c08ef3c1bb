#pragma once

#include <stdexcept>
#include <string>

namespace gcdeg {

enum class ErrorKind {
  // schema / input
  SchemaError,
  UnknownSubcommand,
  UnknownCatalogName,
  InvalidArgument,
  // geometry
  InvalidCartanDatum,
  Unbounded,
  Empty,
  LowerDimensional,
  DegenerateSimplex,
  NotDominant,
  NotDominantPiece,
  TwoRhoOutsideDomain,
  ComponentOutsidePolytope,
  DependentActiveRoots,
  InconsistentInputs,
  BoxTooTight,
  // minimizer
  DivergentMinimizer,
  NoFaceAccepted,
  // precision
  DegreeCapExceeded,
  PrecisionLoss,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::UnknownSubcommand: return "UnknownSubcommand";
    case ErrorKind::UnknownCatalogName: return "UnknownCatalogName";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidCartanDatum: return "InvalidCartanDatum";
    case ErrorKind::Unbounded: return "Unbounded";
    case ErrorKind::Empty: return "Empty";
    case ErrorKind::LowerDimensional: return "LowerDimensional";
    case ErrorKind::DegenerateSimplex: return "DegenerateSimplex";
    case ErrorKind::NotDominant: return "NotDominant";
    case ErrorKind::NotDominantPiece: return "NotDominantPiece";
    case ErrorKind::TwoRhoOutsideDomain: return "TwoRhoOutsideDomain";
    case ErrorKind::ComponentOutsidePolytope: return "ComponentOutsidePolytope";
    case ErrorKind::DependentActiveRoots: return "DependentActiveRoots";
    case ErrorKind::InconsistentInputs: return "InconsistentInputs";
    case ErrorKind::BoxTooTight: return "BoxTooTight";
    case ErrorKind::DivergentMinimizer: return "DivergentMinimizer";
    case ErrorKind::NoFaceAccepted: return "NoFaceAccepted";
    case ErrorKind::DegreeCapExceeded: return "DegreeCapExceeded";
    case ErrorKind::PrecisionLoss: return "PrecisionLoss";
  }
  return "Unknown";
}

/// Process exit code for an error class: 2 schema, 3 geometry,
/// 4 divergent minimizer, 5 precision.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SchemaError:
    case ErrorKind::UnknownSubcommand:
    case ErrorKind::UnknownCatalogName:
    case ErrorKind::InvalidArgument:
      return 2;
    case ErrorKind::DivergentMinimizer:
    case ErrorKind::NoFaceAccepted:
      return 4;
    case ErrorKind::DegreeCapExceeded:
    case ErrorKind::PrecisionLoss:
      return 5;
    default:
      return 3;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace gcdeg
