#include "gofd/error.hpp"

#include <utility>

namespace gofd {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateElement: return "DegenerateElement";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::UnknownMeshKind: return "UnknownMeshKind";
    case ErrorCode::DegenerateMesh: return "DegenerateMesh";
    case ErrorCode::GridTooFine: return "GridTooFine";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::QuadratureTooCoarse: return "QuadratureTooCoarse";
    case ErrorCode::NumericalInconsistency: return "NumericalInconsistency";
    case ErrorCode::ParameterMismatch: return "ParameterMismatch";
    case ErrorCode::QuadratureTooLarge: return "QuadratureTooLarge";
    case ErrorCode::DenseTooLarge: return "DenseTooLarge";
    case ErrorCode::RankDeficiencyRisk: return "RankDeficiencyRisk";
    case ErrorCode::PreconditionerFailure: return "PreconditionerFailure";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvertedElement: return "InvertedElement";
    case ErrorCode::MeshMotionStalled: return "MeshMotionStalled";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

RankDeficiencyError::RankDeficiencyError(std::vector<std::size_t> vertices, const std::string& what)
    : Error(ErrorCode::RankDeficiencyRisk, what), vertices_(std::move(vertices)) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace gofd
