#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gofd {

enum class ErrorCode {
  DegenerateElement,
  EmptyMesh,
  UnknownMeshKind,
  DegenerateMesh,
  GridTooFine,
  IndexOutOfRange,
  InvalidOrder,
  QuadratureTooCoarse,
  NumericalInconsistency,
  ParameterMismatch,
  QuadratureTooLarge,
  DenseTooLarge,
  RankDeficiencyRisk,
  PreconditionerFailure,
  NotConverged,
  InvalidParameter,
  InvertedElement,
  MeshMotionStalled,
  ParseError,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Thrown when some mesh vertices have no grid node in their support.
class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(std::vector<std::size_t> vertices, const std::string& what);

  const std::vector<std::size_t>& vertices() const noexcept { return vertices_; }

 private:
  std::vector<std::size_t> vertices_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace gofd
