#include "prim/error.hpp"

namespace prim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::DegenerateCloud: return "DegenerateCloud";
    case ErrorCode::DegenerateBounds: return "DegenerateBounds";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::NoSourceRegions: return "NoSourceRegions";
    case ErrorCode::NoVisibleFaces: return "NoVisibleFaces";
    case ErrorCode::NoValidViews: return "NoValidViews";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::InsufficientDataset: return "InsufficientDataset";
    case ErrorCode::NonFiniteWeight: return "NonFiniteWeight";
    case ErrorCode::EmptyContext: return "EmptyContext";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ResolutionMismatch: return "ResolutionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace prim
