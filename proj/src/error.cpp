#include "pocodom/error.hpp"

namespace pocodom {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::InsufficientCandidates: return "InsufficientCandidates";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::DegenerateNormal: return "DegenerateNormal";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::NoCorrespondences: return "NoCorrespondences";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::MalformedPose: return "MalformedPose";
    case ErrorCode::MalformedConfig: return "MalformedConfig";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::TooShort: return "TooShort";
  }
  return "Unknown";
}

}  // namespace pocodom
