#include "dumbbell/error.hpp"

namespace dumbbell {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonPositiveProfile: return "NonPositiveProfile";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorKind::UnsupportedProfile: return "UnsupportedProfile";
    case ErrorKind::EmptyChannelResolution: return "EmptyChannelResolution";
    case ErrorKind::IncompatibleMesh: return "IncompatibleMesh";
    case ErrorKind::SingularElement: return "SingularElement";
    case ErrorKind::NoTaggedNodes: return "NoTaggedNodes";
    case ErrorKind::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorKind::StationMismatch: return "StationMismatch";
    case ErrorKind::FactorizationFailed: return "FactorizationFailed";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::UnsortedInput: return "UnsortedInput";
    case ErrorKind::InsufficientEigenpairs: return "InsufficientEigenpairs";
    case ErrorKind::MissingTags: return "MissingTags";
    case ErrorKind::NonOrthonormalBasis: return "NonOrthonormalBasis";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace dumbbell
