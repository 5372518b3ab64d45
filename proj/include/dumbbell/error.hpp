#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dumbbell {

enum class ErrorKind {
  InvalidArgument,
  NonPositiveProfile,
  OutOfDomain,
  InvalidEpsilon,
  UnsupportedProfile,
  EmptyChannelResolution,
  IncompatibleMesh,
  SingularElement,
  NoTaggedNodes,
  NonPositiveWeight,
  StationMismatch,
  FactorizationFailed,
  NoConvergence,
  DimensionMismatch,
  TooLarge,
  UnsortedInput,
  InsufficientEigenpairs,
  MissingTags,
  NonOrthonormalBasis,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind so the
/// CLI and tests can distinguish validation problems from solver breakdowns.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dumbbell
