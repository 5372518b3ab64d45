#pragma once

#include <iosfwd>

namespace dumbbell {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 validate-profile found (MP) violations,
/// 2 configuration / solver / IO error, plus CLI11's codes for bad usage.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dumbbell
