#pragma once

#include <vector>

#include "dumbbell/eigensolve.hpp"
#include "dumbbell/femcore.hpp"
#include "dumbbell/geometry.hpp"

namespace dumbbell {

/// Clamped weighted beam problem on (0, 1):
///   (1 - s^2)/g (g h'')'' - t/g (g h')' + h = theta h,  h = h' = 0 at 0 and 1.
struct LimitProblem {
  ProfileSpec profile = ProfileSpec::constant(1.0);
  MaterialParams params;
  int n_elems = 256;

  void validate() const;
};

struct LimitSolution {
  Spectrum spectrum;  // vectors normalized in the g-weighted mass
  IntervalMesh mesh;
  DofMap dofmap;

  SampledFunction mode(std::size_t j) const { return interval_function(mesh, dofmap, spectrum.vectors.at(j)); }
};

LimitSolution solve_limit(const LimitProblem& problem, int k, const SolverOptions& solver = {});

/// First n positive roots of cos(k) cosh(k) = 1 (clamped-clamped beam).
std::vector<double> beam_roots(int n);

/// (theta_j(sigma) - 1) / (theta_j(0) - 1) for j = 1..5.
std::vector<double> sigma_distortion_ratio(double sigma, double tau, const ProfileSpec& profile, int n_elems = 256);

}  // namespace dumbbell
