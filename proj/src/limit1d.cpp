#include "dumbbell/limit1d.hpp"

#include <cmath>
#include <numbers>

#include "dumbbell/error.hpp"

namespace dumbbell {

void LimitProblem::validate() const {
  params.validate();
  if (n_elems < 4) throw Error(ErrorKind::InvalidArgument, "limit problem needs at least 4 elements");
  if (!(profile.min_value() > 0.0)) throw Error(ErrorKind::NonPositiveWeight, "profile must be positive on [0, 1]");
}

LimitSolution solve_limit(const LimitProblem& problem, int k, const SolverOptions& solver) {
  problem.validate();
  LimitSolution out;
  out.mesh = build_interval_mesh(problem.n_elems);
  out.dofmap = DofMap::for_interval(out.mesh);
  const SparseSym K = assemble_1d(out.mesh, out.dofmap, Limit1DForm{problem.params, problem.profile});
  const SparseSym M = assemble_1d(out.mesh, out.dofmap, WeightedMassForm{problem.profile});
  SolverOptions opts = solver;
  opts.k = k;
  opts.stiffness_gram = [&](const std::vector<Vector>& z) {
    return energy_gram_1d(out.mesh, out.dofmap, Limit1DForm{problem.params, problem.profile}, z);
  };
  out.spectrum = solve_smallest(K, M, opts);

  // Value DOFs of interior nodes, in node order.
  std::vector<std::size_t> value_dofs;
  for (std::size_t node = 1; node + 1 < out.mesh.nodes.size(); ++node) {
    value_dofs.push_back(static_cast<std::size_t>(out.dofmap.free_index(2 * node)));
  }
  normalize_signs(out.spectrum, value_dofs);
  out.spectrum.meta.domain_kind = "limit1d";
  out.spectrum.meta.params = problem.params;
  out.spectrum.meta.resolution = "n_elems=" + std::to_string(problem.n_elems);
  return out;
}

std::vector<double> beam_roots(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "beam_roots needs n >= 1");
  // cos k cosh k - 1 changes sign once in ((j + 1/2) pi - 1, (j + 1/2) pi + 1).
  auto f = [](double k) { return std::cos(k) * std::cosh(k) - 1.0; };
  std::vector<double> roots;
  for (int j = 1; j <= n; ++j) {
    double lo = (j + 0.5) * std::numbers::pi - 1.0;
    double hi = (j + 0.5) * std::numbers::pi + 1.0;
    double flo = f(lo);
    while (hi - lo > 1e-13) {
      const double mid = 0.5 * (lo + hi);
      const double fm = f(mid);
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

std::vector<double> sigma_distortion_ratio(double sigma, double tau, const ProfileSpec& profile, int n_elems) {
  constexpr int kModes = 5;
  const LimitSolution with = solve_limit({profile, {sigma, tau}, n_elems}, kModes);
  const LimitSolution without = solve_limit({profile, {0.0, tau}, n_elems}, kModes);
  std::vector<double> ratio(kModes);
  for (std::size_t j = 0; j < kModes; ++j) {
    ratio[j] = (with.spectrum.values[j] - 1.0) / (without.spectrum.values[j] - 1.0);
  }
  return ratio;
}

}  // namespace dumbbell
