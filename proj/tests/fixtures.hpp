#pragma once

#include <string>
#include <vector>

#include "dumbbell/femcore.hpp"
#include "dumbbell/mesh.hpp"
#include "dumbbell/sparse.hpp"

namespace dumbbell::testing {

struct Fixture {
  std::string name;
  SparseSym K;
  SparseSym M;
};

inline Fixture limit_fixture(const std::string& name, const ProfileSpec& g, MaterialParams p, int n) {
  const IntervalMesh mesh = build_interval_mesh(n);
  const DofMap d = DofMap::for_interval(mesh);
  return {name, assemble_1d(mesh, d, Limit1DForm{p, g}), assemble_1d(mesh, d, WeightedMassForm{g})};
}

inline Fixture channel_fixture(const std::string& name, const ProfileSpec& g, MaterialParams p, double eps, int nx,
                               int ny) {
  const QuadMesh mesh = build_channel_reference_mesh(nx, ny, g);
  const DofMap d = apply_clamped_constraints(mesh, DofMap::for_mesh(mesh), ClampWhere::ChannelEnds);
  return {name, assemble(mesh, d, ChannelEpsForm{p, eps, g}), assemble(mesh, d, WeightedMassForm{g})};
}

inline Fixture plate_fixture(const std::string& name, const QuadMesh& mesh, MaterialParams p, bool clamped) {
  DofMap d = DofMap::for_mesh(mesh);
  if (clamped) d = apply_clamped_constraints(mesh, d, ClampWhere::AllBoundary);
  return {name, assemble(mesh, d, PlateForm{p}), assemble(mesh, d, MassForm{})};
}

inline QuadMesh small_dumbbell(double eps = 0.5, double h = 0.25) {
  DumbbellSpec spec;
  spec.epsilon = eps;
  DumbbellMeshOptions opt;
  opt.h_target = h;
  return build_dumbbell_mesh(spec, opt);
}

/// Every fixture has at most 500 DOFs.
inline std::vector<Fixture> small_fixtures() {
  std::vector<Fixture> f;
  f.push_back(limit_fixture("limit g=1 sigma=0", ProfileSpec::constant(1.0), {0.0, 0.0}, 64));
  f.push_back(limit_fixture("limit bump sigma=0.3 tau=1", ProfileSpec::cosine_bump(1.0, 0.5), {0.3, 1.0}, 48));
  f.push_back(channel_fixture("channel g=1 eps=0.1", ProfileSpec::constant(1.0), {0.3, 0.0}, 0.1, 16, 2));
  f.push_back(channel_fixture("channel bump eps=0.2", ProfileSpec::cosine_bump(1.0, 0.5), {-0.5, 0.5}, 0.2, 12, 3));
  f.push_back(plate_fixture("free box", build_rectangle_mesh(-1.0, -1.0, 1.0, 2.0, 4, 8), {0.3, 0.0}, false));
  f.push_back(plate_fixture("clamped box", build_rectangle_mesh(-1.0, -1.0, 1.0, 2.0, 6, 10), {0.3, 0.0}, true));
  f.push_back(plate_fixture("free dumbbell", small_dumbbell(), {0.3, 0.0}, false));
  f.push_back(plate_fixture("free dumbbell tau=1", small_dumbbell(), {0.0, 1.0}, false));
  f.push_back(plate_fixture("clamped dumbbell", small_dumbbell(), {0.3, 0.0}, true));
  return f;
}

}  // namespace dumbbell::testing
