#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <random>

#include "dumbbell/error.hpp"
#include "dumbbell/femcore.hpp"
#include "dumbbell/mesh.hpp"

using namespace dumbbell;

namespace {

// Nodal DOFs of u(x, y) = a + b x + c y + d x y on a mesh.
Vector bilinear_field(const QuadMesh& mesh, const DofMap& dofmap, double a, double b, double c, double d) {
  Vector full(dofmap.total_dofs(), 0.0);
  for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
    const double x = mesh.nodes[n].x;
    const double y = mesh.nodes[n].y;
    full[4 * n] = a + b * x + c * y + d * x * y;
    full[4 * n + 1] = b + d * y;
    full[4 * n + 2] = c + d * x;
    full[4 * n + 3] = d;
  }
  return dofmap.restrict_to_free(full);
}

double energy(const ElementMatrix16& k, const std::array<double, 16>& u) {
  double e = 0.0;
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j) e += u[i] * k[i * 16 + j] * u[j];
  return e;
}

// Local DOFs of u = x on the element [x0, x0 + hx] x [y0, y0 + hy].
std::array<double, 16> local_x(const ElementGeometry& g) {
  const double xs[4] = {g.x0, g.x0 + g.hx, g.x0 + g.hx, g.x0};
  std::array<double, 16> u{};
  for (std::size_t a = 0; a < 4; ++a) {
    u[4 * a] = xs[a];
    u[4 * a + 1] = 1.0;
  }
  return u;
}

double max_abs_diff(const ElementMatrix16& a, const ElementMatrix16& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < 256; ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
  const QuadratureRule q = gauss_legendre_unit(4);
  double s0 = 0.0, s7 = 0.0;
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    s0 += q.weights[i];
    s7 += q.weights[i] * std::pow(q.points[i], 7);
  }
  CHECK(s0 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s7 == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
  CHECK_THROWS_AS(gauss_legendre_unit(0), Error);
}

TEST_CASE("element energies of elementary fields") {
  const ElementGeometry geo{0.3, -0.2, 0.5, 0.25};
  std::array<double, 16> one{};
  for (std::size_t a = 0; a < 4; ++a) one[4 * a] = 1.0;

  const auto plate = bfs_element_matrix(geo, PlateForm{{0.3, 2.0}});
  CHECK(energy(plate, one) == doctest::Approx(geo.hx * geo.hy).epsilon(1e-13));

  // u = x: tau |grad u|^2 + u^2 with tau = 1, sigma = 0.
  const ElementGeometry g0{0.0, 0.0, 0.5, 0.25};
  const auto k = bfs_element_matrix(g0, PlateForm{{0.0, 1.0}});
  const double int_x2 = g0.hy * std::pow(g0.hx, 3) / 3.0;
  CHECK(energy(k, local_x(g0)) == doctest::Approx(g0.hx * g0.hy + int_x2).epsilon(1e-13));

  const auto mass = bfs_element_matrix(geo, MassForm{});
  CHECK(energy(mass, one) == doctest::Approx(geo.hx * geo.hy).epsilon(1e-14));
}

TEST_CASE("element matrices are symmetric") {
  const ElementGeometry geo{0.0, 0.0, 0.1, 0.03};
  for (const FormKind& f : {FormKind{PlateForm{{0.3, 0.5}}}, FormKind{MassForm{}},
                            FormKind{ChannelEpsForm{{0.3, 0.5}, 0.05, ProfileSpec::constant(1.0)}},
                            FormKind{ChannelEpsForm{{-0.4, 0.0}, 0.1, ProfileSpec::cosine_bump(1.0, 0.5)}}}) {
    const auto k = bfs_element_matrix(geo, f);
    for (std::size_t i = 0; i < 16; ++i)
      for (std::size_t j = 0; j < 16; ++j) CHECK(k[i * 16 + j] == k[j * 16 + i]);
  }
}

TEST_CASE("exact integration agrees with Gauss quadrature") {
  const ElementGeometry geo{0.2, 0.1, 0.125, 0.0625};
  for (const FormKind& f : {FormKind{PlateForm{{0.3, 0.7}}}, FormKind{MassForm{}},
                            FormKind{ChannelEpsForm{{0.3, 0.2}, 0.1, ProfileSpec::constant(1.5)}}}) {
    const auto exact = bfs_element_matrix(geo, f, 0);
    const auto gauss = bfs_element_matrix(geo, f, 6);
    double scale = 0.0;
    for (double v : exact) scale = std::max(scale, std::abs(v));
    CHECK(max_abs_diff(exact, gauss) <= 1e-12 * scale);
  }
  const auto e1 = hermite1d_element(0.0, 0.1, Limit1DForm{{0.3, 0.5}, ProfileSpec::constant(2.0)}, 0);
  const auto q1 = hermite1d_element(0.0, 0.1, Limit1DForm{{0.3, 0.5}, ProfileSpec::constant(2.0)}, 6);
  for (std::size_t i = 0; i < 16; ++i) CHECK(e1[i] == doctest::Approx(q1[i]).epsilon(1e-12));
}

TEST_CASE("channel form at eps = 1 with g = 1 equals the plate form") {
  const ElementGeometry geo{0.25, 0.5, 0.25, 0.25};
  const MaterialParams p{0.3, 0.4};
  const auto a = bfs_element_matrix(geo, ChannelEpsForm{p, 1.0, ProfileSpec::constant(1.0)});
  const auto b = bfs_element_matrix(geo, PlateForm{p});
  CHECK(max_abs_diff(a, b) <= 1e-12);
}

TEST_CASE("Hermite beam element") {
  // Pure bending part: (1 - s^2) times the classical 12/h^3 pattern.
  const double h = 0.5;
  const auto k = hermite1d_element(0.0, h, Limit1DForm{{0.0, 0.0}, ProfileSpec::constant(1.0)});
  const auto m = hermite1d_element(0.0, h, WeightedMassForm{ProfileSpec::constant(1.0)});
  const double beam[16] = {12, 6 * h, -12, 6 * h, 6 * h, 4 * h * h, -6 * h, 2 * h * h,
                           -12, -6 * h, 12, -6 * h, 6 * h, 2 * h * h, -6 * h, 4 * h * h};
  for (std::size_t i = 0; i < 16; ++i) CHECK(k[i] - m[i] == doctest::Approx(beam[i] / (h * h * h)).epsilon(1e-13));
  const double mass[16] = {156, 22 * h, 54, -13 * h, 22 * h, 4 * h * h, 13 * h, -3 * h * h,
                           54, 13 * h, 156, -22 * h, -13 * h, -3 * h * h, -22 * h, 4 * h * h};
  for (std::size_t i = 0; i < 16; ++i) CHECK(m[i] == doctest::Approx(mass[i] * h / 420.0).epsilon(1e-13));

  const auto ks = hermite1d_element(0.0, h, Limit1DForm{{0.6, 0.0}, ProfileSpec::constant(1.0)});
  for (std::size_t i = 0; i < 16; ++i) CHECK(ks[i] - m[i] == doctest::Approx(0.64 * beam[i] / (h * h * h)).epsilon(1e-13));

  CHECK_THROWS_AS(hermite1d_element(0.0, h, PlateForm{}), Error);
}

TEST_CASE("constrained DOF counts") {
  const QuadMesh ref = build_channel_reference_mesh(4, 4, ProfileSpec::constant(1.0));
  const DofMap d = apply_clamped_constraints(ref, DofMap::for_mesh(ref), ClampWhere::ChannelEnds);
  CHECK(d.num_constrained() == 40);
  CHECK(d.num_free() == 60);

  const IntervalMesh im = build_interval_mesh(4);
  const DofMap d1 = DofMap::for_interval(im);
  CHECK(d1.num_constrained() == 4);
  CHECK(d1.num_free() == 6);

  const QuadMesh rect = build_rectangle_mesh(0.0, 0.0, 1.0, 1.0, 2, 2);
  const DofMap all = apply_clamped_constraints(rect, DofMap::for_mesh(rect), ClampWhere::AllBoundary);
  CHECK(all.num_free() == 4);
  CHECK_THROWS_AS(apply_clamped_constraints(rect, DofMap::for_mesh(rect), ClampWhere::ChannelEnds), Error);
}

TEST_CASE("DOF map expand / restrict round trip") {
  DofMap d(3, 2);
  d.constrain_node(1);
  CHECK(d.num_free() == 4);
  const Vector free{1, 2, 3, 4};
  const Vector full = d.expand(free);
  CHECK(full == Vector{1, 2, 0, 0, 3, 4});
  CHECK(d.restrict_to_free(full) == free);
  CHECK_THROWS_AS(d.expand(Vector{1, 2}), Error);
}

TEST_CASE("assembled mass and stiffness on the constant field") {
  DumbbellSpec spec;
  spec.epsilon = 0.2;
  DumbbellMeshOptions opt;
  opt.h_target = 0.1;
  const QuadMesh mesh = build_dumbbell_mesh(spec, opt);
  const DofMap d = DofMap::for_mesh(mesh);
  const SparseSym K = assemble(mesh, d, PlateForm{{0.3, 0.0}});
  const SparseSym M = assemble(mesh, d, MassForm{});
  const Vector one = constant_field(d);
  CHECK(M.bilinear(one, one) == doctest::Approx(spec.area()).epsilon(1e-12));
  const Vector k1 = K.multiply(one);
  const Vector m1 = M.multiply(one);
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < k1.size(); ++i) diff = std::max(diff, std::abs(k1[i] - m1[i]));
  for (double v : K.values()) scale = std::max(scale, std::abs(v));
  CHECK(diff <= 1e-14 * scale);

  // Linear fields are reproduced exactly: energy tau |grad u|^2 + u^2.
  const SparseSym Kt = assemble(mesh, d, PlateForm{{0.3, 2.0}});
  const Vector ux = bilinear_field(mesh, d, 0.0, 1.0, 0.0, 0.0);
  CHECK(Kt.bilinear(ux, ux) == doctest::Approx(2.0 * spec.area() + M.bilinear(ux, ux)).epsilon(1e-10));
}

TEST_CASE("assembly rejects mismatched forms and meshes") {
  const QuadMesh rect = build_rectangle_mesh(0.0, 0.0, 1.0, 1.0, 2, 2);
  const DofMap d = DofMap::for_mesh(rect);
  CHECK_THROWS_AS(assemble(rect, d, ChannelEpsForm{}), Error);
  CHECK_THROWS_AS(assemble(rect, d, Limit1DForm{}), Error);
  CHECK_THROWS_AS(assemble(rect, DofMap(3, 4), MassForm{}), Error);
  const QuadMesh ref = build_channel_reference_mesh(2, 2, ProfileSpec::constant(1.0));
  try {
    assemble(ref, DofMap::for_mesh(ref), ChannelEpsForm{{0.0, 0.0}, 0.0, ProfileSpec::constant(1.0)});
    FAIL("expected InvalidEpsilon");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidEpsilon);
  }
}

TEST_CASE("assembly is deterministic") {
  const QuadMesh ref = build_channel_reference_mesh(8, 3, ProfileSpec::cosine_bump(1.0, 0.3));
  const DofMap d = apply_clamped_constraints(ref, DofMap::for_mesh(ref), ClampWhere::ChannelEnds);
  const ChannelEpsForm f{{0.3, 0.1}, 0.05, ProfileSpec::cosine_bump(1.0, 0.3)};
  const SparseSym a = assemble(ref, d, f);
  const SparseSym b = assemble(ref, d, f);
  CHECK(a.values() == b.values());
  CHECK(a.col_idx() == b.col_idx());
}

TEST_CASE("weighted mass on the reference channel integrates g") {
  const ProfileSpec g = ProfileSpec::polynomial({1.0, 0.5});
  const QuadMesh ref = build_channel_reference_mesh(6, 2, g);
  const DofMap d = DofMap::for_mesh(ref);
  const SparseSym M = assemble(ref, d, WeightedMassForm{g});
  const Vector one = constant_field(d);
  CHECK(M.bilinear(one, one) == doctest::Approx(g.integral()).epsilon(1e-13));
}

TEST_CASE("averaging and extension") {
  auto mesh = std::make_shared<const QuadMesh>(build_channel_reference_mesh(5, 3, ProfileSpec::constant(1.0)));
  const DofMap d = DofMap::for_mesh(*mesh);

  SampledFunction v;
  v.x = mesh->x_lines;
  for (double x : v.x) {
    v.value.push_back(std::sin(3.0 * x));
    v.slope.push_back(3.0 * std::cos(3.0 * x));
  }
  const DiscreteField e = extend_E(v, mesh, d);
  const SampledFunction back = average_M(e);
  for (std::size_t i = 0; i < v.x.size(); ++i) {
    CHECK(back.value[i] == doctest::Approx(v.value[i]).epsilon(1e-14));
    CHECK(back.slope[i] == doctest::Approx(v.slope[i]).epsilon(1e-14));
  }

  // The average of u = s over the cross-section is 1/2.
  DiscreteField s{bilinear_field(*mesh, d, 0.0, 0.0, 1.0, 0.0), d, mesh, {}};
  const SampledFunction avg = average_M(s);
  for (double a : avg.value) CHECK(a == doctest::Approx(0.5).epsilon(1e-14));

  SampledFunction wrong = v;
  wrong.x[1] += 1e-3;
  CHECK_THROWS_AS(extend_E(wrong, mesh, d), Error);
  wrong = v;
  wrong.x.pop_back();
  CHECK_THROWS_AS(extend_E(wrong, mesh, d), Error);
}

TEST_CASE("broken representation reproduces the conforming mass") {
  DumbbellSpec spec;
  spec.epsilon = 0.25;
  DumbbellMeshOptions opt;
  opt.h_target = 0.125;
  const QuadMesh mesh = build_dumbbell_mesh(spec, opt);
  const DofMap d = DofMap::for_mesh(mesh);
  const Vector u = bilinear_field(mesh, d, 1.0, 0.5, -0.25, 0.1);
  const SparseSym M = assemble(mesh, d, MassForm{});
  const SparseSym B = broken_mass(mesh);
  const Vector ub = to_broken(mesh, d, u);
  CHECK(B.bilinear(ub, ub) == doctest::Approx(M.bilinear(u, u)).epsilon(1e-12));
  const double parts = region_mass(mesh, d, u, Region::OmegaLeft) + region_mass(mesh, d, u, Region::OmegaRight) +
                       region_mass(mesh, d, u, Region::Channel);
  CHECK(parts == doctest::Approx(M.bilinear(u, u)).epsilon(1e-12));
}

TEST_CASE("energy Gram matches the assembled matrix") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  auto randoms = [&](std::size_t n) {
    std::vector<Vector> z(3, Vector(n));
    for (auto& v : z)
      for (auto& x : v) x = nd(rng);
    return z;
  };
  auto check = [](const std::vector<double>& g, const SparseSym& K, const std::vector<Vector>& z) {
    for (std::size_t i = 0; i < z.size(); ++i)
      for (std::size_t j = 0; j < z.size(); ++j) {
        CHECK(g[i * z.size() + j] == doctest::Approx(K.bilinear(z[i], z[j])).epsilon(1e-10));
        CHECK(g[i * z.size() + j] == g[j * z.size() + i]);
      }
  };

  const QuadMesh rect = build_rectangle_mesh(0.0, 0.0, 1.0, 0.5, 4, 3);
  const DofMap d = DofMap::for_mesh(rect);
  const PlateForm plate{{0.3, 0.7}};
  auto z = randoms(static_cast<std::size_t>(d.num_free()));
  check(energy_gram(rect, d, plate, z), assemble(rect, d, plate), z);

  const ProfileSpec g = ProfileSpec::cosine_bump(1.0, 0.4);
  const QuadMesh ref = build_channel_reference_mesh(6, 2, g);
  const DofMap dc = apply_clamped_constraints(ref, DofMap::for_mesh(ref), ClampWhere::ChannelEnds);
  const ChannelEpsForm ch{{0.3, 0.2}, 0.1, g};
  z = randoms(static_cast<std::size_t>(dc.num_free()));
  check(energy_gram(ref, dc, ch, z), assemble(ref, dc, ch), z);

  const IntervalMesh im = build_interval_mesh(10);
  const DofMap d1 = DofMap::for_interval(im);
  for (const ProfileSpec& p : {ProfileSpec::constant(2.0), g}) {
    const Limit1DForm lf{{0.3, 0.5}, p};
    z = randoms(static_cast<std::size_t>(d1.num_free()));
    check(energy_gram_1d(im, d1, lf, z), assemble_1d(im, d1, lf), z);
  }

  // The constant field carries no bending energy, so a(1, 1) is the area exactly.
  const Vector one = constant_field(d);
  CHECK(std::abs(energy_gram(rect, d, plate, {one})[0] - 0.5) <= 1e-14);
  CHECK_THROWS_AS(energy_gram(rect, d, Limit1DForm{}, {one}), Error);
  CHECK_THROWS_AS(energy_gram(rect, d, plate, {Vector(3)}), Error);
}
