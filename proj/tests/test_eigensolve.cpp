#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "dumbbell/eigensolve.hpp"
#include "dumbbell/error.hpp"
#include "dumbbell/simd/kernels.hpp"
#include "fixtures.hpp"

using namespace dumbbell;
using dumbbell::testing::small_fixtures;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

SparseSym diagonal(const std::vector<double>& d) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < d.size(); ++i) t.push_back({static_cast<int>(i), static_cast<int>(i), d[i]});
  return SparseSym::from_triplets(static_cast<int>(d.size()), t);
}

double gram_deviation(const Spectrum& s, const SparseSym& M) {
  double dev = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double g = M.bilinear(s.vectors[i], s.vectors[j]);
      dev = std::max(dev, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  return dev;
}

}  // namespace

TEST_CASE("identity pencil") {
  const SparseSym I = SparseSym::identity(30);
  const Spectrum s = solve_smallest(I, I, {.k = 5});
  REQUIRE(s.size() == 5);
  for (double v : s.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gram_deviation(s, I) <= 1e-10);
}

TEST_CASE("diagonal pencil with known eigenvalues") {
  std::vector<double> d;
  for (int i = 0; i < 200; ++i) d.push_back(1.0 + i * i);
  const SparseSym K = diagonal(d);
  const SparseSym M = SparseSym::identity(200);
  const Spectrum s = solve_smallest(K, M, {.k = 8, .tol = 1e-10});
  for (std::size_t i = 0; i < 8; ++i) CHECK(s.values[i] == doctest::Approx(d[i]).epsilon(1e-12));
  for (double r : s.residuals) CHECK(r <= 1e-10);
}

TEST_CASE("free plate: lambda_1 = 1 with a constant eigenvector") {
  const auto fx = testing::plate_fixture("box", build_rectangle_mesh(0.0, 0.0, 1.0, 1.0, 4, 4), {0.3, 1.0}, false);
  const Spectrum s = solve_smallest(fx.K, fx.M, {.k = 4});
  CHECK(std::abs(s.values[0] - 1.0) <= 1e-10);
  CHECK(s.values[1] > 1.5);
  // M-normalized constant on the unit square: value DOFs all 1.
  for (std::size_t n = 0; n < 25; ++n) CHECK(std::abs(s.vectors[0][4 * n]) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("Lanczos agrees with the dense reference on small fixtures") {
  for (const auto& fx : small_fixtures()) {
    CAPTURE(fx.name);
    const int k = std::min(10, fx.K.dim() - 1);
    const Spectrum lz = solve_smallest(fx.K, fx.M, {.k = k});
    const Spectrum dn = dense_reference_solve(fx.K, fx.M);
    for (std::size_t i = 0; i < lz.size(); ++i) {
      CHECK(std::abs(lz.values[i] - dn.values[i]) <= 1e-9 * dn.values[i]);
      CHECK(lz.residuals[i] <= 1e-6);
    }
    CHECK(gram_deviation(lz, fx.M) <= 1e-9);
  }
}

TEST_CASE("residual report") {
  const SparseSym K = diagonal({2.0, 3.0, 5.0, 7.0});
  const SparseSym M = SparseSym::identity(4);
  Spectrum s;
  s.values = {2.0, 3.0};
  s.vectors = {{1, 0, 0, 0}, {0, 1, 0, 0}};
  for (double r : residual_report(K, M, s)) CHECK(r <= 1e-14);

  // Perturbing the eigenvector by delta makes the residual grow linearly in |delta|.
  std::vector<double> res;
  for (double delta : {1e-6, 2e-6, 4e-6}) {
    Spectrum p = s;
    p.vectors[0][2] = delta;
    p.vectors[0][3] = -delta;
    res.push_back(residual_report(K, M, p)[0]);
  }
  CHECK(res[1] / res[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(res[2] / res[1] == doctest::Approx(2.0).epsilon(1e-6));

  // The constant mode of a free plate.
  const auto fx = testing::plate_fixture("box", build_rectangle_mesh(0.0, 0.0, 1.0, 1.0, 4, 4), {0.3, 1.0}, false);
  Spectrum c;
  c.values = {1.0};
  c.vectors = {constant_field(DofMap(25, 4))};
  CHECK(residual_report(fx.K, fx.M, c)[0] <= 1e-12);
}

TEST_CASE("clusters") {
  const auto c = clusters({1.0, 1.0 + 1e-12, 2.0, 3.0, 3.0, 3.0});
  REQUIRE(c.size() == 3);
  CHECK(c[0] == std::pair<std::size_t, std::size_t>{0, 2});
  CHECK(c[1] == std::pair<std::size_t, std::size_t>{2, 3});
  CHECK(c[2] == std::pair<std::size_t, std::size_t>{3, 6});
  CHECK(clusters({}).empty());
}

TEST_CASE("sign normalization") {
  Spectrum s;
  s.values = {1.0};
  s.vectors = {{0.0, -2.0, 1.0}};
  normalize_signs(s);
  CHECK(s.vectors[0] == Vector{0.0, 2.0, -1.0});
  normalize_signs(s, {2});
  CHECK(s.vectors[0] == Vector{0.0, -2.0, 1.0});
}

TEST_CASE("solves are deterministic and independent of the SIMD path") {
  const auto fx = small_fixtures()[6];
  const Spectrum a = solve_smallest(fx.K, fx.M, {.k = 8});
  const Spectrum b = solve_smallest(fx.K, fx.M, {.k = 8});
  CHECK(a.values == b.values);
  CHECK(a.vectors == b.vectors);

  const simd::Isa before = simd::active().isa;
  REQUIRE(simd::select(simd::Isa::Scalar));
  const Spectrum sc = solve_smallest(fx.K, fx.M, {.k = 8});
  simd::select(before);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(sc.values[i] - a.values[i]) <= 1e-10 * a.values[i]);
}

TEST_CASE("solver errors") {
  const SparseSym I = SparseSym::identity(5);
  CHECK(kind_of([&] { solve_smallest(I, SparseSym::identity(4), {}); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([&] { solve_smallest(I, I, {.k = 5}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { solve_smallest(I, I, {.k = 2, .tol = 0.0}); }) == ErrorKind::InvalidArgument);
  const SparseSym indefinite = diagonal({1.0, -1.0, 2.0, 3.0});
  CHECK(kind_of([&] { solve_smallest(indefinite, SparseSym::identity(4), {.k = 1}); }) ==
        ErrorKind::FactorizationFailed);
  CHECK(kind_of([&] { dense_reference_solve(SparseSym::identity(2001), SparseSym::identity(2001)); }) ==
        ErrorKind::TooLarge);

  // A starved Krylov space cannot meet a tight tolerance on a hard problem.
  const auto fx = small_fixtures()[6];
  CHECK(kind_of([&] { solve_smallest(fx.K, fx.M, {.k = 10, .tol = 1e-14, .max_iters = 14}); }) ==
        ErrorKind::NoConvergence);
}

TEST_CASE("stiffness Gram hook feeds the final Rayleigh-Ritz step") {
  const auto fx = small_fixtures()[4];
  SolverOptions opt{.k = 4};
  const Spectrum plain = solve_smallest(fx.K, fx.M, opt);
  int calls = 0;
  opt.stiffness_gram = [&](const std::vector<Vector>& z) {
    ++calls;
    std::vector<double> g(z.size() * z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
      for (std::size_t j = 0; j < z.size(); ++j) g[i * z.size() + j] = fx.K.bilinear(z[i], z[j]);
    return g;
  };
  const Spectrum hooked = solve_smallest(fx.K, fx.M, opt);
  CHECK(calls >= 1);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(hooked.values[i] - plain.values[i]) <= 1e-12 * plain.values[i]);
  opt.stiffness_gram = [](const std::vector<Vector>&) { return std::vector<double>(1, 1.0); };
  CHECK(kind_of([&] { solve_smallest(fx.K, fx.M, opt); }) == ErrorKind::DimensionMismatch);
}
