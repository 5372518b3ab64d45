#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "dumbbell/eigensolve.hpp"
#include "dumbbell/spectra.hpp"
#include "fixtures.hpp"

using namespace dumbbell;

namespace {

bool dense_symmetric(const SparseSym& a) {
  const auto d = a.to_dense();
  const auto n = static_cast<std::size_t>(a.dim());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (d[i * n + j] != d[j * n + i]) return false;
  return true;
}

}  // namespace

TEST_CASE("element and assembled matrices are exactly symmetric") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> sig(-0.95, 0.95);
  std::uniform_real_distribution<double> pos(0.01, 2.0);
  for (int t = 0; t < 50; ++t) {
    const MaterialParams p{sig(rng), pos(rng)};
    const ElementGeometry geo{pos(rng) - 1.0, pos(rng) - 1.0, pos(rng), pos(rng)};
    const ProfileSpec g = ProfileSpec::cosine_bump(1.0, 0.5 * pos(rng));
    for (const FormKind& f : {FormKind{PlateForm{p}}, FormKind{MassForm{}}, FormKind{ChannelEpsForm{p, pos(rng), g}},
                              FormKind{WeightedMassForm{g}}}) {
      for (int q : {0, 6}) {
        const auto k = bfs_element_matrix(geo, f, q);
        for (std::size_t i = 0; i < 16; ++i)
          for (std::size_t j = 0; j < i; ++j) REQUIRE(k[i * 16 + j] == k[j * 16 + i]);
      }
    }
    const auto k1 = hermite1d_element(geo.x0, geo.hx, Limit1DForm{p, g});
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < i; ++j) REQUIRE(k1[i * 4 + j] == k1[j * 4 + i]);
  }
  for (const auto& fx : testing::small_fixtures()) {
    CAPTURE(fx.name);
    CHECK(dense_symmetric(fx.K));
    CHECK(dense_symmetric(fx.M));
  }
}

TEST_CASE("coercivity: free-plate spectra start at 1") {
  const QuadMesh box = build_rectangle_mesh(0.0, 0.0, 1.0, 2.0, 3, 5);
  const QuadMesh db = testing::small_dumbbell();
  for (const MaterialParams p : {MaterialParams{0.0, 0.0}, MaterialParams{0.3, 0.0}, MaterialParams{-0.9, 0.0},
                                 MaterialParams{0.9, 2.0}, MaterialParams{-0.5, 0.1}}) {
    for (const QuadMesh* m : {&box, &db}) {
      const auto fx = testing::plate_fixture("free", *m, p, false);
      const Spectrum s = dense_reference_solve(fx.K, fx.M);
      CHECK(s.values.front() >= 1.0 - 1e-10);
      CHECK(std::abs(s.values.front() - 1.0) <= 1e-10);
      // K 1 = M 1 for the constant field.
      const DofMap d = DofMap::for_mesh(*m);
      const Vector one = constant_field(d);
      const Vector k1 = fx.K.multiply(one);
      const Vector m1 = fx.M.multiply(one);
      for (std::size_t i = 0; i < k1.size(); ++i) REQUIRE(std::abs(k1[i] - m1[i]) <= 1e-12);
    }
  }
  // Random quadratic forms: x^T K x >= x^T M x.
  const auto fx = testing::plate_fixture("free", db, {0.0, 0.0}, false);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 100; ++t) {
    Vector x(static_cast<std::size_t>(fx.K.dim()));
    for (auto& v : x) v = nd(rng);
    CHECK(fx.K.bilinear(x, x) >= fx.M.bilinear(x, x) * (1.0 - 1e-12));
  }
}

TEST_CASE("pointwise Hessian form positivity on 10^4 random Hessians") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> sig(-0.999, 0.999);
  std::normal_distribution<double> h(0.0, 3.0);
  for (int t = 0; t < 10000; ++t) {
    const double s = sig(rng);
    const double a = h(rng), b = h(rng), c = h(rng);
    const double norm2 = a * a + 2.0 * b * b + c * c;
    const double form = (1.0 - s) * norm2 + s * (a + c) * (a + c);
    REQUIRE(form >= (1.0 - std::abs(s)) * norm2 - 1e-12 * norm2);
    REQUIRE(form > 0.0);
    if (s <= 0.0) REQUIRE(form >= (1.0 + s) * (a * a + c * c) - 1e-12 * norm2);
  }
  // For sigma > 0 the bound (1 + min(sigma, 0)) (a^2 + c^2) fails at a = -c, b = 0.
  const double s = 0.5;
  CHECK((1.0 - s) * 2.0 < 2.0);
}

TEST_CASE("averaging after extension is the identity; extension is an isometry") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const ProfileSpec& g : {ProfileSpec::constant(1.0), ProfileSpec::cosine_bump(1.0, 0.5),
                               ProfileSpec::polynomial({2.0, -4.0, 4.0})}) {
    auto mesh = std::make_shared<const QuadMesh>(build_channel_reference_mesh(12, 3, g));
    const DofMap d = apply_clamped_constraints(*mesh, DofMap::for_mesh(*mesh), ClampWhere::ChannelEnds);
    const IntervalMesh im = build_interval_mesh(12);
    const DofMap d1 = DofMap::for_interval(im);
    Vector free(static_cast<std::size_t>(d1.num_free()));
    for (auto& v : free) v = u(rng);
    const SampledFunction v = interval_function(im, d1, free);

    const DiscreteField e = extend_E(v, mesh, d);
    const SampledFunction back = average_M(e);
    for (std::size_t i = 0; i < v.x.size(); ++i) {
      CHECK(back.value[i] == doctest::Approx(v.value[i]).epsilon(1e-14).scale(1.0));
      CHECK(back.slope[i] == doctest::Approx(v.slope[i]).epsilon(1e-14).scale(1.0));
    }
    const SparseSym M2 = assemble(*mesh, d, WeightedMassForm{g});
    const SparseSym M1 = assemble_1d(im, d1, WeightedMassForm{g});
    CHECK(M2.bilinear(e.dofs, e.dofs) == doctest::Approx(M1.bilinear(free, free)).epsilon(1e-12));
  }
}

TEST_CASE("merge preserves the multiset") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(0, 12);
  std::uniform_int_distribution<int> val(1, 8);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> a(static_cast<std::size_t>(len(rng))), b(static_cast<std::size_t>(len(rng)));
    for (auto& x : a) x = val(rng);
    for (auto& x : b) x = val(rng);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const MergedSpectrum m = merge(a, b);
    std::vector<double> all = a;
    all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    REQUIRE(m.values == all);
    std::size_t na = 0, nb = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto& tag = m.tags[i];
      const std::vector<double>& src = tag.source == ModeSource::Omega ? a : b;
      REQUIRE(src.at(tag.index) == m.values[i]);
      (tag.source == ModeSource::Omega ? na : nb)++;
    }
    REQUIRE(na == a.size());
    REQUIRE(nb == b.size());
  }
}

TEST_CASE("projection deficiency bounds") {
  const auto fx = testing::small_fixtures()[2];
  const Spectrum s = dense_reference_solve(fx.K, fx.M);
  std::vector<Vector> basis(s.vectors.begin(), s.vectors.begin() + 6);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 50; ++t) {
    Vector x(static_cast<std::size_t>(fx.K.dim()));
    for (auto& v : x) v = nd(rng);
    const double norm = std::sqrt(fx.M.bilinear(x, x));
    const double d = projection_deficiency(x, basis, fx.M);
    CHECK(d >= 0.0);
    CHECK(d <= norm * (1.0 + 1e-12));
    // Larger bases never increase the deficiency.
    std::vector<Vector> more(s.vectors.begin(), s.vectors.begin() + 12);
    CHECK(projection_deficiency(x, more, fx.M) <= d * (1.0 + 1e-12));
  }
  Vector in_span(static_cast<std::size_t>(fx.K.dim()), 0.0);
  for (std::size_t i = 0; i < basis.size(); ++i) axpy(1.0 + i, basis[i], in_span);
  CHECK(projection_deficiency(in_span, basis, fx.M) <= 1e-10);
  const Vector orth = s.vectors[20];
  CHECK(projection_deficiency(orth, basis, fx.M) == doctest::Approx(1.0).epsilon(1e-10));
}
