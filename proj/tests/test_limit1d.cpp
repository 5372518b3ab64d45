#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dumbbell/error.hpp"
#include "dumbbell/limit1d.hpp"

using namespace dumbbell;

TEST_CASE("clamped beam roots") {
  const auto k = beam_roots(5);
  REQUIRE(k.size() == 5);
  CHECK(k[0] == doctest::Approx(4.7300407449).epsilon(1e-10));
  CHECK(k[1] == doctest::Approx(7.8532046240).epsilon(1e-10));
  for (double r : k) CHECK(std::abs(std::cos(r) * std::cosh(r) - 1.0) <= 1e-9 * std::cosh(r));
  CHECK_THROWS_AS(beam_roots(0), Error);
}

TEST_CASE("g = 1, sigma = 0: theta_j = 1 + k_j^4") {
  const auto k = beam_roots(3);
  const LimitSolution sol = solve_limit({ProfileSpec::constant(1.0), {0.0, 0.0}, 256}, 3);
  CHECK(std::abs(sol.spectrum.values[0] - (1.0 + std::pow(k[0], 4))) <= 1e-6 * std::pow(k[0], 4));
  CHECK(std::abs(sol.spectrum.values[1] - (1.0 + std::pow(k[1], 4))) <= 1e-5 * std::pow(k[1], 4));
  CHECK(std::abs(sol.spectrum.values[2] - (1.0 + std::pow(k[2], 4))) <= 1e-5 * std::pow(k[2], 4));
}

TEST_CASE("sigma = 0.3 scales the bending part by 1 - sigma^2") {
  const double k1 = beam_roots(1)[0];
  const LimitSolution sol = solve_limit({ProfileSpec::constant(1.0), {0.3, 0.0}, 256}, 1);
  const double expect = 1.0 + 0.91 * std::pow(k1, 4);
  CHECK(expect == doctest::Approx(456.513).epsilon(1e-5));
  CHECK(sol.spectrum.values[0] == doctest::Approx(expect).epsilon(1e-6));

  const auto ratio = sigma_distortion_ratio(0.3, 0.0, ProfileSpec::constant(1.0), 128);
  for (double r : ratio) CHECK(std::abs(r - 0.91) <= 1e-8);
}

TEST_CASE("observed order of convergence") {
  std::vector<double> th;
  for (int n : {32, 64, 128, 256}) th.push_back(solve_limit({ProfileSpec::constant(1.0), {0.0, 0.0}, n}, 1).spectrum.values[0]);
  const double exact = 1.0 + std::pow(beam_roots(1)[0], 4);
  // Errors fall by ~2^4 per halving for cubic Hermite elements.
  for (std::size_t i = 0; i + 2 < th.size(); ++i) {
    const double p = std::log2((th[i] - exact) / (th[i + 1] - exact));
    CHECK(p >= 3.5);
  }
  // Conforming elements approximate from above until roundoff takes over near n = 256.
  for (std::size_t i = 0; i < 3; ++i) CHECK(th[i] > exact);
}

TEST_CASE("modes of a symmetric profile are even or odd") {
  const LimitSolution sol = solve_limit({ProfileSpec::cosine_bump(1.0, 0.5), {0.3, 0.5}, 64}, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    const SampledFunction f = sol.mode(j);
    const double parity = (j % 2 == 0) ? 1.0 : -1.0;
    double scale = 0.0;
    for (double v : f.value) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < f.value.size(); ++i) {
      const std::size_t m = f.value.size() - 1 - i;
      CHECK(std::abs(f.value[i] - parity * f.value[m]) <= 1e-7 * scale);
    }
  }
  // Sign convention: the first nonzero interior value is positive.
  for (std::size_t j = 0; j < 3; ++j) CHECK(sol.mode(j).value[1] > 0.0);
}

TEST_CASE("tension raises every eigenvalue") {
  const auto a = solve_limit({ProfileSpec::constant(1.0), {0.0, 0.0}, 64}, 4).spectrum.values;
  const auto b = solve_limit({ProfileSpec::constant(1.0), {0.0, 2.0}, 64}, 4).spectrum.values;
  for (std::size_t j = 0; j < 4; ++j) CHECK(b[j] > a[j]);
}

TEST_CASE("limit problem validation") {
  CHECK_THROWS_AS(solve_limit({ProfileSpec::constant(1.0), {1.0, 0.0}, 64}, 1), Error);
  CHECK_THROWS_AS(solve_limit({ProfileSpec::constant(1.0), {0.0, 0.0}, 2}, 1), Error);
  CHECK_THROWS_AS(solve_limit({ProfileSpec::polynomial({-1.0, 3.0}), {0.0, 0.0}, 64}, 1), Error);
}
