#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "kchem/error.hpp"
#include "kchem/remap.hpp"

using namespace kchem;

namespace {

std::vector<double> random_masses(std::size_t n, unsigned seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> m(n);
  for (auto& v : m)
    v = u(rng);
  return m;
}

double total(std::vector<double> const& v)
{
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

TEST_CASE("integer periodic shift is an exact roll")
{
  auto const in = random_masses(17, 1);
  std::vector<double> out(in.size());
  shift_periodic(in, 5.0, out);
  for (std::size_t k = 0; k < in.size(); ++k)
    CHECK(out[(k + 5) % in.size()] == in[k]);
  shift_periodic(in, -3.0, out);
  for (std::size_t k = 0; k < in.size(); ++k)
    CHECK(out[(k + in.size() - 3) % in.size()] == in[k]);
  shift_periodic(in, 34.0, out);
  CHECK(out == in);
}

TEST_CASE("fractional periodic shift conserves mass and positivity")
{
  for (unsigned seed = 0; seed < 20; ++seed)
  {
    auto in = random_masses(40, seed);
    // Sharp features stress the limiter.
    in[7] = 0.0;
    in[8] = 50.0;
    in[9] = 0.0;
    std::vector<double> out(in.size());
    double const shift = -7.3 + 0.71 * seed;
    shift_periodic(in, shift, out);
    CHECK(total(out) == doctest::Approx(total(in)).epsilon(1e-14));
    for (double v : out)
      CHECK(v >= 0.0);
  }
}

TEST_CASE("fractional shift of a smooth profile is high order")
{
  auto err = [](std::size_t n) {
    double const h = 1.0 / static_cast<double>(n);
    double const pi2 = 2.0 * M_PI;
    std::vector<double> in(n), out(n);
    // Cell averages of 1 + 0.5 sin(2 pi x) times h.
    auto cell = [&](double a) { return h + 0.5 * (std::cos(pi2 * a) - std::cos(pi2 * (a + h))) / pi2; };
    for (std::size_t k = 0; k < n; ++k)
      in[k] = cell(static_cast<double>(k) * h);
    double const shift = 0.37;
    shift_periodic(in, shift, out);
    double e = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      e = std::max(e, std::abs(out[k] - cell((static_cast<double>(k) - shift) * h)) / h);
    return e;
  };
  double const e1 = err(32), e2 = err(64);
  CHECK(e1 < 1e-4);
  CHECK(std::log2(e1 / e2) > 2.5);
}

TEST_CASE("affine remap")
{
  std::vector<double> scratch(33), out(32);
  SUBCASE("identity")
  {
    auto const in = random_masses(32, 3);
    auto const loss = remap_affine(in, 1.0, 0.0, out, scratch);
    CHECK(loss.low == 0.0);
    CHECK(loss.high == 0.0);
    for (std::size_t k = 0; k < in.size(); ++k)
      CHECK(out[k] == doctest::Approx(in[k]).epsilon(1e-14));
  }
  SUBCASE("contraction keeps interior mass and reports losses")
  {
    std::vector<double> in(32, 0.0);
    for (std::size_t k = 10; k < 20; ++k)
      in[k] = 1.0 + 0.1 * static_cast<double>(k);
    auto const loss = remap_affine(in, 0.6, 4.0, out, scratch);
    CHECK(loss.low == 0.0);
    CHECK(loss.high == 0.0);
    CHECK(total(out) == doctest::Approx(total(in)).epsilon(1e-14));
    // Support [10, 20] maps to [10, 16].
    for (std::size_t k = 0; k < 32; ++k)
    {
      CHECK(out[k] >= 0.0);
      if (k < 10 || k >= 16)
        CHECK(out[k] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    }
  }
  SUBCASE("mass pushed outside is reported")
  {
    std::vector<double> in(32, 1.0);
    auto const loss = remap_affine(in, 1.0, 2.5, out, scratch);
    CHECK(loss.low == 0.0);
    CHECK(loss.high == doctest::Approx(2.5));
    CHECK(total(out) + loss.high == doctest::Approx(32.0));
    auto const back = remap_affine(in, 1.0, -1.25, out, scratch);
    CHECK(back.low == doctest::Approx(1.25));
  }
  SUBCASE("invalid arguments")
  {
    std::vector<double> in(32, 1.0);
    CHECK_THROWS_AS(remap_affine(in, 1.5, 0.0, out, scratch), ArgumentError);
    CHECK_THROWS_AS(remap_affine(in, 0.0, 0.0, out, scratch), ArgumentError);
    std::vector<double> small(4);
    CHECK_THROWS_AS(remap_affine(in, 0.5, 0.0, out, small), ArgumentError);
  }
}
