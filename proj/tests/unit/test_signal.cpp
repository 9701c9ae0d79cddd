#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "dense_oracle.hpp"
#include "kchem/error.hpp"
#include "kchem/signal.hpp"

using namespace kchem;
using kchem_test::dense_elliptic;
using std::numbers::pi;

namespace {

double max_abs_diff(std::vector<double> const& a, std::vector<double> const& b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

SignalSystem single(double d, double k, double k0)
{
  SignalSystem s;
  s.params = {{d, k, k0}};
  return s;
}

}  // namespace

TEST_CASE("spectral transforms: scaling, round trip, derivative")
{
  PeriodicGrid const g{64, 5.0};
  SpectralOps const ops(g);
  std::vector<double> f(64), back(64), df(64);
  for (std::size_t i = 0; i < 64; ++i)
    f[i] = 1.0 + std::cos(2.0 * pi * 3.0 * g.center(i) / g.length);
  std::vector<std::complex<double>> hat(ops.modes());
  ops.forward(f, hat);
  // Continuous transform of the cosine on [0, L): L/2 times a phase.
  CHECK(std::abs(hat[3]) == doctest::Approx(g.length / 2.0));
  CHECK(hat[0].real() == doctest::Approx(g.length));
  ops.inverse(hat, back);
  CHECK(max_abs_diff(f, back) < 1e-13);
  ops.derivative(f, df);
  double err = 0.0;
  for (std::size_t i = 0; i < 64; ++i)
  {
    double const xi = 2.0 * pi * 3.0 / g.length;
    err = std::max(err, std::abs(df[i] + xi * std::sin(xi * g.center(i))));
  }
  CHECK(err < 1e-12);
}

TEST_CASE("elliptic solver matches a dense linear solve for a spike")
{
  PeriodicGrid const g{48, 7.0};
  SpectralOps const ops(g);
  std::vector<double> n(48, 0.0);
  n[11] = 1.0 / g.spacing();
  auto const sys = single(0.7, 1.3, 0.4);
  auto const s = solve_elliptic(n, sys, ops);
  auto const oracle = dense_elliptic(n, sys, g);
  CHECK(max_abs_diff(s.value[0], oracle[0]) < 1e-10);

  SUBCASE("coupled two-component system")
  {
    SignalSystem c;
    c.params = {{1.0, 1.0, 0.5}, {0.3, 2.0, 1.0}};
    c.reaction.coupling = {0.5, -0.1, 0.2, 1.0};
    auto const sc = solve_elliptic(n, c, ops);
    auto const oc = dense_elliptic(n, c, g);
    CHECK(max_abs_diff(sc.value[0], oc[0]) < 1e-10);
    CHECK(max_abs_diff(sc.value[1], oc[1]) < 1e-10);
  }
}

TEST_CASE("elliptic solver reproduces a single mode exactly")
{
  PeriodicGrid const g{32, 10.0};
  auto const sys = single(2.0, 1.5, 0.3);
  double const xi = 2.0 * pi * 2.0 / g.length;
  std::vector<double> n(32);
  for (std::size_t i = 0; i < 32; ++i)
    n[i] = 1.0 + 0.5 * std::cos(xi * g.center(i));
  auto const s = solve_elliptic(n, sys, g);
  double err = 0.0, derr = 0.0;
  for (std::size_t i = 0; i < 32; ++i)
  {
    double const amp = 1.5 * 0.5 / (2.0 * xi * xi + 0.3);
    err = std::max(err, std::abs(s.value[0][i] - (1.5 / 0.3 + amp * std::cos(xi * g.center(i)))));
    derr = std::max(derr, std::abs(s.dx[0][i] + amp * xi * std::sin(xi * g.center(i))));
  }
  CHECK(err < 1e-10);
  CHECK(derr < 1e-10);
}

TEST_CASE("flux-based time derivative agrees with a difference quotient")
{
  // Travelling profile n(x - c t): flux j = c n gives n_t = -j_x.
  PeriodicGrid const g{128, 10.0};
  SpectralOps const ops(g);
  auto const sys = single(1.0, 1.0, 0.5);
  double const c = 0.8, eps = 1e-4;
  auto profile = [&](double t) {
    std::vector<double> n(128);
    for (std::size_t i = 0; i < 128; ++i)
    {
      double const x = g.center(i) - c * t - 5.0;
      n[i] = std::exp(-x * x);
    }
    return n;
  };
  auto n0 = profile(0.0);
  std::vector<double> j(128);
  for (std::size_t i = 0; i < 128; ++i)
    j[i] = c * n0[i];
  auto const s = solve_elliptic(n0, sys, ops, j);
  auto const sp = solve_elliptic(profile(eps), sys, ops);
  auto const sm = solve_elliptic(profile(-eps), sys, ops);
  double err = 0.0;
  for (std::size_t i = 0; i < 128; ++i)
    err = std::max(err, std::abs(s.dt[0][i] - (sp.value[0][i] - sm.value[0][i]) / (2 * eps)));
  CHECK(err < 1e-7);
}

TEST_CASE("parabolic steps are exact per mode")
{
  PeriodicGrid const g{32, 6.0};
  SpectralOps const ops(g);
  auto const sys = single(0.5, 2.0, 0.7);
  double const xi = 2.0 * pi / g.length;
  std::vector<double> n(32);
  SignalField s = SignalField::zeros(g, 1);
  for (std::size_t i = 0; i < 32; ++i)
  {
    n[i] = 1.0 + 0.3 * std::cos(xi * g.center(i));
    s.value[0][i] = 0.2 * std::sin(xi * g.center(i));
  }
  double const dt = 0.9;
  auto const out = step_parabolic(s, n, dt, sys, ops);
  double const mu = 0.5 * xi * xi + 0.7;
  double err = 0.0, terr = 0.0;
  for (std::size_t i = 0; i < 32; ++i)
  {
    double const x = g.center(i);
    double const mean = 2.0 / 0.7 * (1.0 - std::exp(-0.7 * dt));
    double const cos_amp = 2.0 * 0.3 / mu * (1.0 - std::exp(-mu * dt));
    double const sin_amp = 0.2 * std::exp(-mu * dt);
    double const exact = mean + cos_amp * std::cos(xi * x) + sin_amp * std::sin(xi * x);
    err = std::max(err, std::abs(out.value[0][i] - exact));
    // S_t = d S'' + k n - k0 S at the end state.
    double const st = -0.5 * xi * xi * (cos_amp * std::cos(xi * x) + sin_amp * std::sin(xi * x))
                      + 2.0 * n[i] - 0.7 * exact;
    terr = std::max(terr, std::abs(out.dt[0][i] - st));
  }
  CHECK(err < 1e-12);
  CHECK(terr < 1e-11);

  SUBCASE("uniform consumption decays exponentially")
  {
    SignalSystem c = single(1.0, 0.5, 1.0);
    c.reaction.kind = ReactionKind::consume;
    std::vector<double> nu(32, 2.0);
    SignalField u = SignalField::zeros(g, 1);
    std::fill(u.value[0].begin(), u.value[0].end(), 3.0);
    auto const o = step_parabolic(u, nu, 0.4, c, ops);
    CHECK(o.value[0][5] == doctest::Approx(3.0 * std::exp(-0.5 * 2.0 * 0.4)).epsilon(1e-13));
  }
}

TEST_CASE("explicit signal bounds dominate random densities")
{
  PeriodicGrid const g{96, 12.0};
  SpectralOps const ops(g);
  auto const sys = single(1.0, 1.0, 0.25);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial)
  {
    std::vector<double> n(96);
    for (auto& v : n)
      v = std::pow(u(rng), 6.0) * 10.0;
    double l1 = 0.0, l2 = 0.0;
    for (double v : n)
    {
      l1 += v * g.spacing();
      l2 += v * v * g.spacing();
    }
    auto const rep = signal_bound_report(l1, std::sqrt(l2), sys, g, 1.0);
    auto const s = solve_elliptic(n, sys, ops);
    CHECK(s.sup(0) <= rep.components[0].value);
    CHECK(s.dx_sup(0) <= rep.components[0].gradient);
  }
}

TEST_CASE("the value bound is the periodic Green's function peak")
{
  PeriodicGrid const g{512, 8.0};
  auto const sys = single(2.0, 3.0, 0.5);
  auto const rep = signal_bound_report(1.0, 1.0, sys, g, 1.0);
  double const kappa = std::sqrt(0.5 / 2.0);
  // G(0) = k cosh(kappa L/2) / (2 d kappa sinh(kappa L/2)) for unit mass.
  double const green = 3.0 / (2.0 * 2.0 * kappa * std::tanh(kappa * g.length / 2.0));
  CHECK(rep.components[0].value == doctest::Approx(green).epsilon(1e-13));
  std::vector<double> spike(512, 0.0);
  spike[0] = 1.0 / g.spacing();
  auto const s = solve_elliptic(spike, sys, g);
  CHECK(s.sup(0) <= rep.components[0].value);
  CHECK(s.sup(0) > 0.95 * rep.components[0].value);
}

TEST_CASE("invalid inputs are rejected")
{
  PeriodicGrid const g{16, 1.0};
  SpectralOps const ops(g);
  auto const sys = single(1.0, 1.0, 1.0);
  std::vector<double> n(15, 1.0);
  CHECK_THROWS_AS(solve_elliptic(n, sys, ops), ArgumentError);
  std::vector<double> bad(16, 1.0);
  bad[3] = NAN;
  CHECK_THROWS_AS(solve_elliptic(bad, sys, ops), ArgumentError);
  SignalSystem c = sys;
  c.reaction.kind = ReactionKind::consume;
  CHECK_THROWS_AS(solve_elliptic(std::vector<double>(16, 1.0), c, ops), ArgumentError);
  CHECK_THROWS_AS(SpectralOps(PeriodicGrid{0, 1.0}), ArgumentError);
}
