#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "kchem/characteristics.hpp"
#include "kchem/error.hpp"

using namespace kchem;
using std::numbers::pi;

namespace {

ModelConfig cartoon(double te, double ta)
{
  ModelConfig cfg;
  cfg.t_e = te;
  cfg.t_a = ta;
  cfg.g.gain = {1.5};
  cfg.g.saturation = {0.0};
  cfg.length = 10.0;
  return cfg;
}

//! S(x, t) = 1 + 0.5 sin(2 pi x / L + t) sampled every 0.02 on [0, t_end].
SignalHistory wave_history(double t_end, double length = 10.0)
{
  PeriodicGrid const g{64, length};
  SignalHistory h(g, 1);
  double const k = 2.0 * pi / length;
  for (int step = 0; step * 0.02 <= t_end + 1e-12; ++step)
  {
    SignalField f = SignalField::zeros(g, 1);
    f.t = step * 0.02;
    for (std::size_t i = 0; i < g.cells; ++i)
    {
      double const x = g.center(i);
      f.value[0][i] = 1.0 + 0.5 * std::sin(k * x + f.t);
      f.dx[0][i] = 0.5 * k * std::cos(k * x + f.t);
      f.dt[0][i] = 0.5 * std::cos(k * x + f.t);
    }
    h.append(f);
  }
  return h;
}

//! Classical RK4 for the cartoon system along x(tau) = x0 + v (tau - t0).
InternalState rk4(InternalState y, double x0, double v, double t0, double t1, int steps,
                  SignalHistory const& h, ModelConfig const& cfg)
{
  std::vector<double> s(1);
  auto rhs = [&](double tau, InternalState const& z) {
    h.evaluate(x0 + v * (tau - t0), tau, s);
    return cartoon_rhs(s, z, cfg);
  };
  double const dt = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i)
  {
    double const t = t0 + i * dt;
    auto const k1 = rhs(t, y);
    auto const k2 = rhs(t + dt / 2, {y[0] + dt / 2 * k1[0], y[1] + dt / 2 * k1[1]});
    auto const k3 = rhs(t + dt / 2, {y[0] + dt / 2 * k2[0], y[1] + dt / 2 * k2[1]});
    auto const k4 = rhs(t + dt, {y[0] + dt * k3[0], y[1] + dt * k3[1]});
    for (int c = 0; c < 2; ++c)
      y[static_cast<std::size_t>(c)] += dt / 6 * (k1[static_cast<std::size_t>(c)] + 2 * k2[static_cast<std::size_t>(c)]
                                                  + 2 * k3[static_cast<std::size_t>(c)] + k4[static_cast<std::size_t>(c)]);
  }
  return y;
}

}  // namespace

TEST_CASE("signal history interpolation")
{
  auto const h = wave_history(1.0);
  std::vector<double> s(1), sx(1), st(1);
  h.evaluate(3.3, 0.51, s, sx, st);
  double const k = 2.0 * pi / 10.0;
  CHECK(s[0] == doctest::Approx(1.0 + 0.5 * std::sin(k * 3.3 + 0.51)).epsilon(1e-4));
  CHECK(sx[0] == doctest::Approx(0.5 * k * std::cos(k * 3.3 + 0.51)).epsilon(1e-3));
  // Periodic wrap.
  std::vector<double> s2(1);
  h.evaluate(3.3 + 20.0, 0.51, s2);
  CHECK(s2[0] == doctest::Approx(s[0]).epsilon(1e-14));
  CHECK_THROWS_AS(h.evaluate(1.0, 1.5, s), HistoryError);
  CHECK_THROWS_AS(h.evaluate(1.0, -0.1, s), HistoryError);

  SignalHistory bad(PeriodicGrid{64, 10.0}, 1);
  SignalField f = SignalField::zeros(PeriodicGrid{64, 10.0}, 1);
  bad.append(f);
  CHECK_THROWS_AS(bad.append(f), ArgumentError);
  f.value[0][0] = 2.0;
  CHECK_NOTHROW(bad.replace_last(f));
  CHECK(bad.size() == 1);
}

TEST_CASE("cartoon step equals the matrix exponential")
{
  auto const cfg = cartoon(0.3, 1.7);
  Eigen::Matrix2d j;
  j << -1.0 / cfg.t_e, -1.0 / cfg.t_e, 0.0, -1.0 / cfg.t_a;
  for (double u : {0.01, 0.5, 2.0, -0.4})
  {
    Eigen::Matrix2d const e = (j * u).exp();
    double const g = 0.8;
    Eigen::Vector2d const y0(0.3, -0.2), fix(0.0, g);
    Eigen::Vector2d const exact = e * (y0 - fix) + fix;
    auto const step = CartoonStep::make(cfg, u).apply({0.3, -0.2}, g);
    CHECK(step[0] == doctest::Approx(exact(0)).epsilon(1e-13));
    CHECK(step[1] == doctest::Approx(exact(1)).epsilon(1e-13));
  }
  // Equal time constants: the kernel tends to u exp(-u/t).
  CHECK(cartoon_coupling_kernel(0.7, 0.5, 0.5) == doctest::Approx(0.7 * std::exp(-1.4)).epsilon(1e-14));
  CHECK(cartoon_coupling_kernel(0.7, 0.5, 0.5 + 1e-12) == doctest::Approx(0.7 * std::exp(-1.4)).epsilon(1e-9));
}

TEST_CASE("back-traced characteristics integrate forward to the start point")
{
  auto const cfg = cartoon(0.4, 1.1);
  auto const h = wave_history(3.0);
  InternalState const y{0.2, 0.9};
  auto const tr = trace_characteristic(4.0, 0.7, y, 3.0, 0.5, h, cfg, {0.02, 8, 1e-10});
  CHECK(tr.times.front() == doctest::Approx(0.5));
  CHECK(tr.positions.front() == doctest::Approx(4.0 - 0.7 * 2.5));
  InternalState const start{tr.states.front()[0], tr.states.front()[1]};
  auto const end = rk4(start, tr.positions.front(), 0.7, 0.5, 3.0, 4000, h, cfg);
  CHECK(end[0] == doctest::Approx(y[0]).epsilon(1e-7));
  CHECK(end[1] == doctest::Approx(y[1]).epsilon(1e-7));

  SUBCASE("forward propagation agrees with the oracle")
  {
    auto const fwd = propagate_internal_state(tr.positions.front(), 0.7, start, 0.5, 3.0, h, cfg, 0.02);
    CHECK(fwd[0] == doctest::Approx(end[0]).epsilon(1e-7));
    CHECK(fwd[1] == doctest::Approx(end[1]).epsilon(1e-7));
  }
  SUBCASE("adaptive general integrator agrees")
  {
    auto const gen = trace_characteristic_general(4.0, 0.7, {y[0], y[1]}, 3.0, 0.5, h, cartoon_dynamics(cfg));
    CHECK(gen.states.front()[0] == doctest::Approx(tr.states.front()[0]).epsilon(1e-6));
    CHECK(gen.states.front()[1] == doctest::Approx(tr.states.front()[1]).epsilon(1e-6));
  }
}

TEST_CASE("Jacobian determinant of the back-time map")
{
  auto const cfg = cartoon(0.5, 2.0);
  auto const h = wave_history(2.0);
  double const eps = 1e-3;
  auto back = [&](InternalState y) {
    auto const tr = trace_characteristic(1.0, -1.0, y, 2.0, 0.2, h, cfg);
    return tr.states.front();
  };
  InternalState const y{0.1, 0.4};
  auto const p0 = back({y[0] + eps, y[1]}), m0 = back({y[0] - eps, y[1]});
  auto const p1 = back({y[0], y[1] + eps}), m1 = back({y[0], y[1] - eps});
  double const a = (p0[0] - m0[0]) / (2 * eps), b = (p1[0] - m1[0]) / (2 * eps);
  double const c = (p0[1] - m0[1]) / (2 * eps), d = (p1[1] - m1[1]) / (2 * eps);
  double const expected = jacobian_det_cartoon(cfg, 1.8);
  CHECK(a * d - b * c == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(std::exp(2.5 * 1.8)));
  CHECK_THROWS_AS(jacobian_det_cartoon(cfg, -0.1), ArgumentError);

  auto const tr = trace_characteristic(1.0, -1.0, y, 2.0, 0.2, h, cfg);
  auto const dyn = cartoon_dynamics(cfg);
  auto const q = jacobian_det_general(
      tr, [&](double, std::span<const double> s, std::span<const double> z) { return dyn.divergence(s, z); });
  CHECK(q.converged);
  CHECK(q.value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(tr.jacobian.front() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("Richardson estimate flags a varying divergence")
{
  CharacteristicTrace tr;
  for (int k = 0; k <= 8; ++k)
  {
    tr.times.push_back(k * 0.25);
    tr.states.push_back({0.0, 0.0});
    tr.signals.push_back({0.0});
  }
  auto const q = jacobian_det_general(tr, [](double t, auto, auto) { return -t * t; }, 1e-3);
  // int_0^2 t^2 = 8/3; Richardson on the trapezoid is exact for quadratics.
  CHECK(q.value == doctest::Approx(std::exp(8.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("internal state box contains trajectories under bounded signals")
{
  auto cfg = cartoon(0.3, 1.0);
  cfg.g.gain = {1.0};
  GrowthSpec gs;
  gs.phi = GrowthFunction::power(0.0, 1.0, 1.0);
  YBox y0{{-0.2, 0.0}, {0.2, 0.3}};
  double const sup_s = 1.5;
  auto const box = internal_state_box(sup_s, cfg, gs, y0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial)
  {
    PeriodicGrid const g{16, 10.0};
    SignalHistory h(g, 1);
    for (int step = 0; step <= 40; ++step)
    {
      SignalField f = SignalField::zeros(g, 1);
      f.t = 0.25 * step;
      for (auto& v : f.value[0])
        v = sup_s * u(rng);
      h.append(f);
    }
    InternalState y{y0.lo[0] + 0.4 * u(rng), 0.3 * u(rng)};
    double x = 10.0 * u(rng);
    for (int step = 0; step < 100; ++step)
    {
      y = propagate_internal_state(x, 1.0, y, 0.1 * step, 0.1 * (step + 1), h, cfg, 0.05);
      x += 0.1;
      CHECK(y[0] >= box.tight.lo[0] - 1e-12);
      CHECK(y[0] <= box.tight.hi[0] + 1e-12);
      CHECK(y[1] >= box.tight.lo[1] - 1e-12);
      CHECK(y[1] <= box.tight.hi[1] + 1e-12);
      CHECK(std::abs(y[0]) <= box.radius[0]);
      CHECK(std::abs(y[1]) <= box.radius[1]);
    }
  }
}
