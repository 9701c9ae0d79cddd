#include <algorithm>
#include <cmath>
#include <vector>

#include <omp.h>

#include "doctest.h"
#include "kchem/agents.hpp"
#include "kchem/error.hpp"
#include "kchem/rng.hpp"

using namespace kchem;

TEST_CASE("Philox4x32-10 known-answer vectors")
{
  using P = Philox4x32;
  CHECK(P::block({0, 0, 0, 0}, {0, 0}) == P::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(P::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff})
        == P::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(P::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0})
        == P::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter streams are uniform, independent and resumable")
{
  CounterStream a(7, 0), b(7, 1);
  double sum = 0.0, sum2 = 0.0, cross = 0.0;
  int const n = 200000;
  for (int i = 0; i < n; ++i)
  {
    double const u = a.uniform(), v = b.uniform();
    CHECK_FALSE((u <= 0.0 || u >= 1.0));
    sum += u;
    sum2 += u * u;
    cross += (u - 0.5) * (v - 0.5);
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
  CHECK(sum2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.005));
  CHECK(std::abs(cross / n) < 0.003);

  CounterStream c(7, 0);
  for (int i = 0; i < 10; ++i)
    c.uniform();
  CounterStream d(7, 0, c.position());
  CHECK(c.uniform() == d.uniform());
}

TEST_CASE("thinning reproduces an inhomogeneous Poisson process")
{
  auto rate = [](double t) { return 1.0 + std::sin(t); };
  auto big = [](double t) { return t - std::cos(t) + 1.0; };  // integrated rate
  CounterStream rng(2026, 3);
  double const t1 = 4000.0;
  auto const ev = thinning_events(rate, 2.0, 0.0, t1, rng);
  // Time rescaling turns the event times into a unit-rate Poisson process.
  std::vector<double> gaps;
  double prev = 0.0;
  for (double t : ev)
  {
    gaps.push_back(big(t) - prev);
    prev = big(t);
  }
  std::sort(gaps.begin(), gaps.end());
  double const m = static_cast<double>(gaps.size());
  CHECK(m == doctest::Approx(big(t1)).epsilon(0.05));
  double ks = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i)
  {
    double const cdf = 1.0 - std::exp(-gaps[i]);
    ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / m), std::abs(cdf - static_cast<double>(i + 1) / m)});
  }
  CHECK(ks < 1.63 / std::sqrt(m));

  CounterStream bad(1, 1);
  CHECK_THROWS_AS(thinning_events(rate, 1.5, 0.0, 100.0, bad), ThinningBoundError);
}

namespace {

ModelConfig agent_model()
{
  ModelConfig cfg;
  cfg.t_e = 0.5;
  cfg.t_a = 1.0;
  cfg.g.gain = {1.0};
  cfg.g.saturation = {0.0};
  cfg.lambda.kind = RateKind::clipped_linear;
  cfg.lambda.rate = 1.0;
  cfg.lambda.slope = -1.0;
  cfg.velocities = VelocitySet{{-1.0, -0.5, 0.5, 1.0}, {1.0, 1.0, 1.0, 1.0}};
  cfg.kernel_spec.kind = KernelKind::uniform;
  cfg.kernel = TurningKernel::build(cfg.kernel_spec, cfg.velocities);
  cfg.length = 10.0;
  return cfg;
}

SignalHistory ramp_history(double t_end)
{
  PeriodicGrid const g{32, 10.0};
  SignalHistory h(g, 1);
  for (int k = 0; k <= 10; ++k)
  {
    SignalField s = SignalField::zeros(g, 1);
    s.t = t_end * k / 10.0;
    for (std::size_t i = 0; i < g.cells; ++i)
    {
      s.value[0][i] = 0.5 + 0.3 * std::cos(2.0 * M_PI * g.center(i) / 10.0);
      s.dx[0][i] = -0.3 * 2.0 * M_PI / 10.0 * std::sin(2.0 * M_PI * g.center(i) / 10.0);
    }
    h.append(s);
  }
  return h;
}

PhaseSpaceField seed_field(ModelConfig const& cfg)
{
  PhaseSpaceGrid const g{PeriodicGrid{16, cfg.length}, cfg.velocities, IntervalGrid{-0.5, 0.125, 8},
                         IntervalGrid{0.0, 0.125, 8}};
  PhaseSpaceField f(g);
  for (std::size_t k = 0; k < f.values.size(); ++k)
    f.values[k] = 1.0 + static_cast<double>(k % 7);
  return f;
}

}  // namespace

TEST_CASE("sampling and stepping agents")
{
  auto const cfg = agent_model();
  auto const f = seed_field(cfg);
  auto const h = ramp_history(2.5);
  auto ens = sample_agents(f, 5000, 99);
  CHECK(ens.agents.size() == 5000);
  double const mass = density_and_flux(f).mass;
  CHECK(ens.mass_per_agent * 5000 == doctest::Approx(mass));
  auto const n = empirical_density(ens, f.grid.x);
  double tot = 0.0;
  for (double v : n)
    tot += v * f.grid.x.spacing();
  CHECK(tot == doctest::Approx(mass));
  for (auto const& a : ens.agents)
  {
    CHECK(a.y[0] >= -0.5);
    CHECK(a.y[0] <= 0.5);
  }

  AgentStepOptions opts;
  opts.rate_bound = 2.0;
  std::vector<TrajectoryRecord> log;
  opts.log = &log;
  opts.log_agents = 3;
  AgentStepStats total;
  for (int k = 0; k < 20; ++k)
  {
    auto const st = step_agents(ens, h, 0.1, cfg, opts);
    total.candidates += st.candidates;
    total.accepted += st.accepted;
  }
  CHECK(ens.t == doctest::Approx(2.0));
  CHECK(ens.agents.size() == 5000);
  // Candidate rate is the bound; acceptance sits in (0, 1).
  CHECK(static_cast<double>(total.candidates) == doctest::Approx(5000 * 2.0 * 2.0).epsilon(0.03));
  CHECK(total.accepted > 0);
  CHECK(total.accepted < total.candidates);
  CHECK(!log.empty());
  for (auto const& r : log)
    CHECK(r.id < 3);

  SUBCASE("uniform kernel draws each velocity equally")
  {
    std::vector<int> counts(4, 0);
    for (auto const& a : ens.agents)
      ++counts[a.velocity];
    for (int c : counts)
      CHECK(c == doctest::Approx(1250).epsilon(0.1));
  }
  SUBCASE("a low thinning bound is detected")
  {
    opts.rate_bound = 0.5;
    CHECK_THROWS_AS(step_agents(ens, h, 0.1, cfg, opts), ThinningBoundError);
  }
  SUBCASE("stepping past the recorded signal throws")
  {
    CHECK_THROWS_AS(step_agents(ens, h, 1.0, cfg, opts), HistoryError);
  }
}

TEST_CASE("agent trajectories do not depend on the thread count")
{
  auto const cfg = agent_model();
  auto const f = seed_field(cfg);
  auto const h = ramp_history(1.0);
  AgentStepOptions opts;
  opts.rate_bound = 2.0;
  auto run = [&](int threads) {
    omp_set_num_threads(threads);
    auto ens = sample_agents(f, 3000, 5);
    for (int k = 0; k < 10; ++k)
      step_agents(ens, h, 0.1, cfg, opts);
    return ens;
  };
  int const saved = omp_get_max_threads();
  auto const a = run(1);
  auto const b = run(4);
  omp_set_num_threads(saved);
  for (std::size_t i = 0; i < a.agents.size(); ++i)
  {
    CHECK(a.agents[i].x == b.agents[i].x);
    CHECK(a.agents[i].velocity == b.agents[i].velocity);
    CHECK(a.agents[i].y == b.agents[i].y);
    CHECK(a.agents[i].draws == b.agents[i].draws);
  }
}
