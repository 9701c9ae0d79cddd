#include "kchem/agents.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>

#include "kchem/error.hpp"

namespace kchem {

namespace {

double exponential(CounterStream& rng, double rate)
{
  return rate > 0.0 ? -std::log(rng.uniform()) / rate : HUGE_VAL;
}

std::uint32_t draw_velocity(TurningKernel const& k, VelocitySet const& vs, std::uint32_t old, double u)
{
  double acc = 0.0;
  for (std::size_t v = 0; v < vs.size(); ++v)
  {
    acc += k(v, old) * vs.weights[v];
    if (u < acc)
      return static_cast<std::uint32_t>(v);
  }
  return static_cast<std::uint32_t>(vs.size() - 1);
}

}  // namespace

std::vector<double> thinning_events(std::function<double(double)> const& rate, double bound,
                                    double t0, double t1, CounterStream& rng)
{
  std::vector<double> events;
  double t = t0;
  while (true)
  {
    t += exponential(rng, bound);
    if (t > t1)
      break;
    double const r = rate(t);
    if (r > bound * (1.0 + 1e-12))
      throw ThinningBoundError("rate " + std::to_string(r) + " exceeds thinning bound "
                               + std::to_string(bound));
    if (rng.uniform() * bound < r)
      events.push_back(t);
  }
  return events;
}

AgentStepStats step_agents(AgentEnsemble& ens, SignalHistory const& history, double dt,
                           ModelConfig const& cfg, AgentStepOptions const& opts)
{
  if (!(dt > 0.0))
    throw ArgumentError("agent step needs dt > 0");
  PeriodicGrid const domain{1, cfg.length};
  double const t0 = ens.t;
  double const t1 = t0 + dt;
  double const bound = opts.rate_bound;
  std::size_t const count = ens.agents.size();
  std::size_t const m = cfg.signal_dim();

  std::vector<AgentStepStats> per(count);
  std::vector<std::vector<TrajectoryRecord>> logs(opts.log ? std::min(opts.log_agents, count) : 0);
  // Exceptions must not escape the parallel region.
  std::exception_ptr failure;
  std::mutex failure_mutex;

#pragma omp parallel
  {
    std::vector<double> s(m), sx(m), st(m);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(count); ++ii)
    {
      std::size_t const id = static_cast<std::size_t>(ii);
      try
      {
        Agent& ag = ens.agents[id];
        AgentStepStats& st_out = per[id];
        CounterStream rng(ens.seed, id, ag.draws);
        std::vector<TrajectoryRecord>* log = id < logs.size() ? &logs[id] : nullptr;

        auto advance = [&](double ta, double tb) {
          double const v = cfg.velocities.speeds[ag.velocity];
          ag.y = propagate_internal_state(ag.x, v, ag.y, ta, tb, history, cfg, opts.max_substep);
          ag.x = domain.wrap(ag.x + v * (tb - ta));
          if (opts.check_box
              && (ag.y[0] < opts.box.lo[0] || ag.y[0] > opts.box.hi[0] || ag.y[1] < opts.box.lo[1]
                  || ag.y[1] > opts.box.hi[1]))
          {
            ++st_out.box_exits;
          }
        };
        auto check_rate = [&](double t, double r) {
          double const ratio = bound > 0.0 ? r / bound : (r > 0.0 ? HUGE_VAL : 0.0);
          st_out.max_ratio = std::max(st_out.max_ratio, ratio);
          if (opts.growth != nullptr)
          {
            double const v = cfg.velocities.speeds[ag.velocity];
            history.evaluate(ag.x, t, s, sx, st);
            double cn = 0.0, dc = 0.0;
            for (std::size_t c = 0; c < m; ++c)
            {
              cn += s[c] * s[c];
              double const d = v * sx[c] + st[c];
              dc += d * d;
            }
            auto const& gs = *opts.growth;
            if (r > gs.c_lambda * (1.0 + gs.lambda_fn(std::sqrt(cn)) + std::sqrt(dc)) * (1.0 + 1e-12))
              ++st_out.growth_violations;
          }
        };

        double t = t0;
        while (true)
        {
          double const tau = t + exponential(rng, bound);
          if (tau >= t1)
          {
            advance(t, t1);
            break;
          }
          advance(t, tau);
          t = tau;
          ++st_out.candidates;
          double const r = cfg.lambda(ag.y[0]);
          check_rate(t, r);
          bool const accept = rng.uniform() * bound < r;
          if (accept)
          {
            ++st_out.accepted;
            ag.velocity = draw_velocity(cfg.kernel, cfg.velocities, ag.velocity, rng.uniform());
          }
          if (log != nullptr)
            log->push_back({id, t, ag.x, cfg.velocities.speeds[ag.velocity], ag.y, accept});
        }
        check_rate(t1, cfg.lambda(ag.y[0]));
        if (log != nullptr)
          log->push_back({id, t1, ag.x, cfg.velocities.speeds[ag.velocity], ag.y, false});
        ag.draws = rng.position();
      }
      catch (...)
      {
        std::lock_guard<std::mutex> const lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
      }
    }
  }
  if (failure)
    std::rethrow_exception(failure);
  ens.t = t1;

  AgentStepStats total;
  for (auto const& p : per)
  {
    total.candidates += p.candidates;
    total.accepted += p.accepted;
    total.growth_violations += p.growth_violations;
    total.box_exits += p.box_exits;
    total.max_ratio = std::max(total.max_ratio, p.max_ratio);
  }
  if (opts.log != nullptr)
  {
    for (auto const& l : logs)
      opts.log->insert(opts.log->end(), l.begin(), l.end());
  }
  if (total.max_ratio > 1.0 + 1e-12)
    throw ThinningBoundError("turning rate exceeded the thinning bound by factor "
                             + std::to_string(total.max_ratio));
  return total;
}

std::vector<double> empirical_density(AgentEnsemble const& ens, PeriodicGrid const& grid)
{
  std::vector<std::uint64_t> counts(grid.cells, 0);
  double const h = grid.spacing();
  for (auto const& a : ens.agents)
  {
    auto bin = static_cast<std::size_t>(std::floor(grid.wrap(a.x) / h));
    counts[std::min(bin, grid.cells - 1)] += 1;
  }
  std::vector<double> n(grid.cells);
  for (std::size_t i = 0; i < n.size(); ++i)
    n[i] = static_cast<double>(counts[i]) * ens.mass_per_agent / h;
  return n;
}

AgentEnsemble sample_agents(PhaseSpaceField const& f, std::size_t count, std::uint64_t seed)
{
  auto const& g = f.grid;
  std::vector<double> cumulative(f.values.size());
  std::size_t const per_v = g.x.cells * g.y1.cells * g.y2.cells;
  double acc = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k)
  {
    acc += std::max(f.values[k], 0.0) * g.volume(k / per_v);
    cumulative[k] = acc;
  }
  if (!(acc > 0.0))
    throw ArgumentError("cannot sample agents from a field with zero mass");

  AgentEnsemble ens;
  ens.t = f.t;
  ens.seed = seed;
  ens.mass_per_agent = acc / static_cast<double>(count);
  ens.agents.resize(count);
  std::size_t const nx = g.x.cells, n2 = g.y2.cells, n1 = g.y1.cells;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(count); ++ii)
  {
    std::size_t const id = static_cast<std::size_t>(ii);
    CounterStream rng(seed, id);
    double const u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t k = std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
    std::size_t const i = k % nx;
    std::size_t const b = (k / nx) % n2;
    std::size_t const a = (k / (nx * n2)) % n1;
    std::size_t const vi = k / per_v;
    Agent ag;
    ag.x = g.x.wrap((static_cast<double>(i) + rng.uniform()) * g.x.spacing());
    ag.velocity = static_cast<std::uint32_t>(vi);
    ag.y = {g.y1.lower + (static_cast<double>(a) + rng.uniform()) * g.y1.spacing,
            g.y2.lower + (static_cast<double>(b) + rng.uniform()) * g.y2.spacing};
    ag.draws = rng.position();
    ens.agents[id] = ag;
  }
  return ens;
}

}  // namespace kchem
