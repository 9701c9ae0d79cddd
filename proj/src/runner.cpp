#include "kchem/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <omp.h>

#include "json.hpp"
#include "kchem/error.hpp"
#include "kchem/reduce.hpp"

namespace kchem {

namespace {

double shape_mass(Shape shape, double lo, double hi, double c, double w)
{
  if (shape == Shape::gaussian)
  {
    double const a = std::max(lo, c - 4.0 * w);
    double const b = std::min(hi, c + 4.0 * w);
    if (!(b > a))
      return 0.0;
    double const s = std::numbers::sqrt2 * w;
    return 0.5 * (std::erf((b - c) / s) - std::erf((a - c) / s));
  }
  double const a = std::max(lo, c - 0.5 * w);
  double const b = std::min(hi, c + 0.5 * w);
  return b > a ? (b - a) / w : 0.0;
}

//! Density (per unit length) of the x profile, normalized to unit mass.
std::vector<double> x_profile(InitialData const& in, PeriodicGrid const& g)
{
  std::vector<double> p(g.cells, 1.0);
  double const h = g.spacing();
  if (in.x_shape != Shape::uniform)
  {
    double const c = g.wrap(in.x_center);
    for (std::size_t i = 0; i < g.cells; ++i)
    {
      double const lo = static_cast<double>(i) * h;
      double m = 0.0;
      for (double shift : {-g.length, 0.0, g.length})
        m += shape_mass(in.x_shape, lo + shift, lo + h + shift, c, in.x_width);
      p[i] = m;
    }
  }
  double const total = pairwise_sum(p) * h;
  for (double& v : p)
    v /= total;
  return p;
}

std::vector<double> y_profile(Shape shape, double c, double w, IntervalGrid const& g)
{
  std::vector<double> p(g.cells);
  for (std::size_t i = 0; i < g.cells; ++i)
  {
    double const lo = g.lower + static_cast<double>(i) * g.spacing;
    p[i] = shape_mass(shape, lo, lo + g.spacing, c, w);
  }
  double const total = pairwise_sum(p) * g.spacing;
  if (!(total > 0.0))
    throw ArgumentError("initial y profile misses the grid box");
  for (double& v : p)
    v /= total;
  return p;
}

double norm_l1(std::span<const double> n, double h)
{
  return reproducible_sum(n.size(), [n](std::size_t i) { return std::abs(n[i]); }) * h;
}

double norm_l2(std::span<const double> n, double h)
{
  return std::sqrt(reproducible_sum(n.size(), [n](std::size_t i) { return n[i] * n[i]; }) * h);
}

MonitorSample make_sample(double t, Moments const& mo, SignalField const& s, double h, double jac)
{
  MonitorSample m;
  m.t = t;
  m.f_l1 = mo.l1;
  m.f_l2 = mo.l2;
  m.n_l1 = norm_l1(mo.n, h);
  m.n_l2 = norm_l2(mo.n, h);
  for (std::size_t c = 0; c < s.components(); ++c)
  {
    m.s_sup.push_back(s.sup(c));
    m.sx_sup.push_back(s.dx_sup(c));
    m.st_sup.push_back(s.dt_sup(c));
  }
  m.jacobian_inverse = jac;
  return m;
}

//! Largest det dY/dy over back-traced characteristics from (L/2, v, y_ref, t).
double measured_jacobian(ScenarioConfig const& cfg, SignalHistory const& history, double t)
{
  if (!(t > 0.0))
    return 1.0;
  auto const dyn = cartoon_dynamics(cfg.model);
  DivergenceFn const div = [&dyn](double, std::span<const double> c, std::span<const double> y) {
    return dyn.divergence(c, y);
  };
  InternalState const y_ref = cfg.initial.y_center;
  double worst = 0.0;
  for (double v : cfg.model.velocities.speeds)
  {
    auto const trace = trace_characteristic(0.5 * cfg.model.length, v, y_ref, t, 0.0, history, cfg.model);
    worst = std::max(worst, jacobian_det_general(trace, div).value);
  }
  return worst;
}

std::vector<std::string> moment_columns(std::size_t m)
{
  std::vector<std::string> cols{"t", "mass", "f_L1", "f_L2", "f_Linf", "n_L1", "n_L2",
                                "peak_n", "peak_x", "var_n", "y1_mean"};
  for (char const* p : {"S_sup", "Sx_sup", "St_sup"})
  {
    for (std::size_t c = 0; c < m; ++c)
      cols.push_back(std::string(p) + std::to_string(c));
  }
  cols.push_back("jac_inv");
  return cols;
}

std::vector<double> moment_row(MonitorSample const& s, Moments const& mo, PeriodicGrid const& g)
{
  ConcentrationMetrics cm;
  if (mo.mass > 0.0)
    cm = concentration_metrics(mo.n, g);
  std::vector<double> r{s.t, mo.mass, s.f_l1, s.f_l2, mo.linf, s.n_l1, s.n_l2,
                        cm.peak, cm.peak_location, cm.variance, mo.y1_mean};
  for (auto const* v : {&s.s_sup, &s.sx_sup, &s.st_sup})
    r.insert(r.end(), v->begin(), v->end());
  r.push_back(s.jacobian_inverse);
  return r;
}

std::string step_name(char const* prefix, std::size_t step, char const* ext)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%06zu.%s", prefix, step, ext);
  return buf;
}

//! Empirical density and flux of an agent ensemble on the x grid.
Moments agent_moments(AgentEnsemble const& ens, ModelConfig const& model, PeriodicGrid const& g)
{
  Moments mo;
  mo.n = empirical_density(ens, g);
  mo.j.assign(g.cells, 0.0);
  double const h = g.spacing();
  double y1 = 0.0;
  for (auto const& a : ens.agents)
  {
    auto bin = static_cast<std::size_t>(std::floor(g.wrap(a.x) / h));
    mo.j[std::min(bin, g.cells - 1)] += model.velocities.speeds[a.velocity] * ens.mass_per_agent / h;
    y1 += a.y[0];
  }
  mo.mass = static_cast<double>(ens.agents.size()) * ens.mass_per_agent;
  mo.y1_mean = ens.agents.empty() ? 0.0 : y1 / static_cast<double>(ens.agents.size());
  return mo;
}

std::vector<std::string> agent_columns(std::size_t m)
{
  std::vector<std::string> cols{"t", "agents", "mass", "n_L1", "n_L2", "peak_n", "peak_x", "var_n", "y1_mean"};
  for (std::size_t c = 0; c < m; ++c)
    cols.push_back("S_sup" + std::to_string(c));
  return cols;
}

std::vector<double> agent_row(double t, AgentEnsemble const& ens, Moments const& mo, SignalField const& s,
                              PeriodicGrid const& g)
{
  double const h = g.spacing();
  auto const cm = concentration_metrics(mo.n, g);
  std::vector<double> r{t, static_cast<double>(ens.agents.size()), mo.mass, norm_l1(mo.n, h), norm_l2(mo.n, h),
                        cm.peak, cm.peak_location, cm.variance, mo.y1_mean};
  for (std::size_t c = 0; c < s.components(); ++c)
    r.push_back(s.sup(c));
  return r;
}

void finish_agents(RunSummary& sum, AgentEnsemble const& ens)
{
  sum.agents_final = ens.agents.size();
  double mean = 0.0, worst = 0.0;
  for (auto const& a : ens.agents)
  {
    mean += a.y[0];
    worst = std::max(worst, std::abs(a.y[0]));
  }
  sum.agent_y1_mean = ens.agents.empty() ? 0.0 : mean / static_cast<double>(ens.agents.size());
  sum.agent_y1_max_abs = worst;
}

void accumulate(AgentStepStats& total, AgentStepStats const& s)
{
  total.candidates += s.candidates;
  total.accepted += s.accepted;
  total.growth_violations += s.growth_violations;
  total.box_exits += s.box_exits;
  total.max_ratio = std::max(total.max_ratio, s.max_ratio);
}

void write_trajectories(std::filesystem::path const& path, std::string const& hash,
                        std::vector<TrajectoryRecord> const& log)
{
  std::vector<std::vector<double>> rows;
  rows.reserve(log.size());
  for (auto const& r : log)
    rows.push_back({static_cast<double>(r.id), r.t, r.x, r.v, r.y[0], r.y[1], r.event ? 1.0 : 0.0});
  write_csv(path, hash, {"id", "t", "x", "v", "y1", "y2", "event"}, rows);
}

struct StepPlan {
  std::size_t steps = 0;
  double dt = 0.0;
};

StepPlan plan_steps(RunSettings const& run)
{
  StepPlan p;
  p.steps = run.horizon > 0.0 ? static_cast<std::size_t>(std::ceil(run.horizon / run.dt - 1e-9)) : 0;
  p.dt = p.steps > 0 ? run.horizon / static_cast<double>(p.steps) : run.dt;
  return p;
}

bool monitor_due(std::size_t step, std::size_t steps, RunSettings const& run)
{
  return step % run.monitor_every == 0 || step == steps;
}

bool snapshot_due(std::size_t step, std::size_t steps, RunSettings const& run)
{
  return step % run.snapshot_every == 0 || step == steps;
}

AgentStepOptions agent_options(ScenarioConfig const& cfg, std::vector<TrajectoryRecord>* log)
{
  AgentStepOptions o;
  o.rate_bound = cfg.validation.rate_sup;
  o.max_substep = 0.05;
  o.growth = cfg.validation.passed("rate_growth") ? &cfg.growth : nullptr;
  o.check_box = true;
  o.box = cfg.grid_box;
  o.log_agents = cfg.run.trajectory_dump;
  o.log = cfg.run.trajectory_dump > 0 ? log : nullptr;
  return o;
}

//! One-way agent run against a recorded kinetic history, compared with the
//! kinetic densities stored at the compare steps.
void run_compare(ScenarioConfig const& cfg, std::filesystem::path const& out, PhaseSpaceField const& f0,
                 SignalHistory const& history, StepPlan const& plan,
                 std::vector<std::pair<std::size_t, std::vector<double>>> const& kinetic_n,
                 RunSummary& sum)
{
  auto const& g = f0.grid.x;
  double const h = g.spacing();
  AgentEnsemble ens = sample_agents(f0, cfg.run.agents, cfg.run.seed);
  sum.agents_initial = ens.agents.size();
  std::vector<TrajectoryRecord> log;
  auto const opts = agent_options(cfg, &log);
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<double>> compare_rows;
  SignalField s = SignalField::zeros(g, cfg.model.signal_dim());
  auto sample_signal = [&](double t) {
    std::vector<double> v(s.components());
    for (std::size_t i = 0; i < g.cells; ++i)
    {
      history.evaluate(g.center(i), t, v);
      for (std::size_t c = 0; c < v.size(); ++c)
        s.value[c][i] = v[c];
    }
  };
  std::size_t next = 0;
  for (std::size_t step = 0;; ++step)
  {
    double const t = static_cast<double>(step) * plan.dt;
    if (monitor_due(step, plan.steps, cfg.run))
    {
      sample_signal(std::min(t, history.t_end()));
      rows.push_back(agent_row(t, ens, agent_moments(ens, cfg.model, g), s, g));
    }
    while (next < kinetic_n.size() && kinetic_n[next].first == step)
    {
      auto const na = empirical_density(ens, g);
      auto const& nk = kinetic_n[next].second;
      double const mass = pairwise_sum(nk) * h;
      double diff = 0.0;
      for (std::size_t i = 0; i < g.cells; ++i)
        diff += std::abs(nk[i] - na[i]);
      CompareRow row{t, diff * h / mass};
      sum.compare.push_back(row);
      compare_rows.push_back({row.t, row.l1});
      ++next;
    }
    if (step == plan.steps)
      break;
    accumulate(sum.agent_stats, step_agents(ens, history, plan.dt, cfg.model, opts));
  }
  finish_agents(sum, ens);
  write_csv(out / "agent_moments.csv", cfg.hash, agent_columns(cfg.model.signal_dim()), rows);
  write_csv(out / "compare.csv", cfg.hash, {"t", "l1_distance"}, compare_rows);
  if (cfg.run.trajectory_dump > 0)
    write_trajectories(out / "trajectories.csv", cfg.hash, log);
}

//! Agents alone, with the signal recomputed from the empirical density.
void run_agents(ScenarioConfig const& cfg, std::filesystem::path const& out, RunSummary& sum)
{
  auto const grid = make_grid(cfg);
  auto const& g = grid.x;
  SpectralOps const ops(g);
  AgentEnsemble ens = sample_agents(initial_field(cfg), cfg.run.agents, cfg.run.seed);
  sum.agents_initial = ens.agents.size();
  auto const plan = plan_steps(cfg.run);
  sum.steps = plan.steps;
  sum.dt = plan.dt;

  Moments mo = agent_moments(ens, cfg.model, g);
  SignalField s = initial_signal(cfg, mo, ops);
  if (!cfg.run.agent_feedback)
    sum.notes.emplace_back("agent_feedback = false: the initial signal is held fixed");
  SignalHistory history(g, cfg.model.signal_dim());
  history.append(s);
  sum.mass_initial = mo.mass;

  std::vector<TrajectoryRecord> log;
  auto const opts = agent_options(cfg, &log);
  std::vector<std::vector<double>> rows;
  for (std::size_t step = 0;; ++step)
  {
    double const t = static_cast<double>(step) * plan.dt;
    if (monitor_due(step, plan.steps, cfg.run))
      rows.push_back(agent_row(t, ens, mo, s, g));
    if (snapshot_due(step, plan.steps, cfg.run))
    {
      write_signal_csv(out / step_name("signal", step, "csv"), cfg.hash, s);
      ++sum.snapshots;
    }
    if (step == plan.steps)
      break;
    // Provisional frame: the signal is held over the step, then replaced.
    SignalField provisional = s;
    provisional.t = t + plan.dt;
    for (auto& d : provisional.dt)
      std::fill(d.begin(), d.end(), 0.0);
    history.append(provisional);
    accumulate(sum.agent_stats, step_agents(ens, history, plan.dt, cfg.model, opts));
    Moments const next = agent_moments(ens, cfg.model, g);
    if (cfg.run.agent_feedback)
    {
      if (cfg.signal_mode == SignalMode::elliptic)
      {
        s = solve_elliptic(next.n, cfg.model.signal, ops, next.j);
      }
      else
      {
        std::vector<double> mid(g.cells);
        for (std::size_t i = 0; i < g.cells; ++i)
          mid[i] = 0.5 * (mo.n[i] + next.n[i]);
        s = step_parabolic(s, mid, plan.dt, cfg.model.signal, ops);
      }
    }
    s.t = t + plan.dt;
    history.replace_last(s);
    mo = next;
  }
  sum.t_final = static_cast<double>(plan.steps) * plan.dt;
  sum.mass_final = mo.mass;
  sum.mass_drift = sum.mass_initial > 0.0 ? std::abs(sum.mass_final - sum.mass_initial) / sum.mass_initial : 0.0;
  sum.n_l1 = norm_l1(mo.n, g.spacing());
  sum.n_l2 = norm_l2(mo.n, g.spacing());
  sum.y1_mean = mo.y1_mean;
  sum.metrics = concentration_metrics(mo.n, g);
  finish_agents(sum, ens);
  write_csv(out / "agent_moments.csv", cfg.hash, agent_columns(cfg.model.signal_dim()), rows);
  if (cfg.run.trajectory_dump > 0)
    write_trajectories(out / "trajectories.csv", cfg.hash, log);
}

void run_kinetic(ScenarioConfig const& cfg, std::filesystem::path const& out, RunSummary& sum)
{
  auto f = initial_field(cfg);
  PhaseSpaceField const f0 = f;
  auto const& g = f.grid.x;
  double const h = g.spacing();
  SpectralOps const ops(g);
  Moments mo = density_and_flux(f);
  SignalField const s0 = initial_signal(cfg, mo, ops);
  std::unique_ptr<SignalCoupling> coupling;
  if (cfg.signal_mode == SignalMode::elliptic)
    coupling = std::make_unique<EllipticCoupling>(cfg.model.signal, g, mo.n, mo.j);
  else
    coupling = std::make_unique<ParabolicCoupling>(cfg.model.signal, g, s0, mo.n);

  KineticSolver const solver(cfg.model);
  auto const plan = plan_steps(cfg.run);
  sum.steps = plan.steps;
  sum.dt = plan.dt;
  sum.mass_initial = mo.mass;

  SignalHistory history(g, cfg.model.signal_dim());
  history.append(coupling->current());

  std::vector<std::size_t> compare_steps;
  if (cfg.mode == RunMode::compare)
  {
    auto times = cfg.run.compare_times;
    if (times.empty())
      times.push_back(cfg.run.horizon);
    for (double ct : times)
    {
      auto const k = static_cast<std::size_t>(std::llround(ct / plan.dt));
      if (k > plan.steps || std::abs(static_cast<double>(k) * plan.dt - ct) > 1e-9 * std::max(1.0, ct))
        throw ConfigError(ErrorCode::invalid_value, "run.compare_times",
                          "compare time " + format_double(ct) + " is not a step time within T");
      compare_steps.push_back(k);
    }
    std::sort(compare_steps.begin(), compare_steps.end());
  }
  std::vector<std::pair<std::size_t, std::vector<double>>> kinetic_n;

  std::vector<MonitorSample> samples;
  std::vector<std::vector<double>> rows;
  bool wrapped = false;
  for (std::size_t step = 0;; ++step)
  {
    double const t = f.t;
    for (std::size_t k : compare_steps)
    {
      if (k == step)
        kinetic_n.emplace_back(step, mo.n);
    }
    if (monitor_due(step, plan.steps, cfg.run))
    {
      samples.push_back(make_sample(t, mo, coupling->current(), h, measured_jacobian(cfg, history, t)));
      rows.push_back(moment_row(samples.back(), mo, g));
    }
    if (snapshot_due(step, plan.steps, cfg.run))
    {
      write_field_binary(out / step_name("field", step, "bin"), cfg.hash, f);
      write_signal_csv(out / step_name("signal", step, "csv"), cfg.hash, coupling->current());
      ++sum.snapshots;
    }
    if (step == plan.steps)
      break;

    SignalField const before = coupling->current();
    StepReport rep;
    try
    {
      rep = solver.step(f, *coupling, plan.dt);
    }
    catch (SupportOverflowError const& e)
    {
      throw SupportOverflowError(e.boundary() + " (scenario " + cfg.source_path + ", t = " + format_double(t) + ")",
                                 e.escaped(), e.total());
    }
    sum.clipped_mass += rep.clipped_mass;
    sum.min_before_clip = std::min(sum.min_before_clip, rep.min_before_clip);
    sum.escaped_mass += rep.escaped_mass;
    f.t = static_cast<double>(step + 1) * plan.dt;
    mo = density_and_flux(f);
    if (!wrapped && cfg.initial.x_shape != Shape::uniform)
    {
      double const peak = *std::max_element(mo.n.begin(), mo.n.end());
      if (*std::min_element(mo.n.begin(), mo.n.end()) > 1e-12 * peak)
      {
        wrapped = true;
        sum.notes.push_back("density support closed around the periodic domain at t = " + format_double(f.t));
      }
    }
    SignalField const& after = coupling->current();
    history.append(after);
    if (cfg.signal_mode == SignalMode::elliptic)
    {
      double gap = 0.0, scale = 0.0;
      for (std::size_t c = 0; c < after.components(); ++c)
      {
        for (std::size_t i = 0; i < g.cells; ++i)
        {
          double const fd = (after.value[c][i] - before.value[c][i]) / plan.dt;
          double const avg = 0.5 * (after.dt[c][i] + before.dt[c][i]);
          gap = std::max(gap, std::abs(fd - avg));
          scale = std::max(scale, std::abs(avg));
        }
      }
      if (scale > 1e-12)
        sum.dt_signal_mismatch = std::max(sum.dt_signal_mismatch, gap / scale);
    }
  }

  auto const k = envelope_constants(cfg, f.grid, s0);
  auto const ledger = check_a_priori_bounds(samples, k, cfg.growth);
  write_csv(out / "moments.csv", cfg.hash, moment_columns(cfg.model.signal_dim()), rows,
            {std::string("mode=") + to_string(cfg.mode), std::string("signal_mode=") + to_string(cfg.signal_mode)});
  write_ledger_csv(out / "ledger.csv", cfg.hash, ledger);
  sum.ledger_rows = ledger.rows.size();
  sum.violations = ledger.violations();
  sum.t_final = f.t;
  sum.mass_final = mo.mass;
  sum.mass_drift = sum.mass_initial > 0.0 ? std::abs(mo.mass - sum.mass_initial) / sum.mass_initial : 0.0;
  sum.f_l1 = mo.l1;
  sum.f_l2 = mo.l2;
  sum.n_l1 = norm_l1(mo.n, h);
  sum.n_l2 = norm_l2(mo.n, h);
  sum.y1_mean = mo.y1_mean;
  if (mo.mass > 0.0)
    sum.metrics = concentration_metrics(mo.n, g);

  if (cfg.mode == RunMode::compare)
    run_compare(cfg, out, f0, history, plan, kinetic_n, sum);
}

std::filesystem::path series_path(ScenarioConfig const& cfg)
{
  std::filesystem::path p = cfg.run.series;
  if (p.is_relative() && !cfg.source_path.empty() && cfg.source_path != "<string>")
    p = std::filesystem::path(cfg.source_path).parent_path() / p;
  return p;
}

}  // namespace

//---------------------------------------------------------------------------//
PhaseSpaceGrid make_grid(ScenarioConfig const& cfg)
{
  auto const& m = cfg.model;
  PhaseSpaceGrid g;
  g.x = {m.nx, m.length};
  g.v = m.velocities;
  auto const& b = cfg.grid_box;
  g.y1 = {b.lo[0], (b.hi[0] - b.lo[0]) / static_cast<double>(m.ny1), m.ny1};
  g.y2 = {b.lo[1], (b.hi[1] - b.lo[1]) / static_cast<double>(m.ny2), m.ny2};
  return g;
}

PhaseSpaceField initial_field(ScenarioConfig const& cfg)
{
  auto const grid = make_grid(cfg);
  auto const& in = cfg.initial;
  PhaseSpaceField f(grid);
  auto const px = x_profile(in, grid.x);
  auto const p1 = y_profile(in.y_shape, in.y_center[0], in.y_width[0], grid.y1);
  auto const p2 = y_profile(in.y_shape, in.y_center[1], in.y_width[1], grid.y2);
  std::size_t const nv = grid.v.size();
  std::vector<double> pv(nv, 1.0 / static_cast<double>(nv));
  if (!in.v_weights.empty())
  {
    double s = 0.0;
    for (double w : in.v_weights)
      s += w;
    for (std::size_t v = 0; v < nv; ++v)
      pv[v] = in.v_weights[v] / s;
  }
  for (std::size_t v = 0; v < nv; ++v)
  {
    for (std::size_t a = 0; a < grid.y1.cells; ++a)
    {
      for (std::size_t b = 0; b < grid.y2.cells; ++b)
      {
        double const c = in.mass * pv[v] / grid.v.weights[v] * p1[a] * p2[b];
        double* row = f.values.data() + grid.line(v, a, b);
        for (std::size_t i = 0; i < grid.x.cells; ++i)
          row[i] = c * px[i];
      }
    }
  }
  if (in.mass > 0.0)
  {
    double const measured = density_and_flux(f).mass;
    for (double& v : f.values)
      v *= in.mass / measured;
  }
  return f;
}

SignalField initial_signal(ScenarioConfig const& cfg, Moments const& m0, SpectralOps const& ops)
{
  auto const& system = cfg.model.signal;
  if (cfg.initial.s0_elliptic)
  {
    SignalField s = solve_elliptic(m0.n, system, ops, m0.j);
    if (cfg.signal_mode == SignalMode::parabolic)
    {
      // Equilibrium of the parabolic equation for n0.
      for (auto& d : s.dt)
        std::fill(d.begin(), d.end(), 0.0);
    }
    return s;
  }
  std::size_t const mc = system.components();
  SignalField s = SignalField::zeros(ops.grid(), mc);
  std::vector<double> sv(mc), r(mc);
  for (std::size_t i = 0; i < ops.grid().cells; ++i)
  {
    for (std::size_t c = 0; c < mc; ++c)
    {
      s.value[c][i] = cfg.initial.s0_value[c];
      sv[c] = s.value[c][i];
    }
    system.reaction.evaluate(system.params, sv, m0.n[i], r);
    for (std::size_t c = 0; c < mc; ++c)
      s.dt[c][i] = r[c];
  }
  return s;
}

EnvelopeConstants envelope_constants(ScenarioConfig const& cfg, PhaseSpaceGrid const& grid,
                                     SignalField const& s0)
{
  EnvelopeConstants k;
  k.mode = cfg.signal_mode;
  k.system = cfg.model.signal;
  k.grid = grid.x;
  k.max_speed = cfg.model.velocities.max_speed();
  k.velocity_measure = cfg.model.velocities.measure();
  k.y_area = grid.y1.spacing * static_cast<double>(grid.y1.cells) * grid.y2.spacing
             * static_cast<double>(grid.y2.cells);
  k.divergence_sup = std::abs(cartoon_divergence(cfg.model));
  k.generator_norm = cfg.model.kernel.generator_norm();
  k.rate_sup = cfg.validation.rate_sup;
  k.scale = cfg.run.envelope_scale;
  k.initial_signal = s0;
  return k;
}

std::vector<MonitorSample> samples_from_series(CsvTable const& table, std::size_t components)
{
  std::vector<MonitorSample> out;
  std::size_t const it = table.column("t"), i1 = table.column("f_L1"), i2 = table.column("f_L2"),
                    n1 = table.column("n_L1"), n2 = table.column("n_L2"), ij = table.column("jac_inv");
  std::vector<std::size_t> s, sx, st;
  for (std::size_t c = 0; c < components; ++c)
  {
    s.push_back(table.column("S_sup" + std::to_string(c)));
    sx.push_back(table.column("Sx_sup" + std::to_string(c)));
    st.push_back(table.column("St_sup" + std::to_string(c)));
  }
  for (auto const& r : table.rows)
  {
    MonitorSample m;
    m.t = r[it];
    m.f_l1 = r[i1];
    m.f_l2 = r[i2];
    m.n_l1 = r[n1];
    m.n_l2 = r[n2];
    m.jacobian_inverse = r[ij];
    for (std::size_t c = 0; c < components; ++c)
    {
      m.s_sup.push_back(r[s[c]]);
      m.sx_sup.push_back(r[sx[c]]);
      m.st_sup.push_back(r[st[c]]);
    }
    out.push_back(std::move(m));
  }
  return out;
}

BoundLedger ledger_from_series(ScenarioConfig const& cfg, CsvTable const& table)
{
  auto const f = initial_field(cfg);
  SpectralOps const ops(f.grid.x);
  auto const s0 = initial_signal(cfg, density_and_flux(f), ops);
  auto const samples = samples_from_series(table, cfg.model.signal_dim());
  return check_a_priori_bounds(samples, envelope_constants(cfg, f.grid, s0), cfg.growth);
}

RunSummary run_scenario(ScenarioConfig const& cfg, std::filesystem::path const& out_dir)
{
  auto const start = std::chrono::steady_clock::now();
  if (cfg.run.workers > 0)
    omp_set_num_threads(cfg.run.workers);
  std::filesystem::create_directories(out_dir);

  RunSummary sum;
  sum.mode = to_string(cfg.mode);
  sum.hash = cfg.hash;
  sum.regimes = cfg.validation.regimes();
  sum.notes = cfg.notes;
  switch (cfg.mode)
  {
    case RunMode::kinetic:
    case RunMode::compare: run_kinetic(cfg, out_dir, sum); break;
    case RunMode::agent: run_agents(cfg, out_dir, sum); break;
    case RunMode::monitor:
    {
      if (cfg.run.series.empty())
        throw ConfigError(ErrorCode::missing_field, "run.series", "monitor mode needs a recorded moments series");
      auto const table = read_csv(series_path(cfg));
      auto const ledger = ledger_from_series(cfg, table);
      write_ledger_csv(out_dir / "ledger.csv", cfg.hash, ledger);
      sum.ledger_rows = ledger.rows.size();
      sum.violations = ledger.violations();
      if (table.hash != cfg.hash)
        sum.notes.push_back("series config_hash " + table.hash + " differs from this config");
      if (!table.rows.empty())
        sum.t_final = table.rows.back()[table.column("t")];
      break;
    }
  }
  if (sum.agent_stats.growth_violations > 0)
    sum.notes.push_back("turning rate exceeded the declared growth bound at "
                        + std::to_string(sum.agent_stats.growth_violations) + " candidate events");
  if (sum.agent_stats.box_exits > 0)
    sum.notes.push_back("agents left the internal-state grid box " + std::to_string(sum.agent_stats.box_exits)
                        + " times");
  sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ofstream(out_dir / "summary.json") << summary_json(sum) << '\n';
  nlohmann::json timing{{"config_hash", cfg.hash}, {"wall_seconds", sum.wall_seconds},
                        {"workers", cfg.run.workers > 0 ? cfg.run.workers : omp_get_max_threads()}};
  std::ofstream(out_dir / "timing.json") << timing.dump(2) << '\n';
  return sum;
}

std::string summary_json(RunSummary const& s)
{
  nlohmann::json j;
  j["config_hash"] = s.hash;
  j["mode"] = s.mode;
  j["steps"] = s.steps;
  j["dt"] = s.dt;
  j["t_final"] = s.t_final;
  j["mass_initial"] = s.mass_initial;
  j["mass_final"] = s.mass_final;
  j["mass_drift"] = s.mass_drift;
  j["f_L1"] = s.f_l1;
  j["f_L2"] = s.f_l2;
  j["n_L1"] = s.n_l1;
  j["n_L2"] = s.n_l2;
  j["y1_mean"] = s.y1_mean;
  j["peak_n"] = s.metrics.peak;
  j["peak_x"] = s.metrics.peak_location;
  j["var_n"] = s.metrics.variance;
  j["ledger_rows"] = s.ledger_rows;
  j["violations"] = s.violations;
  j["snapshots"] = s.snapshots;
  j["clipped_mass"] = s.clipped_mass;
  j["min_before_clip"] = s.min_before_clip;
  j["escaped_mass"] = s.escaped_mass;
  j["dt_signal_mismatch"] = s.dt_signal_mismatch;
  nlohmann::json cmp = nlohmann::json::array();
  for (auto const& c : s.compare)
    cmp.push_back({{"t", c.t}, {"l1", c.l1}});
  j["compare"] = cmp;
  if (s.agents_initial > 0)
  {
    j["agents"] = {{"initial", s.agents_initial},
                   {"final", s.agents_final},
                   {"y1_mean", s.agent_y1_mean},
                   {"y1_max_abs", s.agent_y1_max_abs},
                   {"candidates", s.agent_stats.candidates},
                   {"accepted", s.agent_stats.accepted},
                   {"growth_violations", s.agent_stats.growth_violations},
                   {"box_exits", s.agent_stats.box_exits},
                   {"max_rate_ratio", s.agent_stats.max_ratio}};
  }
  j["regimes"] = s.regimes;
  j["notes"] = s.notes;
  return j.dump(2);
}

}  // namespace kchem
