#include "kchem/kinetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "kchem/error.hpp"
#include "kchem/reduce.hpp"
#include "kchem/remap.hpp"

namespace kchem {

//---------------------------------------------------------------------------//
Moments density_and_flux(PhaseSpaceField const& f)
{
  auto const& g = f.grid;
  std::size_t const nx = g.x.cells;
  std::size_t const nv = g.v.size();
  Moments mo;
  mo.n.assign(nx, 0.0);
  mo.j.assign(nx, 0.0);
  std::vector<double> y1_moment(nx, 0.0);
  double const hy = g.y1.spacing * g.y2.spacing;
  constexpr std::size_t block = 64;
  std::size_t const blocks = (nx + block - 1) / block;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(blocks); ++bi)
  {
    std::size_t const i0 = static_cast<std::size_t>(bi) * block;
    std::size_t const i1 = std::min(nx, i0 + block);
    for (std::size_t vi = 0; vi < nv; ++vi)
    {
      double const w = g.v.weights[vi] * hy;
      double const speed = g.v.speeds[vi];
      for (std::size_t a = 0; a < g.y1.cells; ++a)
      {
        double const y1 = g.y1.center(a);
        for (std::size_t b = 0; b < g.y2.cells; ++b)
        {
          double const* row = f.values.data() + g.line(vi, a, b);
          for (std::size_t i = i0; i < i1; ++i)
          {
            double const m = row[i] * w;
            mo.n[i] += m;
            mo.j[i] += speed * m;
            y1_moment[i] += y1 * m;
          }
        }
      }
    }
  }
  double const hx = g.x.spacing();
  mo.mass = pairwise_sum(mo.n) * hx;
  mo.y1_mean = mo.mass > 0.0 ? pairwise_sum(y1_moment) * hx / mo.mass : 0.0;
  mo.l1 = lp_norm(f, Norm::l1);
  mo.l2 = lp_norm(f, Norm::l2);
  mo.linf = lp_norm(f, Norm::linf);
  return mo;
}

double lp_norm(PhaseSpaceField const& f, Norm p)
{
  auto const& g = f.grid;
  std::size_t const per_v = g.x.cells * g.y1.cells * g.y2.cells;
  if (p == Norm::linf)
  {
    double m = 0.0;
    for (double v : f.values)
      m = std::max(m, std::abs(v));
    return m;
  }
  std::vector<double> vol(g.v.size());
  for (std::size_t vi = 0; vi < vol.size(); ++vi)
    vol[vi] = g.volume(vi);
  double const* data = f.values.data();
  if (p == Norm::l1)
    return reproducible_sum(f.values.size(), [&](std::size_t k) { return std::abs(data[k]) * vol[k / per_v]; });
  return std::sqrt(
      reproducible_sum(f.values.size(), [&](std::size_t k) { return data[k] * data[k] * vol[k / per_v]; }));
}

//---------------------------------------------------------------------------//
EllipticCoupling::EllipticCoupling(SignalSystem system, PeriodicGrid grid, std::span<const double> n0,
                                   std::span<const double> j0, double t0)
    : system_(std::move(system)), ops_(grid)
{
  current_ = solve_elliptic(n0, system_, ops_, j0);
  current_.t = t0;
}

SignalField const& EllipticCoupling::half_step(double t, double dt, std::span<const double> n_half)
{
  half_ = solve_elliptic(n_half, system_, ops_);
  half_.t = t + 0.5 * dt;
  return half_;
}

void EllipticCoupling::end_step(double t_end, std::span<const double> n_end, std::span<const double> j_end)
{
  current_ = solve_elliptic(n_end, system_, ops_, j_end);
  current_.t = t_end;
}

ParabolicCoupling::ParabolicCoupling(SignalSystem system, PeriodicGrid grid, SignalField s0,
                                     std::span<const double> n0)
    : system_(std::move(system)), ops_(grid), current_(std::move(s0)), last_n_(n0.begin(), n0.end())
{
}

SignalField const& ParabolicCoupling::half_step(double t, double dt, std::span<const double> n_half)
{
  dt_ = dt;
  half_n_.assign(n_half.begin(), n_half.end());
  std::vector<double> mid(n_half.size());
  for (std::size_t i = 0; i < mid.size(); ++i)
    mid[i] = 0.5 * (last_n_[i] + n_half[i]);
  half_ = step_parabolic(current_, mid, 0.5 * dt, system_, ops_);
  half_.t = t + 0.5 * dt;
  return half_;
}

void ParabolicCoupling::end_step(double t_end, std::span<const double> n_end, std::span<const double>)
{
  std::vector<double> mid(n_end.size());
  for (std::size_t i = 0; i < mid.size(); ++i)
    mid[i] = 0.5 * (half_n_[i] + n_end[i]);
  current_ = step_parabolic(half_, mid, 0.5 * dt_, system_, ops_);
  current_.t = t_end;
  last_n_.assign(n_end.begin(), n_end.end());
}

PrescribedCoupling::PrescribedCoupling(SignalHistory const& history, PeriodicGrid grid, double t0)
    : history_(&history), grid_(grid)
{
  current_ = sample(t0);
}

SignalField PrescribedCoupling::sample(double t) const
{
  std::size_t const m = history_->components();
  SignalField s = SignalField::zeros(grid_, m);
  s.t = t;
  std::vector<double> v(m), vx(m), vt(m);
  for (std::size_t i = 0; i < grid_.cells; ++i)
  {
    history_->evaluate(grid_.center(i), t, v, vx, vt);
    for (std::size_t c = 0; c < m; ++c)
    {
      s.value[c][i] = v[c];
      s.dx[c][i] = vx[c];
      s.dt[c][i] = vt[c];
    }
  }
  return s;
}

SignalField const& PrescribedCoupling::half_step(double t, double dt, std::span<const double>)
{
  half_ = sample(t + 0.5 * dt);
  return half_;
}

void PrescribedCoupling::end_step(double t_end, std::span<const double>, std::span<const double>)
{
  current_ = sample(t_end);
}

//---------------------------------------------------------------------------//
KineticSolver::KineticSolver(ModelConfig cfg) : cfg_(std::move(cfg))
{
  if (cfg_.kernel.size() != cfg_.velocities.size())
    cfg_.kernel = TurningKernel::build(cfg_.kernel_spec, cfg_.velocities);
  generator_ = cfg_.kernel.generator();
}

std::vector<double> KineticSolver::turning_propagator(double rate, double dt) const
{
  std::size_t const nv = cfg_.kernel.size();
  double const scale = rate * dt;
  if (nv == 2)
  {
    // exp(A) = e^s [cosh q I + sinh(q)/q (A - s I)], q^2 = s^2 - det A.
    double const a = scale * generator_[0], b = scale * generator_[1];
    double const c = scale * generator_[2], d = scale * generator_[3];
    double const s = 0.5 * (a + d);
    double const q2 = 0.25 * (a - d) * (a - d) + b * c;
    double ch, sh;
    if (q2 >= 0.0)
    {
      double const q = std::sqrt(q2);
      double const ep = std::exp(s + q), em = std::exp(s - q);
      ch = 0.5 * (ep + em);
      sh = q > 1e-8 ? 0.5 * (ep - em) / q : std::exp(s) * (1.0 + q2 / 6.0);
    }
    else
    {
      double const q = std::sqrt(-q2);
      ch = std::exp(s) * std::cos(q);
      sh = std::exp(s) * std::sin(q) / q;
    }
    return {ch + sh * (a - s), sh * b, sh * c, ch + sh * (d - s)};
  }
  Eigen::MatrixXd m(nv, nv);
  for (std::size_t i = 0; i < nv; ++i)
  {
    for (std::size_t j = 0; j < nv; ++j)
      m(i, j) = scale * generator_[i * nv + j];
  }
  Eigen::MatrixXd const e = m.exp();
  std::vector<double> out(nv * nv);
  for (std::size_t i = 0; i < nv; ++i)
  {
    for (std::size_t j = 0; j < nv; ++j)
      out[i * nv + j] = e(i, j);
  }
  return out;
}

void KineticSolver::advect_x(PhaseSpaceField& f, double dt) const
{
  auto const& g = f.grid;
  std::size_t const nx = g.x.cells;
  std::size_t const lines = g.v.size() * g.y1.cells * g.y2.cells;
  std::size_t const per_v = g.y1.cells * g.y2.cells;
  double const hx = g.x.spacing();
#pragma omp parallel
  {
    std::vector<double> tmp(nx);
#pragma omp for schedule(static)
    for (std::ptrdiff_t l = 0; l < static_cast<std::ptrdiff_t>(lines); ++l)
    {
      std::size_t const vi = static_cast<std::size_t>(l) / per_v;
      double* row = f.values.data() + static_cast<std::size_t>(l) * nx;
      bool any = false;
      for (std::size_t i = 0; i < nx && !any; ++i)
        any = row[i] != 0.0;
      if (!any)
        continue;
      std::copy(row, row + nx, tmp.begin());
      shift_periodic(tmp, g.v.speeds[vi] * dt / hx, std::span<double>(row, nx));
    }
  }
}

double KineticSolver::advect_y(PhaseSpaceField& f, std::span<const double> gain, double dt) const
{
  auto const& g = f.grid;
  std::size_t const nx = g.x.cells, nv = g.v.size();
  std::size_t const n1 = g.y1.cells, n2 = g.y2.cells;
  if (gain.size() != nx)
    throw ArgumentError("gain must be given per x cell");
  CartoonStep const step = CartoonStep::make(cfg_, dt);
  std::size_t const slabs = nx * nv;
  // Escaped mass per slab: y1 low, y1 high, y2 low, y2 high; then slab total.
  std::vector<std::array<double, 5>> escape(slabs);

#pragma omp parallel
  {
    std::vector<double> slab(n1 * n2), line(std::max(n1, n2)), out(std::max(n1, n2)),
        scratch(std::max(n1, n2) + 1);
#pragma omp for schedule(static)
    for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(slabs); ++s)
    {
      std::size_t const i = static_cast<std::size_t>(s) % nx;
      std::size_t const vi = static_cast<std::size_t>(s) / nx;
      auto& esc = escape[static_cast<std::size_t>(s)];
      esc = {0.0, 0.0, 0.0, 0.0, 0.0};
      double total = 0.0;
      for (std::size_t a = 0; a < n1; ++a)
      {
        for (std::size_t b = 0; b < n2; ++b)
        {
          double const v = f.values[g.index(i, vi, a, b)];
          slab[a * n2 + b] = v;
          total += v;
        }
      }
      esc[4] = total;
      if (total == 0.0)
        continue;
      double const gi = gain[i];
      // y1' = e y1 - c (y2 - g) on each y2 row.
      for (std::size_t b = 0; b < n2; ++b)
      {
        bool any = false;
        for (std::size_t a = 0; a < n1; ++a)
        {
          line[a] = slab[a * n2 + b];
          any = any || line[a] != 0.0;
        }
        if (!any)
          continue;
        double const y2 = g.y2.center(b);
        double const off = (step.decay_e * g.y1.lower - step.coupling * (y2 - gi) - g.y1.lower) / g.y1.spacing;
        auto const loss = remap_affine(std::span<const double>(line.data(), n1), step.decay_e, off,
                                       std::span<double>(out.data(), n1), scratch);
        esc[0] += loss.low;
        esc[1] += loss.high;
        for (std::size_t a = 0; a < n1; ++a)
          slab[a * n2 + b] = out[a];
      }
      // y2' = a y2 + (1 - a) g on each y1 column.
      double const off2
          = (step.decay_a * g.y2.lower + (1.0 - step.decay_a) * gi - g.y2.lower) / g.y2.spacing;
      for (std::size_t a = 0; a < n1; ++a)
      {
        std::span<const double> row(slab.data() + a * n2, n2);
        bool any = false;
        for (double v : row)
          any = any || v != 0.0;
        if (!any)
          continue;
        auto const loss = remap_affine(row, step.decay_a, off2, std::span<double>(out.data(), n2), scratch);
        esc[2] += loss.low;
        esc[3] += loss.high;
        std::copy(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n2), slab.begin() + static_cast<std::ptrdiff_t>(a * n2));
      }
      for (std::size_t a = 0; a < n1; ++a)
      {
        for (std::size_t b = 0; b < n2; ++b)
          f.values[g.index(i, vi, a, b)] = slab[a * n2 + b];
      }
    }
  }

  std::array<std::vector<double>, 5> cols;
  for (auto& c : cols)
    c.resize(slabs);
  for (std::size_t s = 0; s < slabs; ++s)
  {
    for (std::size_t k = 0; k < 5; ++k)
      cols[k][s] = escape[s][k];
  }
  double const total = pairwise_sum(cols[4]);
  static constexpr char const* names[4] = {"y1 lower", "y1 upper", "y2 lower", "y2 upper"};
  double escaped = 0.0;
  for (std::size_t k = 0; k < 4; ++k)
  {
    double const e = pairwise_sum(cols[k]);
    escaped += e;
    if (e > 1e-12 * total)
      throw SupportOverflowError(names[k], e, total);
  }
  return escaped;
}

void KineticSolver::turn(PhaseSpaceField& f, double dt) const
{
  auto const& g = f.grid;
  std::size_t const nx = g.x.cells, nv = g.v.size();
  std::size_t const n1 = g.y1.cells, n2 = g.y2.cells;
  std::vector<std::vector<double>> prop(n1);
  for (std::size_t a = 0; a < n1; ++a)
    prop[a] = turning_propagator(cfg_.lambda(g.y1.center(a)), dt);
#pragma omp parallel
  {
    std::vector<double> in(nv);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ab = 0; ab < static_cast<std::ptrdiff_t>(n1 * n2); ++ab)
    {
      std::size_t const a = static_cast<std::size_t>(ab) / n2;
      std::size_t const b = static_cast<std::size_t>(ab) % n2;
      auto const& p = prop[a];
      for (std::size_t i = 0; i < nx; ++i)
      {
        bool any = false;
        for (std::size_t vi = 0; vi < nv; ++vi)
        {
          in[vi] = f.values[g.index(i, vi, a, b)];
          any = any || in[vi] != 0.0;
        }
        if (!any)
          continue;
        for (std::size_t r = 0; r < nv; ++r)
        {
          double acc = 0.0;
          for (std::size_t c = 0; c < nv; ++c)
            acc += p[r * nv + c] * in[c];
          f.values[g.index(i, r, a, b)] = acc;
        }
      }
    }
  }
}

StepReport KineticSolver::step(PhaseSpaceField& f, SignalCoupling& coupling, double dt) const
{
  if (!(dt > 0.0))
    throw ArgumentError("kinetic step needs dt > 0");
  if (dt > 0.25 * std::min(cfg_.t_e, cfg_.t_a) * (1.0 + 1e-12))
    throw ArgumentError("kinetic step exceeds min(t_e, t_a)/4");

  StepReport report;
  double const t = f.t;
  advect_x(f, 0.5 * dt);
  Moments const half = density_and_flux(f);
  SignalField const& s = coupling.half_step(t, dt, half.n);
  std::size_t const nx = f.grid.x.cells;
  std::vector<double> gain(nx);
  std::vector<double> sv(s.components());
  for (std::size_t i = 0; i < nx; ++i)
  {
    for (std::size_t c = 0; c < sv.size(); ++c)
      sv[c] = s.value[c][i];
    gain[i] = cfg_.g(sv);
  }
  report.escaped_mass += advect_y(f, gain, 0.5 * dt);
  turn(f, dt);
  report.escaped_mass += advect_y(f, gain, 0.5 * dt);
  advect_x(f, 0.5 * dt);

  double mn = 0.0;
  std::vector<double> clipped(nx, 0.0);
  for (std::size_t k = 0; k < f.values.size(); ++k)
  {
    if (f.values[k] < 0.0)
    {
      mn = std::min(mn, f.values[k]);
      clipped[k % nx] += -f.values[k] * f.grid.volume(k / (f.values.size() / f.grid.v.size()));
      f.values[k] = 0.0;
    }
  }
  report.min_before_clip = mn;
  report.clipped_mass = pairwise_sum(clipped);
  f.t = t + dt;
  Moments const end = density_and_flux(f);
  coupling.end_step(f.t, end.n, end.j);
  return report;
}

PhaseSpaceField step_kinetic(PhaseSpaceField const& f, SignalHistory const& history, double dt,
                             ModelConfig const& cfg)
{
  KineticSolver const solver(cfg);
  PrescribedCoupling coupling(history, f.grid.x, f.t);
  PhaseSpaceField out = f;
  solver.step(out, coupling, dt);
  return out;
}

}  // namespace kchem
