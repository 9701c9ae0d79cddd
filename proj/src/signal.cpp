#include "kchem/signal.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>
#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "kchem/error.hpp"

namespace kchem {

namespace {

using cplx = std::complex<double>;

std::mutex& planner_mutex()
{
  static std::mutex m;
  return m;
}

}  // namespace

struct SpectralOps::Impl {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

SpectralOps::SpectralOps(PeriodicGrid grid) : grid_(grid), impl_(std::make_unique<Impl>())
{
  if (grid.cells == 0 || !(grid.length > 0.0))
    throw ArgumentError("spectral grid needs at least one cell and positive length");
  int const n = static_cast<int>(grid.cells);
  std::vector<double> re(grid.cells);
  std::vector<cplx> im(modes());
  std::lock_guard<std::mutex> lock(planner_mutex());
  // Unaligned plans may be executed on any caller-owned buffers.
  unsigned const flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  impl_->r2c = fftw_plan_dft_r2c_1d(n, re.data(), reinterpret_cast<fftw_complex*>(im.data()), flags);
  impl_->c2r = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(im.data()), re.data(),
                                    flags | FFTW_DESTROY_INPUT);
}

SpectralOps::~SpectralOps()
{
  if (!impl_)
    return;
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(impl_->r2c);
  fftw_destroy_plan(impl_->c2r);
}

SpectralOps::SpectralOps(SpectralOps&&) noexcept = default;
SpectralOps& SpectralOps::operator=(SpectralOps&&) noexcept = default;

void SpectralOps::forward(std::span<const double> in, std::span<cplx> out) const
{
  if (in.size() != grid_.cells || out.size() != modes())
    throw ArgumentError("spectral forward: size mismatch");
  std::vector<double> buf(in.begin(), in.end());
  fftw_execute_dft_r2c(impl_->r2c, buf.data(), reinterpret_cast<fftw_complex*>(out.data()));
  double const h = grid_.spacing();
  for (auto& c : out)
    c *= h;
}

void SpectralOps::inverse(std::span<const cplx> in, std::span<double> out) const
{
  if (out.size() != grid_.cells || in.size() != modes())
    throw ArgumentError("spectral inverse: size mismatch");
  std::vector<cplx> buf(in.begin(), in.end());
  fftw_execute_dft_c2r(impl_->c2r, reinterpret_cast<fftw_complex*>(buf.data()), out.data());
  double const scale = 1.0 / grid_.length;
  for (auto& v : out)
    v *= scale;
}

void SpectralOps::derivative(std::span<const double> in, std::span<double> out) const
{
  std::vector<cplx> hat(modes());
  forward(in, hat);
  for (std::size_t m = 0; m < hat.size(); ++m)
    hat[m] = nyquist(m) ? cplx{} : cplx{0.0, wavenumber(m)} * hat[m];
  inverse(hat, out);
}

//---------------------------------------------------------------------------//
SignalField SignalField::zeros(PeriodicGrid grid, std::size_t components)
{
  SignalField s;
  s.grid = grid;
  s.value.assign(components, std::vector<double>(grid.cells, 0.0));
  s.dx = s.value;
  s.dt = s.value;
  return s;
}

namespace {

double abs_max(std::vector<double> const& v)
{
  double m = 0.0;
  for (double x : v)
    m = std::max(m, std::abs(x));
  return m;
}

//! Per-mode complex spectra of each component, [component][mode].
using Spectra = std::vector<std::vector<cplx>>;

void check_density(std::span<const double> n, PeriodicGrid const& grid)
{
  if (grid.cells == 0)
    throw ArgumentError("signal grid has zero cells");
  if (n.size() != grid.cells)
    throw ArgumentError("density size does not match the signal grid");
  for (double v : n)
  {
    if (!std::isfinite(v))
      throw ArgumentError("density is not finite");
  }
}

//! Fill value/dx from spectra, and dt from a second set of spectra.
void synthesize(SpectralOps const& ops, Spectra const& s_hat, Spectra const* st_hat, SignalField& out)
{
  std::size_t const m_count = s_hat.size();
  std::vector<cplx> tmp(ops.modes());
  for (std::size_t c = 0; c < m_count; ++c)
  {
    ops.inverse(s_hat[c], out.value[c]);
    for (std::size_t m = 0; m < tmp.size(); ++m)
      tmp[m] = ops.nyquist(m) ? cplx{} : cplx{0.0, ops.wavenumber(m)} * s_hat[c][m];
    ops.inverse(tmp, out.dx[c]);
    if (st_hat != nullptr)
      ops.inverse((*st_hat)[c], out.dt[c]);
  }
}

bool coupled(SignalSystem const& system)
{
  return system.reaction.kind == ReactionKind::produce_degrade && !system.reaction.coupling.empty();
}

Eigen::MatrixXd mode_matrix(SignalSystem const& system, double xi)
{
  std::size_t const m = system.components();
  Eigen::MatrixXd a(m, m);
  for (std::size_t i = 0; i < m; ++i)
  {
    for (std::size_t j = 0; j < m; ++j)
      a(i, j) = system.reaction.coupling[i * m + j] + (i == j ? system.params[i].d * xi * xi : 0.0);
  }
  return a;
}

//! Solve (D xi^2 + K) s = k r for every mode.
Spectra elliptic_spectra(std::vector<cplx> const& r_hat, SignalSystem const& system,
                         SpectralOps const& ops)
{
  std::size_t const mc = system.components();
  Spectra out(mc, std::vector<cplx>(ops.modes()));
  if (!coupled(system))
  {
    for (std::size_t c = 0; c < mc; ++c)
    {
      auto const& p = system.params[c];
      for (std::size_t m = 0; m < ops.modes(); ++m)
      {
        double const xi = ops.wavenumber(m);
        out[c][m] = p.k * r_hat[m] / (p.d * xi * xi + p.k0);
      }
    }
    return out;
  }
  Eigen::VectorXd k(mc);
  for (std::size_t c = 0; c < mc; ++c)
    k(c) = system.params[c].k;
  for (std::size_t m = 0; m < ops.modes(); ++m)
  {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(mode_matrix(system, ops.wavenumber(m)));
    Eigen::VectorXd const re = lu.solve(k * r_hat[m].real());
    Eigen::VectorXd const im = lu.solve(k * r_hat[m].imag());
    for (std::size_t c = 0; c < mc; ++c)
      out[c][m] = {re(c), im(c)};
  }
  return out;
}

}  // namespace

double SignalField::sup(std::size_t c) const { return abs_max(value.at(c)); }
double SignalField::dx_sup(std::size_t c) const { return abs_max(dx.at(c)); }
double SignalField::dt_sup(std::size_t c) const { return abs_max(dt.at(c)); }

//---------------------------------------------------------------------------//
SignalField solve_elliptic(std::span<const double> n, SignalSystem const& system,
                           SpectralOps const& ops, std::span<const double> flux)
{
  auto const& grid = ops.grid();
  check_density(n, grid);
  if (system.reaction.kind != ReactionKind::produce_degrade)
    throw ArgumentError("elliptic signal requires the produce/degrade reaction");
  if (!flux.empty() && flux.size() != grid.cells)
    throw ArgumentError("flux size does not match the signal grid");

  std::vector<cplx> n_hat(ops.modes());
  ops.forward(n, n_hat);
  Spectra const s_hat = elliptic_spectra(n_hat, system, ops);

  SignalField out = SignalField::zeros(grid, system.components());
  if (flux.empty())
  {
    synthesize(ops, s_hat, nullptr, out);
    return out;
  }
  // n_t = -j_x, so the time derivative solves the same system with -j_x.
  std::vector<cplx> j_hat(ops.modes());
  ops.forward(flux, j_hat);
  for (std::size_t m = 0; m < j_hat.size(); ++m)
    j_hat[m] = ops.nyquist(m) ? cplx{} : -cplx{0.0, ops.wavenumber(m)} * j_hat[m];
  Spectra const st_hat = elliptic_spectra(j_hat, system, ops);
  synthesize(ops, s_hat, &st_hat, out);
  return out;
}

SignalField solve_elliptic(std::span<const double> n, SignalSystem const& system, PeriodicGrid grid)
{
  SpectralOps const ops(grid);
  return solve_elliptic(n, system, ops);
}

//---------------------------------------------------------------------------//
SignalField step_parabolic(SignalField const& s, std::span<const double> n, double dt,
                           SignalSystem const& system, SpectralOps const& ops)
{
  auto const& grid = ops.grid();
  check_density(n, grid);
  if (!(dt > 0.0))
    throw ArgumentError("parabolic step needs dt > 0");
  std::size_t const mc = system.components();
  if (s.components() != mc)
    throw ArgumentError("signal component count does not match the system");

  SignalField out = SignalField::zeros(grid, mc);
  out.t = s.t + dt;
  std::size_t const modes = ops.modes();

  if (system.reaction.kind == ReactionKind::consume)
  {
    std::vector<cplx> hat(modes);
    for (std::size_t c = 0; c < mc; ++c)
    {
      auto const& p = system.params[c];
      std::vector<double> v = s.value[c];
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] *= std::exp(-0.5 * dt * p.k * n[i]);
      ops.forward(v, hat);
      for (std::size_t m = 0; m < modes; ++m)
      {
        double const xi = ops.wavenumber(m);
        hat[m] *= std::exp(-p.d * xi * xi * dt);
      }
      ops.inverse(hat, v);
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] *= std::exp(-0.5 * dt * p.k * n[i]);
      out.value[c] = v;
      ops.derivative(v, out.dx[c]);
      // S_t = d S'' - k n S
      ops.forward(v, hat);
      for (std::size_t m = 0; m < modes; ++m)
      {
        double const xi = ops.wavenumber(m);
        hat[m] *= -p.d * xi * xi;
      }
      ops.inverse(hat, out.dt[c]);
      for (std::size_t i = 0; i < v.size(); ++i)
        out.dt[c][i] -= p.k * n[i] * v[i];
    }
    return out;
  }

  std::vector<cplx> n_hat(modes);
  ops.forward(n, n_hat);
  Spectra s_hat(mc, std::vector<cplx>(modes));
  for (std::size_t c = 0; c < mc; ++c)
    ops.forward(s.value[c], s_hat[c]);

  Spectra next(mc, std::vector<cplx>(modes));
  Spectra rate(mc, std::vector<cplx>(modes));
  if (!coupled(system))
  {
    for (std::size_t c = 0; c < mc; ++c)
    {
      auto const& p = system.params[c];
      for (std::size_t m = 0; m < modes; ++m)
      {
        double const xi = ops.wavenumber(m);
        double const mu = p.d * xi * xi + p.k0;
        double const decay = std::exp(-mu * dt);
        double const gain = -std::expm1(-mu * dt) / mu;
        next[c][m] = decay * s_hat[c][m] + gain * p.k * n_hat[m];
        rate[c][m] = -mu * next[c][m] + p.k * n_hat[m];
      }
    }
  }
  else
  {
    Eigen::VectorXd k(mc);
    for (std::size_t c = 0; c < mc; ++c)
      k(c) = system.params[c].k;
    for (std::size_t m = 0; m < modes; ++m)
    {
      Eigen::MatrixXd const a = mode_matrix(system, ops.wavenumber(m));
      Eigen::MatrixXd const e = (-a * dt).exp();
      Eigen::MatrixXd const id = Eigen::MatrixXd::Identity(mc, mc);
      Eigen::MatrixXd const g = a.partialPivLu().solve(id - e);
      Eigen::VectorXcd s0(mc);
      for (std::size_t c = 0; c < mc; ++c)
        s0(c) = s_hat[c][m];
      Eigen::VectorXcd const src = k.cast<cplx>() * n_hat[m];
      Eigen::VectorXcd const s1 = e.cast<cplx>() * s0 + g.cast<cplx>() * src;
      Eigen::VectorXcd const r1 = -a.cast<cplx>() * s1 + src;
      for (std::size_t c = 0; c < mc; ++c)
      {
        next[c][m] = s1(c);
        rate[c][m] = r1(c);
      }
    }
  }
  synthesize(ops, next, &rate, out);
  return out;
}

//---------------------------------------------------------------------------//
double BoundReport::value_sum() const
{
  double s = 0.0;
  for (auto const& c : components)
    s += c.value;
  return s;
}

namespace {

constexpr char const* kConvention
    = "hat h(xi) = int h(x) exp(-i xi x) dx; h(x) = (1/L) sum_m hat h(xi_m) exp(i xi_m x), "
      "xi_m = 2 pi m / L";

//! Gradient-type bound (k/d)/(2 pi) [n1 (ln(R^2/kappa^2 + 1) + Delta/kappa) + 2 sqrt(2 pi)].
void gradient_terms(double n1, double n2, double kappa, double delta, ComponentBounds& b)
{
  b.split = std::max(n2 * n2, delta);
  b.i1 = n1 * std::log1p(b.split * b.split / (kappa * kappa));
  b.i1_periodic = n1 * delta / kappa;
  b.i2 = std::numbers::sqrt2;
  b.i2_factor = 2.0 * std::sqrt(std::numbers::pi);
}

double gradient_bound(double k, double d, ComponentBounds const& b)
{
  return k / d / (2.0 * std::numbers::pi) * (b.i1 + b.i1_periodic + b.i2_factor * b.i2);
}

}  // namespace

BoundReport signal_bound_report(double n_l1, double n_l2, SignalSystem const& system,
                                PeriodicGrid grid, double max_speed)
{
  if (!(n_l1 >= 0.0) || !(n_l2 >= 0.0))
    throw ArgumentError("norms must be nonnegative");
  BoundReport report;
  report.convention = kConvention;
  double const delta = 2.0 * std::numbers::pi / grid.length;
  for (auto const& p : system.params)
  {
    double const kappa = std::sqrt(p.k0 / p.d);
    ComponentBounds b;
    b.value = p.k * n_l1 / (2.0 * std::sqrt(p.d * p.k0)) / std::tanh(0.5 * kappa * grid.length);
    gradient_terms(n_l1, n_l2, kappa, delta, b);
    b.gradient = gradient_bound(p.k, p.d, b);
    ComponentBounds bt;
    gradient_terms(max_speed * n_l1, max_speed * n_l2, kappa, delta, bt);
    b.time_derivative = gradient_bound(p.k, p.d, bt);
    if (n_l1 == 0.0)
    {
      b.gradient = 0.0;
      b.time_derivative = 0.0;
    }
    report.components.push_back(b);
  }
  return report;
}

BoundReport signal_bound_report_parabolic(double n_l1, SignalField const& initial, double t,
                                          SignalSystem const& system, SpectralOps const& ops)
{
  if (!(n_l1 >= 0.0) || !(t >= 0.0))
    throw ArgumentError("norm and time must be nonnegative");
  BoundReport report;
  report.convention = kConvention;
  report.parabolic = true;
  report.t = t;
  double const inv_l = 1.0 / ops.grid().length;
  std::vector<cplx> hat(ops.modes());
  for (std::size_t c = 0; c < system.components(); ++c)
  {
    auto const& p = system.params[c];
    ops.forward(initial.value.at(c), hat);
    ComponentBounds b;
    for (std::size_t m = 0; m < ops.modes(); ++m)
    {
      double const mult = (m == 0 || ops.nyquist(m)) ? 1.0 : 2.0;
      double const xi = ops.wavenumber(m);
      double const mu = p.d * xi * xi + p.k0;
      double const decay = std::exp(-mu * t);
      double const acc = -std::expm1(-mu * t) / mu;
      double const a0 = std::abs(hat[m]);
      b.value += mult * inv_l * (a0 * decay + p.k * n_l1 * acc);
      if (!ops.nyquist(m))
        b.gradient += mult * inv_l * xi * (a0 * decay + p.k * n_l1 * acc);
      b.time_derivative += mult * inv_l * (mu * a0 * decay + p.k * n_l1 * (1.0 + mu * acc));
    }
    report.components.push_back(b);
  }
  return report;
}

}  // namespace kchem
