#include "kchem/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "kchem/error.hpp"

namespace kchem {

namespace {

// Four-point Gauss-Legendre rule on [0, 1].
constexpr std::array<double, 4> kGaussNode{0.0694318442029737, 0.3300094782075719,
                                           0.6699905217924281, 0.9305681557970263};
constexpr std::array<double, 4> kGaussWeight{0.1739274225687269, 0.3260725774312731,
                                             0.3260725774312731, 0.1739274225687269};

constexpr std::size_t kMaxSignals = 16;

//! Cubic Lagrange weights for nodes -1, 0, 1, 2 at theta in [0, 1).
std::array<double, 4> cubic_weights(double th)
{
  return {-th * (th - 1.0) * (th - 2.0) / 6.0, (th + 1.0) * (th - 1.0) * (th - 2.0) / 2.0,
          -(th + 1.0) * th * (th - 2.0) / 2.0, (th + 1.0) * th * (th - 1.0) / 6.0};
}

}  // namespace

//---------------------------------------------------------------------------//
SignalHistory::SignalHistory(PeriodicGrid grid, std::size_t components) : grid_(grid), m_(components)
{
  if (components > kMaxSignals)
    throw ArgumentError("too many signal components");
}

SignalHistory SignalHistory::uniform(std::vector<double> value)
{
  SignalHistory h;
  h.m_ = value.size();
  h.uniform_ = true;
  h.uniform_value_ = std::move(value);
  return h;
}

void SignalHistory::append(SignalField const& field)
{
  if (uniform_)
    throw ArgumentError("cannot append to a uniform signal history");
  if (field.components() != m_ || field.grid.cells != grid_.cells)
    throw ArgumentError("snapshot does not match the history layout");
  if (!times_.empty() && !(field.t > times_.back()))
    throw ArgumentError("snapshot times must increase");
  std::size_t const n = grid_.cells;
  std::vector<double> frame(3 * m_ * n);
  for (std::size_t c = 0; c < m_; ++c)
  {
    std::copy(field.value[c].begin(), field.value[c].end(), frame.begin() + c * n);
    std::copy(field.dx[c].begin(), field.dx[c].end(), frame.begin() + (m_ + c) * n);
    std::copy(field.dt[c].begin(), field.dt[c].end(), frame.begin() + (2 * m_ + c) * n);
  }
  times_.push_back(field.t);
  frames_.push_back(std::move(frame));
}

void SignalHistory::replace_last(SignalField const& field)
{
  if (times_.empty() || field.t != times_.back())
    throw ArgumentError("replacement snapshot must match the last time");
  times_.pop_back();
  frames_.pop_back();
  append(field);
}

double SignalHistory::t_begin() const
{
  if (uniform_)
    return -HUGE_VAL;
  if (times_.empty())
    throw HistoryError("empty signal history");
  return times_.front();
}

double SignalHistory::t_end() const
{
  if (uniform_)
    return HUGE_VAL;
  if (times_.empty())
    throw HistoryError("empty signal history");
  return times_.back();
}

std::pair<std::size_t, double> SignalHistory::locate(double t) const
{
  if (times_.empty())
    throw HistoryError("empty signal history");
  double const tol = 1e-9 * std::max(1.0, std::abs(t));
  if (t < times_.front() - tol || t > times_.back() + tol)
  {
    throw HistoryError("signal history covers [" + std::to_string(times_.front()) + ", "
                       + std::to_string(times_.back()) + "], requested t = " + std::to_string(t));
  }
  if (times_.size() == 1)
    return {0, 0.0};
  auto const it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  k = std::min(k, times_.size() - 2);
  double const w = (t - times_[k]) / (times_[k + 1] - times_[k]);
  return {k, std::clamp(w, 0.0, 1.0)};
}

double SignalHistory::interp(std::vector<double> const& frame, std::size_t offset, double x) const
{
  std::size_t const n = grid_.cells;
  double const u = grid_.wrap(x) / grid_.spacing() - 0.5;
  double const fl = std::floor(u);
  auto const w = cubic_weights(u - fl);
  long const i0 = static_cast<long>(fl);
  long const nn = static_cast<long>(n);
  double r = 0.0;
  for (long q = 0; q < 4; ++q)
  {
    long idx = (i0 - 1 + q) % nn;
    if (idx < 0)
      idx += nn;
    r += w[static_cast<std::size_t>(q)] * frame[offset + static_cast<std::size_t>(idx)];
  }
  return r;
}

void SignalHistory::evaluate(double x, double t, std::span<double> s) const
{
  if (uniform_)
  {
    std::copy(uniform_value_.begin(), uniform_value_.end(), s.begin());
    return;
  }
  auto const [k, w] = locate(t);
  std::size_t const n = grid_.cells;
  for (std::size_t c = 0; c < m_; ++c)
  {
    double v = interp(frames_[k], c * n, x);
    if (w > 0.0)
      v = (1.0 - w) * v + w * interp(frames_[k + 1], c * n, x);
    s[c] = v;
  }
}

void SignalHistory::evaluate(double x, double t, std::span<double> s, std::span<double> sx,
                             std::span<double> st) const
{
  if (uniform_)
  {
    std::copy(uniform_value_.begin(), uniform_value_.end(), s.begin());
    std::fill(sx.begin(), sx.end(), 0.0);
    std::fill(st.begin(), st.end(), 0.0);
    return;
  }
  auto const [k, w] = locate(t);
  std::size_t const n = grid_.cells;
  std::span<double> out[3] = {s, sx, st};
  for (std::size_t part = 0; part < 3; ++part)
  {
    for (std::size_t c = 0; c < m_; ++c)
    {
      std::size_t const off = (part * m_ + c) * n;
      double v = interp(frames_[k], off, x);
      if (w > 0.0)
        v = (1.0 - w) * v + w * interp(frames_[k + 1], off, x);
      out[part][c] = v;
    }
  }
}

//---------------------------------------------------------------------------//
double cartoon_coupling_kernel(double u, double t_e, double t_a)
{
  double const c = 1.0 / t_e - 1.0 / t_a;
  double const base = std::exp(-u / t_a);
  double const cu = c * u;
  if (std::abs(cu) < 1e-8)
    return base * u * (1.0 - 0.5 * cu);
  return base * (-std::expm1(-cu)) / c;
}

CartoonStep CartoonStep::make(ModelConfig const& cfg, double elapsed)
{
  return {std::exp(-elapsed / cfg.t_e), std::exp(-elapsed / cfg.t_a),
          cartoon_coupling_kernel(elapsed, cfg.t_e, cfg.t_a) / cfg.t_e};
}

namespace {

//! exp(J u) applied to the unit forcing direction (1/t_e, 1/t_a).
std::array<double, 2> forcing_response(double u, ModelConfig const& cfg)
{
  double const phi = cartoon_coupling_kernel(u, cfg.t_e, cfg.t_a);
  return {std::exp(-u / cfg.t_e) / cfg.t_e - phi / (cfg.t_e * cfg.t_a), std::exp(-u / cfg.t_a) / cfg.t_a};
}

double gain_at(double x, double t, SignalHistory const& history, ModelConfig const& cfg)
{
  std::array<double, kMaxSignals> buf{};
  std::span<double> s(buf.data(), history.components());
  history.evaluate(x, t, s);
  double const g = cfg.g(s);
  if (!std::isfinite(g))
    throw ModelError("non-finite forcing along characteristic");
  return g;
}

//! int_a^b exp(J (ref - sigma)) G(sigma) d sigma along x(sigma) = x0 + v (sigma - t0).
std::array<double, 2> forcing_integral(double a, double b, double ref, double x0, double t0, double v,
                                       SignalHistory const& history, ModelConfig const& cfg)
{
  std::array<double, 2> acc{0.0, 0.0};
  double const len = b - a;
  for (std::size_t q = 0; q < 4; ++q)
  {
    double const sigma = a + kGaussNode[q] * len;
    double const g = gain_at(x0 + v * (sigma - t0), sigma, history, cfg);
    auto const r = forcing_response(ref - sigma, cfg);
    acc[0] += kGaussWeight[q] * len * g * r[0];
    acc[1] += kGaussWeight[q] * len * g * r[1];
  }
  return acc;
}

InternalState flow(InternalState const& y, double elapsed, ModelConfig const& cfg)
{
  return CartoonStep::make(cfg, elapsed).apply(y, 0.0);
}

}  // namespace

CharacteristicTrace trace_characteristic(double x, double v, InternalState const& y, double t,
                                         double s, SignalHistory const& history,
                                         ModelConfig const& cfg, TraceOptions const& opts)
{
  if (!(s >= 0.0) || !(s <= t))
    throw ArgumentError("trace needs 0 <= s <= t");
  if (!history.is_uniform() && (s < history.t_begin() - 1e-9 || t > history.t_end() + 1e-9))
    throw HistoryError("signal history does not cover the trace interval");

  CharacteristicTrace tr;
  tr.x = x;
  tr.v = v;
  tr.t = t;
  std::size_t intervals = 0;
  if (t > s)
  {
    intervals = std::max(opts.min_intervals,
                         static_cast<std::size_t>(std::ceil((t - s) / opts.step - 1e-12)));
    intervals += intervals % 2;
  }
  std::size_t const samples = intervals + 1;
  tr.times.resize(samples);
  for (std::size_t k = 0; k < samples; ++k)
  {
    tr.times[k] = intervals == 0 ? t
                                 : s + (t - s) * static_cast<double>(k) / static_cast<double>(intervals);
  }
  tr.times.back() = t;
  tr.positions.resize(samples);
  tr.states.assign(samples, std::vector<double>(2));
  tr.signals.assign(samples, std::vector<double>(history.components()));
  tr.jacobian.resize(samples);

  double const rate = 1.0 / cfg.t_e + 1.0 / cfg.t_a;
  InternalState cur = y;
  for (std::size_t kk = samples; kk-- > 0;)
  {
    double const tau = tr.times[kk];
    if (kk + 1 < samples)
    {
      double const next = tr.times[kk + 1];
      InternalState const back = flow(cur, tau - next, cfg);
      auto const f = forcing_integral(tau, next, tau, x, t, v, history, cfg);
      cur = {back[0] - f[0], back[1] - f[1]};
    }
    tr.positions[kk] = x - v * (t - tau);
    tr.states[kk] = {cur[0], cur[1]};
    history.evaluate(tr.positions[kk], tau, tr.signals[kk]);
    tr.jacobian[kk] = std::exp(rate * (t - tau));
  }
  return tr;
}

InternalState propagate_internal_state(double x0, double v, InternalState const& y0, double t0,
                                       double t1, SignalHistory const& history,
                                       ModelConfig const& cfg, double max_substep)
{
  if (t1 < t0)
    throw ArgumentError("forward propagation needs t1 >= t0");
  if (t1 == t0)
    return y0;
  if (history.is_uniform())
  {
    std::array<double, kMaxSignals> buf{};
    std::span<double> s(buf.data(), history.components());
    history.evaluate(x0, t0, s);
    return CartoonStep::make(cfg, t1 - t0).apply(y0, cfg.g(s));
  }

  InternalState y = y0;
  auto const times = history.times();
  auto it = std::upper_bound(times.begin(), times.end(), t0);
  double a = t0;
  while (a < t1)
  {
    double b = t1;
    if (it != times.end() && *it < t1)
      b = *it++;
    std::size_t const pieces
        = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / max_substep - 1e-9)));
    for (std::size_t p = 0; p < pieces; ++p)
    {
      double const pa = a + (b - a) * static_cast<double>(p) / static_cast<double>(pieces);
      double const pb = p + 1 == pieces ? b : a + (b - a) * static_cast<double>(p + 1) / static_cast<double>(pieces);
      InternalState const free = flow(y, pb - pa, cfg);
      auto const f = forcing_integral(pa, pb, pb, x0, t0, v, history, cfg);
      y = {free[0] + f[0], free[1] + f[1]};
    }
    a = b;
  }
  return y;
}

double jacobian_det_cartoon(ModelConfig const& cfg, double elapsed)
{
  if (!(elapsed >= 0.0))
    throw ArgumentError("elapsed time must be nonnegative");
  return std::exp((1.0 / cfg.t_e + 1.0 / cfg.t_a) * elapsed);
}

QuadratureResult jacobian_det_general(CharacteristicTrace const& trace, DivergenceFn const& div,
                                      double tolerance)
{
  std::size_t const n = trace.times.size();
  if (n == 0)
    throw ArgumentError("empty trace");
  if (n == 1)
    return {1.0, 0.0, true};
  std::vector<double> vals(n);
  for (std::size_t k = 0; k < n; ++k)
    vals[k] = div(trace.times[k], trace.signals[k], trace.states[k]);
  auto trapezoid = [&](std::size_t stride) {
    double s = 0.0;
    for (std::size_t k = 0; k + stride < n; k += stride)
      s += 0.5 * (trace.times[k + stride] - trace.times[k]) * (vals[k] + vals[k + stride]);
    return s;
  };
  double const fine = trapezoid(1);
  QuadratureResult r;
  double integral = fine;
  if ((n - 1) % 2 == 0 && n >= 3)
  {
    double const coarse = trapezoid(2);
    integral = fine + (fine - coarse) / 3.0;
    r.error_estimate = std::abs(fine - coarse) / 3.0;
  }
  r.converged = r.error_estimate <= tolerance * std::max(1.0, std::abs(integral));
  r.value = std::exp(-integral);
  return r;
}

//---------------------------------------------------------------------------//
InternalDynamics cartoon_dynamics(ModelConfig const& cfg)
{
  InternalDynamics d;
  d.dim = 2;
  d.rhs = [cfg](std::span<const double> c, std::span<const double> y, std::span<double> out) {
    auto const r = cartoon_rhs(c, {y[0], y[1]}, cfg);
    out[0] = r[0];
    out[1] = r[1];
  };
  double const div = cartoon_divergence(cfg);
  d.divergence = [div](std::span<const double>, std::span<const double>) { return div; };
  return d;
}

CharacteristicTrace trace_characteristic_general(double x, double v, std::vector<double> const& y,
                                                 double t, double s, SignalHistory const& history,
                                                 InternalDynamics const& dynamics,
                                                 TraceOptions const& opts)
{
  namespace ode = boost::numeric::odeint;
  if (!(s >= 0.0) || !(s <= t))
    throw ArgumentError("trace needs 0 <= s <= t");
  if (y.size() != dynamics.dim)
    throw ArgumentError("state dimension does not match the dynamics");

  CharacteristicTrace tr;
  tr.x = x;
  tr.v = v;
  tr.t = t;
  std::size_t intervals = 0;
  if (t > s)
  {
    intervals = std::max(opts.min_intervals,
                         static_cast<std::size_t>(std::ceil((t - s) / opts.step - 1e-12)));
    intervals += intervals % 2;
  }
  std::size_t const samples = intervals + 1;
  tr.times.resize(samples);
  for (std::size_t k = 0; k < samples; ++k)
  {
    tr.times[k] = intervals == 0 ? t
                                 : s + (t - s) * static_cast<double>(k) / static_cast<double>(intervals);
  }
  tr.times.back() = t;
  tr.positions.resize(samples);
  tr.signals.assign(samples, std::vector<double>(history.components()));
  for (std::size_t k = 0; k < samples; ++k)
  {
    tr.positions[k] = x - v * (t - tr.times[k]);
    history.evaluate(tr.positions[k], tr.times[k], tr.signals[k]);
  }

  using State = std::vector<double>;
  std::vector<double> cbuf(history.components());
  auto system = [&](State const& st, State& dydt, double tau) {
    history.evaluate(x - v * (t - tau), tau, cbuf);
    dydt.resize(st.size());
    dynamics.rhs(cbuf, st, dydt);
  };
  tr.states.assign(samples, y);
  if (intervals > 0)
  {
    std::vector<double> back(tr.times.rbegin(), tr.times.rend());
    std::vector<State> observed;
    State state = y;
    auto stepper = ode::make_controlled(opts.tolerance, opts.tolerance,
                                        ode::runge_kutta_dopri5<State>());
    ode::integrate_times(stepper, system, state, back.begin(), back.end(),
                         -(t - s) / static_cast<double>(intervals),
                         [&observed](State const& st, double) { observed.push_back(st); });
    for (std::size_t k = 0; k < samples; ++k)
      tr.states[samples - 1 - k] = observed.at(k);
  }
  return tr;
}

//---------------------------------------------------------------------------//
InternalStateBox internal_state_box(double sup_s, ModelConfig const& cfg, GrowthSpec const& gs,
                                    YBox const& y0)
{
  double const phi = gs.phi(sup_s);
  // g is nondecreasing in each component and every |S_c| <= sup_s.
  std::vector<double> const s_max(cfg.signal_dim(), sup_s);
  double const g_sup = cfg.signal_dim() > 0 ? std::min(phi, cfg.g(s_max)) : phi;
  InternalStateBox box;
  double const y2_0 = std::max(std::abs(y0.lo[1]), std::abs(y0.hi[1]));
  double const y1_0 = std::max(std::abs(y0.lo[0]), std::abs(y0.hi[0]));
  box.radius[1] = y2_0 + phi;
  box.radius[0] = y1_0 + box.radius[1] + phi;

  // Y2 is a convex combination of its initial value and values of g in
  // [0, phi]; Y1 likewise of its initial value and values of g - Y2.
  box.tight.lo[1] = std::min(y0.lo[1], 0.0);
  box.tight.hi[1] = std::max(y0.hi[1], g_sup);
  box.tight.lo[0] = std::min(y0.lo[0], -box.tight.hi[1]);
  box.tight.hi[0] = std::max(y0.hi[0], g_sup - box.tight.lo[1]);
  return box;
}

}  // namespace kchem
