#include "kchem/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kchem/error.hpp"

namespace kchem {

//---------------------------------------------------------------------------//
std::vector<double> gronwall_log_envelope(double w0, std::span<const double> a,
                                          std::span<const double> b, std::span<const double> t_grid)
{
  if (!(w0 > 0.0))
    throw ArgumentError("envelope needs w0 > 0");
  std::size_t const n = t_grid.size();
  if (a.size() != n || b.size() != n)
    throw ArgumentError("coefficient tables do not match the time grid");
  std::vector<double> out(n);
  if (n == 0)
    return out;
  constexpr int pieces = 32;
  double big_a = 0.0;  // int a
  double inner = 0.0;  // int b exp(-int a)
  out[0] = std::log(w0);
  for (std::size_t k = 0; k + 1 < n; ++k)
  {
    double const t0 = t_grid[k];
    double const len = t_grid[k + 1] - t0;
    if (!(len >= 0.0))
      throw ArgumentError("time grid must be nondecreasing");
    double const da = len > 0.0 ? (a[k + 1] - a[k]) / len : 0.0;
    double const db = len > 0.0 ? (b[k + 1] - b[k]) / len : 0.0;
    auto big_a_at = [&](double u) { return big_a + a[k] * u + 0.5 * da * u * u; };
    auto integrand = [&](double u) { return (b[k] + db * u) * std::exp(-big_a_at(u)); };
    double const h = len / pieces;
    double sum = 0.0;
    for (int p = 0; p < pieces; ++p)
    {
      double const u0 = h * p;
      sum += h / 6.0 * (integrand(u0) + 4.0 * integrand(u0 + 0.5 * h) + integrand(u0 + h));
    }
    inner += sum;
    big_a = big_a_at(len);
    out[k + 1] = std::exp(big_a) * (std::log(w0) + inner);
  }
  return out;
}

std::vector<double> gronwall_envelope(double w0, std::span<const double> a, std::span<const double> b,
                                      std::span<const double> t_grid)
{
  auto out = gronwall_log_envelope(w0, a, b, t_grid);
  for (auto& v : out)
    v = std::exp(v);
  return out;
}

//---------------------------------------------------------------------------//
std::size_t BoundLedger::violations() const
{
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](LedgerRow const& r) { return r.violated; }));
}

std::size_t BoundLedger::violations(std::string const& prefix) const
{
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [&](LedgerRow const& r) {
    return r.violated && r.inequality.rfind(prefix, 0) == 0;
  }));
}

namespace {

LedgerRow make_row(double t, std::string id, double measured, double bound)
{
  LedgerRow r;
  r.t = t;
  r.inequality = std::move(id);
  r.measured = measured;
  r.bound = bound;
  r.margin = bound - measured;
  r.violated = measured > bound + 1e-12 * std::max(1.0, std::abs(bound));
  return r;
}

std::string kv(char const* name, double v)
{
  std::ostringstream os;
  os.precision(17);
  os << name << " = " << v;
  return os.str();
}

}  // namespace

BoundLedger check_a_priori_bounds(std::span<const MonitorSample> samples, EnvelopeConstants const& k,
                                  GrowthSpec const& gs)
{
  BoundLedger ledger;
  if (samples.empty())
    return ledger;
  std::size_t const mc = k.system.components();
  for (std::size_t i = 0; i < samples.size(); ++i)
  {
    auto const& s = samples[i];
    if (s.s_sup.size() != mc || s.sx_sup.size() != mc || s.st_sup.size() != mc)
      throw ArgumentError("monitor sample does not match the signal dimension");
    if (i > 0 && !(s.t > samples[i - 1].t))
      throw ArgumentError("monitor samples are not time-ordered");
  }

  double const sc = k.scale;
  double const n1 = samples.front().n_l1;
  double const vmax = k.max_speed;
  double const delta = 2.0 * std::numbers::pi / k.grid.length;
  double const nu = std::sqrt(k.velocity_measure * k.y_area);
  double const w0 = 1.0 + nu * samples.front().f_l2;

  SpectralOps const* ops = nullptr;
  std::unique_ptr<SpectralOps> owned;
  if (k.mode == SignalMode::parabolic)
  {
    owned = std::make_unique<SpectralOps>(k.grid);
    ops = owned.get();
  }

  // Signal bound at each sample, and its sum for the rate argument.
  std::vector<BoundReport> reports;
  reports.reserve(samples.size());
  for (auto const& s : samples)
  {
    if (k.mode == SignalMode::elliptic)
      reports.push_back(signal_bound_report(n1, s.n_l2, k.system, k.grid, vmax));
    else
      reports.push_back(signal_bound_report_parabolic(n1, k.initial_signal, s.t, k.system, *ops));
  }

  // Envelope coefficients for w = 1 + nu ||f||_2.
  double a_coef = 0.0;
  double b_signal = 0.0;
  if (k.mode == SignalMode::elliptic)
  {
    double const cv = 4.0 * std::log(std::max(1.0, vmax));
    for (auto const& p : k.system.params)
    {
      double const kappa = std::sqrt(p.k0 / p.d);
      double const pref = p.k / (2.0 * std::numbers::pi * p.d);
      double const cx = std::log1p((1.0 + delta * delta) / (kappa * kappa));
      double const tail = 2.0 * std::sqrt(2.0 * std::numbers::pi);
      a_coef += pref * 8.0 * vmax * n1;
      b_signal += pref * (vmax * (n1 * (cx + delta / kappa) + tail)
                          + (vmax * n1 * (cx + cv + delta / kappa) + tail));
    }
  }
  double const s_bound = reports.front().value_sum();
  std::size_t const n = samples.size();
  std::vector<double> t(n), a(n), b(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    t[i] = samples[i].t;
    if (k.mode == SignalMode::elliptic)
    {
      double const s_i = reports[i].value_sum();
      a[i] = sc * k.generator_norm * gs.c_lambda * a_coef;
      b[i] = sc * (0.5 * k.divergence_sup
                   + k.generator_norm * gs.c_lambda * (1.0 + gs.lambda_fn(s_i) + b_signal));
    }
    else
    {
      b[i] = sc * (0.5 * k.divergence_sup + k.generator_norm * k.rate_sup);
    }
  }
  auto const log_env = gronwall_log_envelope(w0, a, b, t);

  ledger.header = {
      std::string("mode = ") + (k.mode == SignalMode::elliptic ? "elliptic" : "parabolic"),
      kv("scale", sc),
      kv("n_L1(0)", n1),
      kv("max_speed", vmax),
      kv("velocity_measure", k.velocity_measure),
      kv("y_area", k.y_area),
      kv("nu = sqrt(velocity_measure * y_area)", nu),
      kv("w0 = 1 + nu ||f0||_2", w0),
      kv("divergence_sup", k.divergence_sup),
      kv("generator_norm", k.generator_norm),
      kv("c_lambda", gs.c_lambda),
      kv("rate_sup", k.rate_sup),
      kv("a (ln w coefficient, before scale and c_lambda tau)", a_coef),
      kv("b signal part (before scale and c_lambda tau)", b_signal),
      kv("signal value bound sum", s_bound),
      kv("jacobian constant c_div", gs.c_div),
      "envelope: w(t) <= [w0 exp(int b e^{-A})]^{exp A}, ||f||_2 <= (w - 1) / nu",
      "signal convention: " + reports.front().convention,
  };

  for (std::size_t i = 0; i < n; ++i)
  {
    auto const& s = samples[i];
    double const env = log_env[i] > 700.0 ? HUGE_VAL : (std::exp(log_env[i]) - 1.0) / nu;
    ledger.rows.push_back(make_row(s.t, "f_L2", s.f_l2, nu > 0.0 ? env : HUGE_VAL));
    double const jac = std::exp(sc * gs.c_div * s.t * (1.0 + gs.pi(sc * s_bound)));
    ledger.rows.push_back(make_row(s.t, "jacobian", s.jacobian_inverse, jac));
    for (std::size_t c = 0; c < mc; ++c)
    {
      auto const& cb = reports[i].components[c];
      std::string const idx = "[" + std::to_string(c) + "]";
      ledger.rows.push_back(make_row(s.t, "S_sup" + idx, s.s_sup[c], sc * cb.value));
      if (k.mode == SignalMode::elliptic || s.t >= 1.0)
        ledger.rows.push_back(make_row(s.t, "Sx_sup" + idx, s.sx_sup[c], sc * cb.gradient));
      ledger.rows.push_back(make_row(s.t, "St_sup" + idx, s.st_sup[c], sc * cb.time_derivative));
    }
  }
  return ledger;
}

//---------------------------------------------------------------------------//
ConcentrationMetrics concentration_metrics(std::span<const double> n, PeriodicGrid const& grid)
{
  if (n.size() != grid.cells || n.empty())
    throw ArgumentError("density does not match the grid");
  double const h = grid.spacing();
  double const len = grid.length;
  ConcentrationMetrics out;
  double total = 0.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < n.size(); ++i)
  {
    total += n[i];
    if (n[i] > n[arg])
      arg = i;
  }
  out.mass = total * h;
  if (!(out.mass > 0.0))
    throw ArgumentError("concentration metrics need positive mass");
  out.peak = n[arg];
  out.peak_location = grid.center(arg);

  // Largest circular run of negligible cells.
  double const tiny = 1e-12 * out.peak;
  std::size_t const cells = n.size();
  std::size_t best_len = 0, best_end = 0, run = 0;
  for (std::size_t k = 0; k < 2 * cells; ++k)
  {
    if (n[k % cells] <= tiny)
    {
      run = std::min(run + 1, cells);
      if (run > best_len)
      {
        best_len = run;
        best_end = k % cells;
      }
    }
    else
    {
      run = 0;
    }
  }
  double const support = len - static_cast<double>(best_len) * h;

  if (support < 0.5 * len && best_len < cells)
  {
    // Unwrap starting just after the gap; piecewise-constant moments.
    std::size_t const start = (best_end + 1) % cells;
    double m1 = 0.0;
    for (std::size_t q = 0; q < cells; ++q)
      m1 += n[(start + q) % cells] * (static_cast<double>(q) + 0.5) * h;
    double const mean = m1 / total;
    double m2 = 0.0;
    for (std::size_t q = 0; q < cells; ++q)
    {
      double const d = (static_cast<double>(q) + 0.5) * h - mean;
      m2 += n[(start + q) % cells] * (d * d + h * h / 12.0);
    }
    out.variance = m2 / total;
    return out;
  }

  double cs = 0.0, sn = 0.0;
  for (std::size_t i = 0; i < cells; ++i)
  {
    double const th = 2.0 * std::numbers::pi * grid.center(i) / len;
    cs += n[i] * std::cos(th);
    sn += n[i] * std::sin(th);
  }
  double mu = 0.0;
  if (std::hypot(cs, sn) > 1e-12 * total)
    mu = grid.wrap(std::atan2(sn, cs) * len / (2.0 * std::numbers::pi));
  // Average of the squared periodic distance over each cell.
  auto primitive = [](double z) { return z * z * z / 3.0; };
  double m2 = 0.0;
  for (std::size_t i = 0; i < cells; ++i)
  {
    double const lo = grid.wrap(static_cast<double>(i) * h - mu + 0.5 * len) - 0.5 * len;
    double const hi = lo + h;
    double integral;
    if (hi <= 0.5 * len)
      integral = primitive(hi) - primitive(lo);
    else
      integral = primitive(0.5 * len) - primitive(lo) + primitive(hi - len) - primitive(-0.5 * len);
    m2 += n[i] * integral / h;
  }
  out.variance = m2 / total;
  return out;
}

}  // namespace kchem
