#include "kchem/growth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kchem/error.hpp"

namespace kchem {

double GrowthFunction::operator()(double x) const
{
  if (kind == Kind::power)
    return c0 + c1 * std::pow(std::max(x, 0.0), exponent);
  if (r.empty())
    return 0.0;
  if (x <= r.front())
    return value.front();
  if (x >= r.back())
    return value.back();
  auto const it = std::upper_bound(r.begin(), r.end(), x);
  std::size_t const i = static_cast<std::size_t>(it - r.begin());
  double const t = (x - r[i - 1]) / (r[i] - r[i - 1]);
  return value[i - 1] + t * (value[i] - value[i - 1]);
}

bool GrowthFunction::admissible(double hi, std::size_t samples) const
{
  double prev = (*this)(0.0);
  if (!(prev >= 0.0))
    return false;
  for (std::size_t i = 1; i < samples; ++i)
  {
    double const cur = (*this)(hi * static_cast<double>(i) / static_cast<double>(samples - 1));
    if (!(cur >= prev))
      return false;
    prev = cur;
  }
  return true;
}

//---------------------------------------------------------------------------//
HypothesisResult const* ValidationReport::find(std::string const& id) const
{
  for (auto const& h : hypotheses)
  {
    if (h.id == id)
      return &h;
  }
  return nullptr;
}

bool ValidationReport::passed(std::string const& id) const
{
  auto const* h = find(id);
  return h != nullptr && h->passed;
}

std::vector<std::string> ValidationReport::regimes() const
{
  std::vector<std::string> out;
  if (cartoon_parabolic)
    out.emplace_back("cartoon_parabolic");
  if (rate_growth_elliptic)
    out.emplace_back("rate_growth_elliptic");
  if (power_growth)
    out.emplace_back("power_growth");
  if (bounded_rate)
    out.emplace_back("bounded_rate");
  return out;
}

//---------------------------------------------------------------------------//
namespace {

std::string point(std::initializer_list<std::pair<char const*, double>> coords)
{
  std::ostringstream os;
  os.precision(10);
  bool first = true;
  for (auto const& [name, v] : coords)
  {
    os << (first ? "" : ", ") << name << "=" << v;
    first = false;
  }
  return os.str();
}

double lerp(double lo, double hi, std::size_t i, std::size_t n)
{
  return n <= 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

double rate_derivative(RateSpec const& rate, double y)
{
  double const h = 1e-6 * std::max(1.0, std::abs(y));
  return (rate(y + h) - rate(y - h)) / (2.0 * h);
}

}  // namespace

ValidationReport
validate_growth_conditions(ModelConfig const& cfg, GrowthSpec const& gs, SampleBox const& box)
{
  if (box.points < 2 || !(box.s_max >= 0.0) || !(box.dcdt_max >= 0.0)
      || box.y_lo[0] > box.y_hi[0] || box.y_lo[1] > box.y_hi[1])
  {
    throw ArgumentError("empty sample box");
  }

  ValidationReport report;
  auto const& kernel = cfg.kernel;
  report.kernel_bound = kernel.bound();
  report.rate_sup = cfg.lambda.sup_over(box.y_lo[0], box.y_hi[0]);
  double const ck = report.kernel_bound;
  auto add = [&report](std::string id, bool ok, std::string witness) {
    report.hypotheses.push_back({std::move(id), ok, ok ? std::string{} : std::move(witness)});
  };

  // Kernel normalization in both directions and boundedness.
  {
    bool col = true, row = true;
    std::string wc, wr;
    for (std::size_t v = 0; v < kernel.size(); ++v)
    {
      if (col && std::abs(kernel.column_sum(v) - 1.0) > 1e-12)
      {
        col = false;
        wc = point({{"v_old", static_cast<double>(v)}, {"sum", kernel.column_sum(v)}});
      }
      if (row && std::abs(kernel.row_sum(v) - 1.0) > 1e-12)
      {
        row = false;
        wr = point({{"v_new", static_cast<double>(v)}, {"sum", kernel.row_sum(v)}});
      }
    }
    add("kernel_column_normalization", col, wc);
    add("kernel_row_normalization", row, wr);
    add("kernel_bounded", std::isfinite(ck) && ck >= 0.0, point({{"C_K", ck}}));
  }

  std::size_t const n1 = std::max<std::size_t>(box.points * 50, 10000);
  // Rate nonnegativity.
  {
    bool ok = true;
    std::string w;
    for (std::size_t i = 0; i < n1 && ok; ++i)
    {
      double const y1 = lerp(box.y_lo[0], box.y_hi[0], i, n1);
      double const r = cfg.lambda(y1);
      if (!(r >= 0.0) || !std::isfinite(r))
      {
        ok = false;
        w = point({{"y1", y1}, {"lambda", r}});
      }
    }
    add("rate_nonnegative", ok, w);
  }

  // Gain growth |g| + |grad g| <= Phi(|S|) on a tensor grid of [0, s_max]^M.
  {
    std::size_t const m = cfg.signal_dim();
    std::size_t per_dim = box.points;
    if (m > 1)
      per_dim = std::max<std::size_t>(3, static_cast<std::size_t>(std::pow(box.points * 20.0, 1.0 / m)));
    std::size_t total = 1;
    for (std::size_t c = 0; c < m; ++c)
      total *= per_dim;
    std::vector<double> z(m), grad(m);
    bool ok = true;
    std::string w;
    for (std::size_t idx = 0; idx < total && ok; ++idx)
    {
      std::size_t rem = idx;
      for (std::size_t c = 0; c < m; ++c)
      {
        z[c] = lerp(0.0, box.s_max, rem % per_dim, per_dim);
        rem /= per_dim;
      }
      double norm = 0.0;
      for (double zi : z)
        norm += zi * zi;
      norm = std::sqrt(norm);
      cfg.g.gradient(z, grad);
      double gn = 0.0;
      for (double gi : grad)
        gn += gi * gi;
      double const lhs = std::abs(cfg.g(z)) + std::sqrt(gn);
      double const rhs = gs.phi(norm);
      if (lhs > rhs * (1.0 + 1e-12) + 1e-300)
      {
        ok = false;
        w = point({{"|S|", norm}, {"|g|+|grad g|", lhs}, {"Phi", rhs}});
      }
    }
    add("gain_growth", ok && gs.phi.admissible(box.s_max, box.points), w.empty() ? "Phi not admissible" : w);
  }

  // Turning kernel growth and domination on a y grid.
  std::size_t const ny = std::min<std::size_t>(box.points, 101);
  {
    bool growth_ok = true, dom_ok = true;
    std::string wg, wd;
    for (std::size_t i = 0; i < ny; ++i)
    {
      double const y1 = lerp(box.y_lo[0], box.y_hi[0], i, ny);
      double const rate = cfg.lambda(y1);
      double const drate = std::abs(rate_derivative(cfg.lambda, y1));
      for (std::size_t j = 0; j < ny; ++j)
      {
        double const y2 = lerp(box.y_lo[1], box.y_hi[1], j, ny);
        double const ynorm = std::hypot(y1, y2);
        double const tmax = rate * ck;
        double const lhs = tmax + drate * ck;
        if (growth_ok && lhs > gs.psi(ynorm) * (1.0 + 1e-12))
        {
          growth_ok = false;
          wg = point({{"y1", y1}, {"y2", y2}, {"|T|+|grad T|", lhs}, {"Psi", gs.psi(ynorm)}});
        }
        for (std::size_t a = 0; a < kernel.size() && dom_ok; ++a)
        {
          for (std::size_t b = 0; b < kernel.size(); ++b)
          {
            double const t = rate * kernel(a, b);
            if (t > ck * rate * (1.0 + 1e-15))
            {
              dom_ok = false;
              wd = point({{"y1", y1}, {"T", t}, {"C_K lambda", ck * rate}});
              break;
            }
          }
        }
      }
    }
    add("turning_growth", growth_ok, wg);
    add("turning_domination", dom_ok, wd);
  }

  // Power-law growth of lambda in y1 together with the exponent product.
  bool power_samples = true;
  {
    std::string w;
    for (std::size_t i = 0; i < n1 && power_samples; ++i)
    {
      double const y1 = lerp(box.y_lo[0], box.y_hi[0], i, n1);
      double const bound = gs.c_rate * (1.0 + std::pow(std::abs(y1), gs.sigma));
      if (cfg.lambda(y1) > bound * (1.0 + 1e-12))
      {
        power_samples = false;
        w = point({{"y1", y1}, {"lambda", cfg.lambda(y1)}, {"bound", bound}});
      }
    }
    bool const exponent_ok = gs.omega_sigma() <= 1.0;
    if (power_samples && !exponent_ok)
      w = point({{"omega*sigma", gs.omega_sigma()}});
    add("rate_power_growth", power_samples && exponent_ok, w);
  }

  // lambda <= c_lambda (1 + Lambda(|C|) + |dC/dt|): the right side is
  // smallest at C = 0, dC/dt = 0, so the box supremum settles it.
  {
    double const floor_bound = gs.c_lambda * (1.0 + gs.lambda_fn(0.0));
    bool const ok = report.rate_sup <= floor_bound * (1.0 + 1e-12)
                    && gs.lambda_fn.admissible(box.s_max, box.points);
    add("rate_growth", ok, point({{"sup lambda", report.rate_sup}, {"bound at C=0", floor_bound}}));
  }

  // Divergence bounds.
  {
    double const div = cartoon_divergence(cfg);
    bool two = true;
    std::string w2;
    for (std::size_t i = 0; i < box.points && two; ++i)
    {
      double const c = lerp(0.0, box.s_max, i, box.points);
      double const bound = gs.c_div * (1.0 + gs.pi(c));
      if (std::abs(div) > bound * (1.0 + 1e-12))
      {
        two = false;
        w2 = point({{"|C|", c}, {"|div F|", std::abs(div)}, {"bound", bound}});
      }
    }
    add("divergence_growth", two && gs.pi.admissible(box.s_max, box.points), w2);

    bool const one_samples = div <= gs.c_div_one * (1.0 + gs.pi(0.0));
    bool const one_exp = gs.omega_gamma() <= 1.0;
    add("divergence_dissipative", one_samples && one_exp,
        one_samples ? point({{"omega*gamma", gs.omega_gamma()}}) : point({{"div F", div}}));
  }

  // Bounded rate.
  {
    bool ok;
    std::string w;
    if (gs.c_bounded > 0.0)
    {
      ok = report.rate_sup <= gs.c_bounded;
      w = point({{"sup lambda", report.rate_sup}, {"C", gs.c_bounded}});
    }
    else
    {
      ok = cfg.lambda.kind != RateKind::clipped_linear || cfg.lambda.slope == 0.0;
      w = "clipped-linear rate is unbounded and no bound was declared";
    }
    add("bounded_rate", ok, w);
  }

  bool const kernel_ok = report.passed("kernel_column_normalization")
                         && report.passed("kernel_row_normalization")
                         && report.passed("kernel_bounded") && report.passed("rate_nonnegative");
  report.cartoon_parabolic = kernel_ok && report.passed("gain_growth") && report.passed("turning_growth");
  report.rate_growth_elliptic = kernel_ok && report.passed("rate_growth")
                                && report.passed("turning_domination")
                                && report.passed("divergence_growth");
  report.power_growth = kernel_ok && report.passed("rate_power_growth")
                        && report.passed("turning_domination")
                        && report.passed("divergence_dissipative");
  report.bounded_rate = kernel_ok && report.passed("bounded_rate")
                        && (report.passed("divergence_growth")
                            || report.passed("divergence_dissipative"));
  return report;
}

}  // namespace kchem
