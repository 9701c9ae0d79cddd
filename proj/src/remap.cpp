#include "kchem/remap.hpp"

#include <algorithm>
#include <cmath>

#include "kchem/error.hpp"

namespace kchem {

namespace {

//! Mass of cell c lying left of fraction th, from the cubic primitive
//! through the cumulative masses at offsets -1, 0, 1, 2.
inline double partial_mass(double left, double mid, double right, double th)
{
  double const lm = -th * (th - 1.0) * (th - 2.0) / 6.0;
  double const l1 = -(th + 1.0) * th * (th - 2.0) / 2.0;
  double const l2 = (th + 1.0) * th * (th - 1.0) / 6.0;
  double const q = -left * lm + mid * l1 + (mid + right) * l2;
  return std::clamp(q, 0.0, mid);
}

}  // namespace

void shift_periodic(std::span<const double> in, double shift, std::span<double> out)
{
  std::size_t const n = in.size();
  if (out.size() != n)
    throw ArgumentError("shift_periodic: size mismatch");
  if (n == 0)
    return;
  double const whole = std::floor(shift);
  double const frac = shift - whole;
  long const nn = static_cast<long>(n);
  long m = static_cast<long>(std::fmod(whole, static_cast<double>(n)));
  if (m < 0)
    m += nn;
  auto at = [&](long i) {
    i %= nn;
    if (i < 0)
      i += nn;
    return in[static_cast<std::size_t>(i)];
  };
  if (frac == 0.0)
  {
    for (long k = 0; k < nn; ++k)
      out[static_cast<std::size_t>(k)] = at(k - m);
    return;
  }
  // Target cell k receives [k - shift, k + 1 - shift], which starts at
  // fraction phi of source cell j = k - m - 1.
  double const phi = 1.0 - frac;
  for (long k = 0; k < nn; ++k)
  {
    long const j = k - m - 1;
    double const pj = partial_mass(at(j - 1), at(j), at(j + 1), phi);
    double const pn = partial_mass(at(j), at(j + 1), at(j + 2), phi);
    out[static_cast<std::size_t>(k)] = at(j) - pj + pn;
  }
}

RemapLoss remap_affine(std::span<const double> in, double slope, double offset,
                       std::span<double> out, std::span<double> scratch)
{
  std::size_t const n = in.size();
  if (out.size() != n || scratch.size() < n + 1)
    throw ArgumentError("remap_affine: size mismatch");
  if (!(slope > 0.0) || slope > 1.0 + 1e-15)
    throw ArgumentError("remap_affine: slope must lie in (0, 1]");

  double total = 0.0;
  for (double v : in)
    total += v;
  auto cell = [&](long i) {
    return (i < 0 || i >= static_cast<long>(n)) ? 0.0 : in[static_cast<std::size_t>(i)];
  };
  // Cumulative mass left of preimage of each target edge; edge running
  // sums restart from the exact prefix to avoid drift.
  double prefix = 0.0;
  long prefix_cell = 0;
  for (std::size_t e = 0; e <= n; ++e)
  {
    double const u = (static_cast<double>(e) - offset) / slope;
    double p;
    if (u <= 0.0)
    {
      p = 0.0;
    }
    else if (u >= static_cast<double>(n))
    {
      p = total;
    }
    else
    {
      long const c = static_cast<long>(std::floor(u));
      while (prefix_cell < c)
        prefix += cell(prefix_cell++);
      p = prefix + partial_mass(cell(c - 1), cell(c), cell(c + 1), u - static_cast<double>(c));
    }
    scratch[e] = p;
  }
  for (std::size_t k = 0; k < n; ++k)
    out[k] = std::max(0.0, scratch[k + 1] - scratch[k]);
  return {scratch[0], total - scratch[n]};
}

}  // namespace kchem
