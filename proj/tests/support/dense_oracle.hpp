#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "kchem/grid.hpp"
#include "kchem/model.hpp"

namespace kchem_test {

using kchem::PeriodicGrid;
using kchem::SignalSystem;
using std::numbers::pi;

//! Dense spectral second-derivative matrix from the explicit Fourier sum.
inline Eigen::MatrixXd dense_second_derivative(PeriodicGrid const& g)
{
  long const n = static_cast<long>(g.cells);
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
  for (long i = 0; i < n; ++i)
  {
    for (long j = 0; j < n; ++j)
    {
      double s = 0.0;
      for (long m = -(n - 1) / 2; m <= n / 2; ++m)
      {
        double const xi = 2.0 * pi * static_cast<double>(m) / g.length;
        s += -xi * xi * std::cos(xi * (g.center(i) - g.center(j)));
      }
      d2(i, j) = s / static_cast<double>(n);
    }
  }
  return d2;
}

//! Block system sum_j (d_i D2 delta_ij - K_ij) S_j = -k_i n solved by LU.
inline std::vector<std::vector<double>> dense_elliptic(std::vector<double> const& n, SignalSystem const& sys,
                                                PeriodicGrid const& g)
{
  long const nx = static_cast<long>(g.cells);
  long const mc = static_cast<long>(sys.components());
  auto const d2 = dense_second_derivative(g);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nx * mc, nx * mc);
  Eigen::VectorXd rhs(nx * mc);
  for (long c = 0; c < mc; ++c)
  {
    auto const& p = sys.params[static_cast<std::size_t>(c)];
    a.block(c * nx, c * nx, nx, nx) += -p.d * d2;
    for (long e = 0; e < mc; ++e)
    {
      double const kk = sys.reaction.coupling.empty() ? (c == e ? p.k0 : 0.0)
                                                      : sys.reaction.coupling[static_cast<std::size_t>(c * mc + e)];
      a.block(c * nx, e * nx, nx, nx) += kk * Eigen::MatrixXd::Identity(nx, nx);
    }
    for (long i = 0; i < nx; ++i)
      rhs(c * nx + i) = p.k * n[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd const s = a.partialPivLu().solve(rhs);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(mc), std::vector<double>(static_cast<std::size_t>(nx)));
  for (long c = 0; c < mc; ++c)
  {
    for (long i = 0; i < nx; ++i)
      out[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = s(c * nx + i);
  }
  return out;
}

}  // namespace kchem_test
