#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kchem/grid.hpp"
#include "kchem/model.hpp"

namespace kchem {

//! Real-to-complex transforms on a periodic grid, scaled to approximate the
//! continuous transform h(xi) = int h(x) exp(-i xi x) dx.
class SpectralOps {
 public:
  explicit SpectralOps(PeriodicGrid grid);
  ~SpectralOps();
  SpectralOps(SpectralOps&&) noexcept;
  SpectralOps& operator=(SpectralOps&&) noexcept;

  PeriodicGrid const& grid() const { return grid_; }
  //! Number of nonnegative modes, n/2 + 1.
  std::size_t modes() const { return grid_.cells / 2 + 1; }
  double wavenumber(std::size_t m) const { return grid_.wavenumber(static_cast<double>(m)); }
  //! True for the unpaired Nyquist mode of an even grid.
  bool nyquist(std::size_t m) const { return grid_.cells % 2 == 0 && m == grid_.cells / 2; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  //! Inverse of forward: values_j = (1/L) sum over all signed modes.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

  //! Spectral first derivative (Nyquist mode dropped).
  void derivative(std::span<const double> in, std::span<double> out) const;

 private:
  PeriodicGrid grid_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

//! M-component signal with its cached space and time derivatives.
struct SignalField {
  PeriodicGrid grid;
  std::vector<std::vector<double>> value;
  std::vector<std::vector<double>> dx;
  std::vector<std::vector<double>> dt;
  double t = 0.0;

  static SignalField zeros(PeriodicGrid grid, std::size_t components);
  std::size_t components() const { return value.size(); }
  double sup(std::size_t c) const;
  double dx_sup(std::size_t c) const;
  double dt_sup(std::size_t c) const;
};

//! Elliptic signal d S'' + k n - K S = 0 per mode.  When `flux` is given,
//! dt holds the time derivative obtained from n_t = -j_x; otherwise zero.
SignalField solve_elliptic(std::span<const double> n, SignalSystem const& system,
                           SpectralOps const& ops, std::span<const double> flux = {});

SignalField solve_elliptic(std::span<const double> n, SignalSystem const& system, PeriodicGrid grid);

//! One step of S_t = d S'' + R(S, n) with n held at the supplied midpoint
//! density.  Mode-wise exact for the linear produce/degrade system; the
//! consumption variant uses symmetric splitting of diffusion and uptake.
SignalField step_parabolic(SignalField const& s, std::span<const double> n, double dt,
                           SignalSystem const& system, SpectralOps const& ops);

//! Explicit bound constants for one signal component.
struct ComponentBounds {
  double value = 0.0;            //!< bound on sup |S|
  double gradient = 0.0;         //!< bound on sup |S_x|
  double time_derivative = 0.0;  //!< bound on sup |S_t|
  double split = 0.0;            //!< R = max(n_L2^2, 2 pi / L)
  double i1 = 0.0;               //!< n_L1 ln(R^2/kappa^2 + 1)
  double i1_periodic = 0.0;      //!< n_L1 Delta / kappa, Riemann-sum correction
  double i2 = 0.0;               //!< high-mode integral bound, sqrt(2)
  double i2_factor = 0.0;        //!< 2 sqrt(pi), Plancherel and tail-sum factor
};

struct BoundReport {
  std::vector<ComponentBounds> components;
  bool parabolic = false;
  double t = 0.0;
  std::string convention;

  double value_sum() const;
};

//! Elliptic-mode bounds in terms of ||n||_1, ||n||_2 and the maximal speed.
BoundReport signal_bound_report(double n_l1, double n_l2, SignalSystem const& system,
                                PeriodicGrid grid, double max_speed);

//! Parabolic-mode bounds at time t from ||n||_1 and the initial signal.
BoundReport signal_bound_report_parabolic(double n_l1, SignalField const& initial, double t,
                                          SignalSystem const& system, SpectralOps const& ops);

}  // namespace kchem
