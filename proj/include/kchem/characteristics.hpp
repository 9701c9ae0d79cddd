#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "kchem/grid.hpp"
#include "kchem/growth.hpp"
#include "kchem/model.hpp"
#include "kchem/signal.hpp"

namespace kchem {

//! Signal snapshots on the x grid, linear in time and cubic in space.
class SignalHistory {
 public:
  SignalHistory() = default;
  SignalHistory(PeriodicGrid grid, std::size_t components);

  //! Signal that is the same at every x and t.
  static SignalHistory uniform(std::vector<double> value);

  //! Append a snapshot; times must increase strictly.
  void append(SignalField const& field);
  //! Replace the most recent snapshot (same time).
  void replace_last(SignalField const& field);

  std::size_t components() const { return m_; }
  std::size_t size() const { return times_.size(); }
  bool is_uniform() const { return uniform_; }
  double t_begin() const;
  double t_end() const;
  std::span<const double> times() const { return times_; }
  PeriodicGrid const& grid() const { return grid_; }

  //! Signal at (x, t); throws HistoryError outside the recorded range.
  void evaluate(double x, double t, std::span<double> s) const;
  //! Signal and its cached derivatives at (x, t).
  void evaluate(double x, double t, std::span<double> s, std::span<double> sx,
                std::span<double> st) const;

 private:
  //! Locate t: frame index k and weight of frame k+1.
  std::pair<std::size_t, double> locate(double t) const;
  double interp(std::vector<double> const& frame, std::size_t offset, double x) const;

  PeriodicGrid grid_;
  std::size_t m_ = 0;
  bool uniform_ = false;
  std::vector<double> uniform_value_;
  std::vector<double> times_;
  //! Per frame: value, dx, dt blocks of m_ * cells each.
  std::vector<std::vector<double>> frames_;
};

//---------------------------------------------------------------------------//
//! Back-time characteristic sampled on an increasing grid s = t_0 < ... < t_K = t.
struct CharacteristicTrace {
  double x = 0.0;
  double v = 0.0;
  double t = 0.0;
  std::vector<double> times;
  std::vector<double> positions;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> signals;
  //! det dY(tau)/dy at each sample (cartoon traces only).
  std::vector<double> jacobian;
};

struct TraceOptions {
  double step = 0.05;             //!< solver step h_t
  std::size_t min_intervals = 8;
  double tolerance = 1e-10;       //!< general integrator tolerance
};

//! Exact flow of the cartoon system over `elapsed` with the gain held at g:
//! y2' = g + a (y2 - g), y1' = e y1 - c (y2 - g).  Negative elapsed runs backward.
struct CartoonStep {
  double decay_e = 1.0;
  double decay_a = 1.0;
  double coupling = 0.0;

  static CartoonStep make(ModelConfig const& cfg, double elapsed);
  InternalState apply(InternalState const& y, double g) const
  {
    return {decay_e * y[0] - coupling * (y[1] - g), g + decay_a * (y[1] - g)};
  }
};

//! (exp(-u/t_a) - exp(-u/t_e)) / (1/t_e - 1/t_a), stable as t_e -> t_a.
double cartoon_coupling_kernel(double u, double t_e, double t_a);

//! Internal state at time s of the characteristic through (x, v, y) at t.
CharacteristicTrace trace_characteristic(double x, double v, InternalState const& y, double t,
                                         double s, SignalHistory const& history,
                                         ModelConfig const& cfg, TraceOptions const& opts = {});

//! Forward integration of the internal state along x(t) = x0 + v (t - t0).
InternalState propagate_internal_state(double x0, double v, InternalState const& y0, double t0,
                                       double t1, SignalHistory const& history,
                                       ModelConfig const& cfg, double max_substep);

double jacobian_det_cartoon(ModelConfig const& cfg, double elapsed);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

using DivergenceFn
    = std::function<double(double tau, std::span<const double> c, std::span<const double> y)>;

//! exp(-int_s^t div F dtau) along a trace, with a Richardson error estimate.
QuadratureResult jacobian_det_general(CharacteristicTrace const& trace, DivergenceFn const& div,
                                      double tolerance = 1e-8);

//---------------------------------------------------------------------------//
//! General internal dynamics dy/dt = F(C, y).
struct InternalDynamics {
  std::size_t dim = 2;
  std::function<void(std::span<const double> c, std::span<const double> y, std::span<double> dydt)> rhs;
  std::function<double(std::span<const double> c, std::span<const double> y)> divergence;
};

InternalDynamics cartoon_dynamics(ModelConfig const& cfg);

//! Back-time trace with an adaptive embedded Runge-Kutta integrator.
CharacteristicTrace trace_characteristic_general(double x, double v, std::vector<double> const& y,
                                                 double t, double s, SignalHistory const& history,
                                                 InternalDynamics const& dynamics,
                                                 TraceOptions const& opts = {});

//---------------------------------------------------------------------------//
struct YBox {
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{0.0, 0.0};
};

//! Boxes guaranteed to contain Y(tau) for every tau >= 0.
struct InternalStateBox {
  //! Coordinate-wise radii |Y2| <= r2 = |y2(0)| + Phi, |Y1| <= r1 = |y1(0)| + r2 + Phi.
  std::array<double, 2> radius{0.0, 0.0};
  //! Tighter box from the convex-combination form of the exact solution.
  YBox tight;
};

InternalStateBox internal_state_box(double sup_s, ModelConfig const& cfg, GrowthSpec const& gs,
                                    YBox const& y0_box);

}  // namespace kchem
