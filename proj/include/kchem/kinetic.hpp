#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "kchem/characteristics.hpp"
#include "kchem/grid.hpp"
#include "kchem/model.hpp"
#include "kchem/signal.hpp"

namespace kchem {

//! Tensor grid x-cells by velocities by y1-cells by y2-cells, x fastest.
struct PhaseSpaceGrid {
  PeriodicGrid x;
  VelocitySet v;
  IntervalGrid y1;
  IntervalGrid y2;

  std::size_t size() const { return x.cells * v.size() * y1.cells * y2.cells; }
  std::size_t line(std::size_t vi, std::size_t a, std::size_t b) const
  {
    return ((vi * y1.cells + a) * y2.cells + b) * x.cells;
  }
  std::size_t index(std::size_t i, std::size_t vi, std::size_t a, std::size_t b) const
  {
    return line(vi, a, b) + i;
  }
  //! Phase-space volume of a cell with velocity index vi.
  double volume(std::size_t vi) const
  {
    return x.spacing() * v.weights[vi] * y1.spacing * y2.spacing;
  }
};

//! Density per phase-space volume on a PhaseSpaceGrid.
struct PhaseSpaceField {
  PhaseSpaceGrid grid;
  std::vector<double> values;
  double t = 0.0;

  explicit PhaseSpaceField(PhaseSpaceGrid g) : grid(std::move(g)), values(grid.size(), 0.0) {}
};

struct Moments {
  std::vector<double> n;
  std::vector<double> j;
  double mass = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double y1_mean = 0.0;
};

enum class Norm { l1, l2, linf };

Moments density_and_flux(PhaseSpaceField const& f);
double lp_norm(PhaseSpaceField const& f, Norm p);

//---------------------------------------------------------------------------//
//! Source of the signal seen during kinetic steps.
class SignalCoupling {
 public:
  virtual ~SignalCoupling() = default;
  virtual SignalField const& current() const = 0;
  //! Signal used during the step [t, t + dt]; n_half is the density after
  //! the first half x-advection.
  virtual SignalField const& half_step(double t, double dt, std::span<const double> n_half) = 0;
  virtual void end_step(double t_end, std::span<const double> n_end, std::span<const double> j_end) = 0;
};

class EllipticCoupling final : public SignalCoupling {
 public:
  EllipticCoupling(SignalSystem system, PeriodicGrid grid, std::span<const double> n0,
                   std::span<const double> j0, double t0 = 0.0);
  SignalField const& current() const override { return current_; }
  SignalField const& half_step(double t, double dt, std::span<const double> n_half) override;
  void end_step(double t_end, std::span<const double> n_end, std::span<const double> j_end) override;

 private:
  SignalSystem system_;
  SpectralOps ops_;
  SignalField current_;
  SignalField half_;
};

class ParabolicCoupling final : public SignalCoupling {
 public:
  ParabolicCoupling(SignalSystem system, PeriodicGrid grid, SignalField s0, std::span<const double> n0);
  SignalField const& current() const override { return current_; }
  SignalField const& half_step(double t, double dt, std::span<const double> n_half) override;
  void end_step(double t_end, std::span<const double> n_end, std::span<const double> j_end) override;

 private:
  SignalSystem system_;
  SpectralOps ops_;
  SignalField current_;
  SignalField half_;
  std::vector<double> last_n_;
  std::vector<double> half_n_;
  double dt_ = 0.0;
};

//! Signal read from a recorded history (one-way coupling).
class PrescribedCoupling final : public SignalCoupling {
 public:
  PrescribedCoupling(SignalHistory const& history, PeriodicGrid grid, double t0 = 0.0);
  SignalField const& current() const override { return current_; }
  SignalField const& half_step(double t, double dt, std::span<const double> n_half) override;
  void end_step(double t_end, std::span<const double> n_end, std::span<const double> j_end) override;

 private:
  SignalField sample(double t) const;

  SignalHistory const* history_;
  PeriodicGrid grid_;
  SignalField current_;
  SignalField half_;
};

//---------------------------------------------------------------------------//
struct StepReport {
  double clipped_mass = 0.0;
  double min_before_clip = 0.0;
  double escaped_mass = 0.0;
};

//! Strang-split kinetic stepper: half x-shift, half y-flow, exact turning,
//! half y-flow, half x-shift, with the signal frozen at the half step.
class KineticSolver {
 public:
  explicit KineticSolver(ModelConfig cfg);

  ModelConfig const& config() const { return cfg_; }

  StepReport step(PhaseSpaceField& f, SignalCoupling& coupling, double dt) const;

  //! Sub-steps, exposed for testing.
  void advect_x(PhaseSpaceField& f, double dt) const;
  //! Exact internal flow over dt with the gain g[i] frozen per x cell;
  //! throws SupportOverflowError if mass leaves the y grid.
  double advect_y(PhaseSpaceField& f, std::span<const double> gain, double dt) const;
  void turn(PhaseSpaceField& f, double dt) const;

  //! Relaxation propagator exp(dt lambda B) for a given rate (row-major).
  std::vector<double> turning_propagator(double rate, double dt) const;

 private:
  ModelConfig cfg_;
  std::vector<double> generator_;
};

//! One kinetic step against a recorded signal history.
PhaseSpaceField step_kinetic(PhaseSpaceField const& f, SignalHistory const& history, double dt,
                             ModelConfig const& cfg);

}  // namespace kchem
