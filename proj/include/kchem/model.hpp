#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace kchem {

//! Internal state (y1, y2) of the excitation-adaptation model.
using InternalState = std::array<double, 2>;

//---------------------------------------------------------------------------//
//! Symmetric discrete velocity set with positive quadrature weights.
struct VelocitySet {
  std::vector<double> speeds;
  std::vector<double> weights;

  static VelocitySet symmetric_pair(double speed);

  std::size_t size() const { return speeds.size(); }
  double measure() const;
  double max_speed() const;
  //! Index of the velocity -speeds[i].
  std::size_t mirror(std::size_t i) const;
  //! Throws ArgumentError unless finite, positive-weighted and symmetric.
  void validate() const;
};

//---------------------------------------------------------------------------//
enum class KernelKind { uniform, persistence, tabulated };

struct KernelSpec {
  KernelKind kind = KernelKind::uniform;
  double p_same = 0.5;
  //! Row-major (new velocity, old velocity) for the tabulated variant.
  std::vector<double> matrix;
};

//! Turning kernel K(v_new, v_old) on a discrete velocity set.
//!
//! Stochastic in both directions with respect to the velocity weights:
//! sum_v K(v, v') w_v = 1 and sum_v' K(v, v') w_v' = 1.
class TurningKernel {
 public:
  TurningKernel() = default;

  //! Throws ConfigError (kernel_normalization) if the tabulated matrix is
  //! not doubly stochastic within 1e-9; accepted matrices are rebalanced to
  //! round-off.
  static TurningKernel build(KernelSpec const& spec, VelocitySet const& velocities);

  std::size_t size() const { return n_; }
  double operator()(std::size_t v_new, std::size_t v_old) const { return k_[v_new * n_ + v_old]; }
  double bound() const;
  double column_sum(std::size_t v_old) const;
  double row_sum(std::size_t v_new) const;

  //! Generator B = K W - I of the relaxation f' = lambda B f (row-major).
  std::vector<double> generator() const;
  //! Operator norm of B in the weighted inner product sum_v w_v f_v g_v.
  double generator_norm() const;

  std::span<const double> weights() const { return w_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> k_;
  std::vector<double> w_;
};

//---------------------------------------------------------------------------//
enum class RateKind { constant, clipped_linear, saturating };

//! Turning rate as a function of the response variable y1; never negative.
struct RateSpec {
  RateKind kind = RateKind::constant;
  double rate = 1.0;        //!< constant rate, or intercept of the linear form
  double slope = 0.0;       //!< clipped-linear slope
  double rate_min = 0.0;    //!< saturating: floor reached for large y1
  double rate_max = 1.0;    //!< saturating: plateau for y1 <= 0
  double half_response = 1.0;
  double hill = 2.0;
  double responsiveness = 1.0;  //!< scales the y1 sensitivity

  double operator()(double y1) const;
  //! Exact supremum over [lo, hi] (every variant is monotone in y1).
  double sup_over(double lo, double hi) const;
};

//---------------------------------------------------------------------------//
enum class GainKind { linear, saturating };

//! Nonnegative scalar signal gain g(S).
struct GainSpec {
  GainKind kind = GainKind::linear;
  std::vector<double> gain;
  std::vector<double> saturation;

  double operator()(std::span<const double> s) const;
  void gradient(std::span<const double> s, std::span<double> out) const;
};

//---------------------------------------------------------------------------//
struct SignalParams {
  double d = 1.0;   //!< diffusivity
  double k = 1.0;   //!< production (or consumption) rate
  double k0 = 1.0;  //!< degradation rate
};

enum class ReactionKind { produce_degrade, consume };

//! Reaction term R(S, n).  produce_degrade: k n - K S with K = diag(k0)
//! unless a full coupling matrix is given; consume: -k n S.
struct Reaction {
  ReactionKind kind = ReactionKind::produce_degrade;
  std::vector<double> coupling;  //!< optional M x M row-major

  void evaluate(std::span<const SignalParams> params, std::span<const double> s, double n,
                std::span<double> out) const;
};

struct SignalSystem {
  std::vector<SignalParams> params;
  Reaction reaction;

  std::size_t components() const { return params.size(); }
};

//---------------------------------------------------------------------------//
struct ModelConfig {
  double t_e = 1.0;
  double t_a = 1.0;
  GainSpec g;
  RateSpec lambda;
  KernelSpec kernel_spec;
  TurningKernel kernel;
  VelocitySet velocities;
  SignalSystem signal;
  double length = 1.0;
  std::size_t nx = 64;
  std::size_t ny1 = 32;
  std::size_t ny2 = 32;

  static constexpr std::size_t internal_dim() { return 2; }
  std::size_t signal_dim() const { return signal.components(); }
};

//---------------------------------------------------------------------------//
std::array<double, 2>
cartoon_rhs(std::span<const double> s, InternalState const& y, ModelConfig const& cfg);

//! Divergence of the cartoon vector field in y (constant).
double cartoon_divergence(ModelConfig const& cfg);

double turning_rate(double y1, ModelConfig const& cfg);

double turning_kernel(std::size_t v_new, std::size_t v_old, TurningKernel const& kernel);

double combined_kernel(std::size_t v_new, std::size_t v_old, InternalState const& y,
                       ModelConfig const& cfg);

//! Rate of change of the signal seen by a cell moving with speed v.
std::vector<double> signal_derivative_along_trajectory(double v, std::span<const double> grad_s,
                                                       std::span<const double> dt_s);

}  // namespace kchem
