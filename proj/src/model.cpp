#include "kchem/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "kchem/error.hpp"

namespace kchem {

//---------------------------------------------------------------------------//
VelocitySet VelocitySet::symmetric_pair(double speed)
{
  return VelocitySet{{-speed, speed}, {1.0, 1.0}};
}

double VelocitySet::measure() const
{
  double s = 0.0;
  for (double w : weights)
    s += w;
  return s;
}

double VelocitySet::max_speed() const
{
  double m = 0.0;
  for (double v : speeds)
    m = std::max(m, std::abs(v));
  return m;
}

std::size_t VelocitySet::mirror(std::size_t i) const
{
  for (std::size_t j = 0; j < speeds.size(); ++j)
  {
    if (speeds[j] == -speeds[i])
      return j;
  }
  throw ArgumentError("velocity set is not symmetric");
}

void VelocitySet::validate() const
{
  if (speeds.empty() || speeds.size() != weights.size())
    throw ArgumentError("velocity set needs matching nonempty speeds and weights");
  for (std::size_t i = 0; i < speeds.size(); ++i)
  {
    if (!std::isfinite(speeds[i]) || !std::isfinite(weights[i]) || weights[i] <= 0.0)
      throw ArgumentError("velocity " + std::to_string(i) + " has invalid speed or weight");
    std::size_t const j = mirror(i);
    if (weights[j] != weights[i])
      throw ArgumentError("velocity set weights are not symmetric");
  }
}

//---------------------------------------------------------------------------//
namespace {

double max_normalization_defect(TurningKernel const& k)
{
  double worst = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i)
  {
    worst = std::max(worst, std::abs(k.column_sum(i) - 1.0));
    worst = std::max(worst, std::abs(k.row_sum(i) - 1.0));
  }
  return worst;
}

}  // namespace

TurningKernel TurningKernel::build(KernelSpec const& spec, VelocitySet const& velocities)
{
  velocities.validate();
  TurningKernel result;
  std::size_t const n = velocities.size();
  result.n_ = n;
  result.w_ = velocities.weights;
  result.k_.assign(n * n, 0.0);
  double const measure = velocities.measure();

  switch (spec.kind)
  {
    case KernelKind::uniform:
      std::fill(result.k_.begin(), result.k_.end(), 1.0 / measure);
      break;
    case KernelKind::persistence: {
      if (!(spec.p_same >= 0.0 && spec.p_same <= 1.0))
        throw ConfigError(ErrorCode::invalid_value, "model.kernel.p_same", "must lie in [0, 1]");
      // Each direction class carries half of the measure by symmetry.
      double const same = 2.0 * spec.p_same / measure;
      double const opposite = 2.0 * (1.0 - spec.p_same) / measure;
      for (std::size_t i = 0; i < n; ++i)
      {
        for (std::size_t j = 0; j < n; ++j)
        {
          if (velocities.speeds[i] == 0.0 || velocities.speeds[j] == 0.0)
            throw ConfigError(ErrorCode::invalid_value, "model.kernel.kind",
                              "persistence kernel needs nonzero speeds");
          bool const aligned = (velocities.speeds[i] > 0.0) == (velocities.speeds[j] > 0.0);
          result.k_[i * n + j] = aligned ? same : opposite;
        }
      }
      break;
    }
    case KernelKind::tabulated: {
      if (spec.matrix.size() != n * n)
        throw ConfigError(ErrorCode::invalid_value, "model.kernel.matrix",
                          "expected " + std::to_string(n * n) + " entries");
      for (double v : spec.matrix)
      {
        if (!std::isfinite(v) || v < 0.0)
          throw ConfigError(ErrorCode::positivity, "model.kernel.matrix",
                            "entries must be finite and nonnegative");
      }
      result.k_ = spec.matrix;
      double const defect = max_normalization_defect(result);
      if (defect > 1e-9)
        throw ConfigError(ErrorCode::kernel_normalization, "model.kernel.matrix",
                          "weighted row/column sums deviate from 1 by "
                              + std::to_string(defect));
      // Alternate row and column scaling removes the residual text rounding.
      for (int iter = 0; iter < 200 && max_normalization_defect(result) > 1e-15; ++iter)
      {
        for (std::size_t i = 0; i < n; ++i)
        {
          double const s = result.row_sum(i);
          for (std::size_t j = 0; j < n; ++j)
            result.k_[i * n + j] /= s;
        }
        for (std::size_t j = 0; j < n; ++j)
        {
          double const s = result.column_sum(j);
          for (std::size_t i = 0; i < n; ++i)
            result.k_[i * n + j] /= s;
        }
      }
      break;
    }
  }
  return result;
}

double TurningKernel::bound() const
{
  return k_.empty() ? 0.0 : *std::max_element(k_.begin(), k_.end());
}

double TurningKernel::column_sum(std::size_t v_old) const
{
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    s += k_[i * n_ + v_old] * w_[i];
  return s;
}

double TurningKernel::row_sum(std::size_t v_new) const
{
  double s = 0.0;
  for (std::size_t j = 0; j < n_; ++j)
    s += k_[v_new * n_ + j] * w_[j];
  return s;
}

std::vector<double> TurningKernel::generator() const
{
  std::vector<double> b(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i)
  {
    for (std::size_t j = 0; j < n_; ++j)
      b[i * n_ + j] = k_[i * n_ + j] * w_[j] - (i == j ? 1.0 : 0.0);
  }
  return b;
}

double TurningKernel::generator_norm() const
{
  if (n_ == 0)
    return 0.0;
  Eigen::MatrixXd m(n_, n_);
  auto const b = generator();
  for (std::size_t i = 0; i < n_; ++i)
  {
    for (std::size_t j = 0; j < n_; ++j)
      m(i, j) = std::sqrt(w_[i]) * b[i * n_ + j] / std::sqrt(w_[j]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

//---------------------------------------------------------------------------//
double RateSpec::operator()(double y1) const
{
  double const y = responsiveness * y1;
  switch (kind)
  {
    case RateKind::constant:
      return std::max(rate, 0.0);
    case RateKind::clipped_linear:
      return std::max(0.0, rate + slope * y);
    case RateKind::saturating: {
      double const kn = std::pow(half_response, hill);
      double const yn = std::pow(std::max(y, 0.0), hill);
      return std::max(0.0, rate_min + (rate_max - rate_min) * kn / (kn + yn));
    }
  }
  return 0.0;
}

double RateSpec::sup_over(double lo, double hi) const
{
  return std::max((*this)(lo), (*this)(hi));
}

//---------------------------------------------------------------------------//
double GainSpec::operator()(std::span<const double> s) const
{
  if (s.size() != gain.size())
    throw ArgumentError("signal dimension does not match the gain specification");
  double g = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
  {
    double const si = std::max(s[i], 0.0);
    if (kind == GainKind::linear)
      g += gain[i] * si;
    else
      g += gain[i] * si / (1.0 + saturation[i] * si);
  }
  if (!std::isfinite(g))
    throw ModelError("non-finite signal gain");
  return g;
}

void GainSpec::gradient(std::span<const double> s, std::span<double> out) const
{
  if (s.size() != gain.size() || out.size() != gain.size())
    throw ArgumentError("signal dimension does not match the gain specification");
  for (std::size_t i = 0; i < s.size(); ++i)
  {
    if (s[i] < 0.0)
    {
      out[i] = 0.0;
      continue;
    }
    if (kind == GainKind::linear)
    {
      out[i] = gain[i];
    }
    else
    {
      double const q = 1.0 + saturation[i] * s[i];
      out[i] = gain[i] / (q * q);
    }
  }
}

//---------------------------------------------------------------------------//
void Reaction::evaluate(std::span<const SignalParams> params, std::span<const double> s, double n,
                        std::span<double> out) const
{
  std::size_t const m = params.size();
  for (std::size_t i = 0; i < m; ++i)
  {
    if (kind == ReactionKind::consume)
    {
      out[i] = -params[i].k * n * s[i];
      continue;
    }
    double r = params[i].k * n;
    if (coupling.empty())
    {
      r -= params[i].k0 * s[i];
    }
    else
    {
      for (std::size_t j = 0; j < m; ++j)
        r -= coupling[i * m + j] * s[j];
    }
    out[i] = r;
  }
}

//---------------------------------------------------------------------------//
std::array<double, 2>
cartoon_rhs(std::span<const double> s, InternalState const& y, ModelConfig const& cfg)
{
  double const g = cfg.g(s);
  std::array<double, 2> r{(g - (y[0] + y[1])) / cfg.t_e, (g - y[1]) / cfg.t_a};
  if (!std::isfinite(r[0]) || !std::isfinite(r[1]))
    throw ModelError("non-finite internal dynamics");
  return r;
}

double cartoon_divergence(ModelConfig const& cfg)
{
  return -(1.0 / cfg.t_e + 1.0 / cfg.t_a);
}

double turning_rate(double y1, ModelConfig const& cfg)
{
  return cfg.lambda(y1);
}

double turning_kernel(std::size_t v_new, std::size_t v_old, TurningKernel const& kernel)
{
  if (v_new >= kernel.size() || v_old >= kernel.size())
    throw ArgumentError("velocity index out of range");
  return kernel(v_new, v_old);
}

double combined_kernel(std::size_t v_new, std::size_t v_old, InternalState const& y,
                       ModelConfig const& cfg)
{
  return turning_rate(y[0], cfg) * turning_kernel(v_new, v_old, cfg.kernel);
}

std::vector<double> signal_derivative_along_trajectory(double v, std::span<const double> grad_s,
                                                       std::span<const double> dt_s)
{
  if (grad_s.size() != dt_s.size())
    throw ArgumentError("gradient and time derivative sizes differ");
  std::vector<double> out(grad_s.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = v * grad_s[i] + dt_s[i];
  return out;
}

}  // namespace kchem
