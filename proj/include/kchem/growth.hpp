#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "kchem/model.hpp"

namespace kchem {

//! Nondecreasing comparison function: c0 + c1 * r^p, or a piecewise-linear
//! table held constant past its last abscissa.
struct GrowthFunction {
  enum class Kind { power, table };
  Kind kind = Kind::power;
  double c0 = 0.0;
  double c1 = 0.0;
  double exponent = 1.0;
  std::vector<double> r;
  std::vector<double> value;

  static GrowthFunction power(double c0, double c1, double p) { return {Kind::power, c0, c1, p, {}, {}}; }
  double operator()(double x) const;
  //! True if nonnegative and nondecreasing at `samples` points of [0, hi].
  bool admissible(double hi, std::size_t samples) const;
};

//! Comparison functions and constants of the growth hypotheses.
struct GrowthSpec {
  GrowthFunction phi = GrowthFunction::power(0.0, 1.0, 1.0);    //!< |g| + |grad g| <= phi(|S|)
  GrowthFunction psi = GrowthFunction::power(1.0, 0.0, 1.0);    //!< |T| + |grad_y T| <= psi(|y|)
  GrowthFunction lambda_fn = GrowthFunction::power(0.0, 1.0, 1.0);
  GrowthFunction pi = GrowthFunction::power(0.0, 0.0, 1.0);
  double omega = 1.0;
  double sigma = 1.0;
  double gamma = 1.0;
  double c_lambda = 1.0;   //!< lambda <= c_lambda (1 + Lambda(|C|) + |dC/dt|)
  double c_y1 = 1.0;       //!< |y1| <= c_y1 (1 + |dC/dt|^omega)
  double c_rate = 1.0;     //!< lambda <= c_rate (1 + |y1|^sigma)
  double c_div = 1.0;      //!< |div_y F| <= c_div (1 + Pi(|C|))
  double c_div_one = 1.0;  //!< div_y F <= c_div_one (1 + Pi(|C|) + |y|^gamma)
  double c_bounded = 0.0;  //!< lambda <= c_bounded; zero means undeclared

  double omega_sigma() const { return omega * sigma; }
  double omega_gamma() const { return omega * gamma; }
};

//! Ranges over which the hypotheses are sampled.
struct SampleBox {
  double s_max = 0.0;     //!< largest |S|
  double dcdt_max = 0.0;  //!< largest |dC/dt|
  std::array<double, 2> y_lo{0.0, 0.0};
  std::array<double, 2> y_hi{0.0, 0.0};
  std::size_t points = 201;
};

struct HypothesisResult {
  std::string id;
  bool passed = false;
  std::string witness;  //!< empty when passed
};

struct ValidationReport {
  std::vector<HypothesisResult> hypotheses;
  double kernel_bound = 0.0;  //!< C_K
  double rate_sup = 0.0;      //!< sup of lambda over the y box
  bool cartoon_parabolic = false;    //!< g and T growth bounds hold
  bool rate_growth_elliptic = false; //!< lambda growth in |C|, |dC/dt| with bounded divergence
  bool power_growth = false;         //!< power-law lambda with dissipative divergence
  bool bounded_rate = false;         //!< bounded lambda

  HypothesisResult const* find(std::string const& id) const;
  bool passed(std::string const& id) const;
  std::vector<std::string> regimes() const;
};

ValidationReport
validate_growth_conditions(ModelConfig const& cfg, GrowthSpec const& gs, SampleBox const& box);

}  // namespace kchem
