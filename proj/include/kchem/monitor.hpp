#pragma once

#include <span>
#include <string>
#include <vector>

#include "kchem/grid.hpp"
#include "kchem/growth.hpp"
#include "kchem/model.hpp"
#include "kchem/signal.hpp"

namespace kchem {

//! Super-solution of w' <= a w ln w + b w with w(0) = w0:
//! [w0 exp(int_0^t b e^{-A})]^{exp A}, A = int_0^t a, on the tabulation grid.
//! a and b are taken piecewise linear between grid points.
std::vector<double> gronwall_envelope(double w0, std::span<const double> a, std::span<const double> b,
                                      std::span<const double> t_grid);

//! Same, returning ln of the envelope (finite where the envelope overflows).
std::vector<double> gronwall_log_envelope(double w0, std::span<const double> a,
                                          std::span<const double> b, std::span<const double> t_grid);

struct LedgerRow {
  double t = 0.0;
  std::string inequality;
  double measured = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  bool violated = false;
};

struct BoundLedger {
  std::vector<std::string> header;  //!< constant derivation, one item per line
  std::vector<LedgerRow> rows;

  std::size_t violations() const;
  std::size_t violations(std::string const& prefix) const;
};

//! Measured quantities at one monitor time.
struct MonitorSample {
  double t = 0.0;
  double f_l1 = 0.0;
  double f_l2 = 0.0;
  double n_l1 = 0.0;
  double n_l2 = 0.0;
  std::vector<double> s_sup;
  std::vector<double> sx_sup;
  std::vector<double> st_sup;
  double jacobian_inverse = 0.0;  //!< largest measured inverse Jacobian determinant
};

enum class SignalMode { elliptic, parabolic };

//! Inputs to the explicit envelope constants.
struct EnvelopeConstants {
  SignalMode mode = SignalMode::elliptic;
  SignalSystem system;
  PeriodicGrid grid;
  double max_speed = 0.0;
  double velocity_measure = 0.0;  //!< |V|
  double y_area = 0.0;            //!< area of the y grid box
  double divergence_sup = 0.0;    //!< sup |div_y F|
  double generator_norm = 0.0;    //!< weighted norm of K W - I
  double rate_sup = 0.0;          //!< sup lambda over the y box (bounded-rate route)
  double scale = 1.0;             //!< multiplies every constant; < 1 is a negative control
  SignalField initial_signal;     //!< parabolic mode only
};

//! Ledger of the a priori bounds: the L2 Gronwall envelope, the Jacobian
//! bound, and the signal sup/derivative bounds at every sample.
BoundLedger check_a_priori_bounds(std::span<const MonitorSample> samples, EnvelopeConstants const& k,
                                  GrowthSpec const& gs);

struct ConcentrationMetrics {
  double peak = 0.0;
  double peak_location = 0.0;
  double variance = 0.0;
  double mass = 0.0;
};

ConcentrationMetrics concentration_metrics(std::span<const double> n, PeriodicGrid const& grid);

}  // namespace kchem
