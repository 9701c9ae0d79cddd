#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "kchem/error.hpp"
#include "kchem/model.hpp"

using namespace kchem;

namespace {

VelocitySet four_speeds()
{
  return VelocitySet{{-2.0, -0.5, 0.5, 2.0}, {0.5, 1.0, 1.0, 0.5}};
}

}  // namespace

TEST_CASE("velocity sets validate symmetry and weights")
{
  auto const vs = four_speeds();
  CHECK_NOTHROW(vs.validate());
  CHECK(vs.measure() == doctest::Approx(3.0));
  CHECK(vs.max_speed() == 2.0);
  CHECK(vs.mirror(0) == 3);
  CHECK_THROWS_AS((VelocitySet{{-1.0, 2.0}, {1.0, 1.0}}.validate()), ArgumentError);
  CHECK_THROWS_AS((VelocitySet{{-1.0, 1.0}, {1.0, 2.0}}.validate()), ArgumentError);
  CHECK_THROWS_AS((VelocitySet{{-1.0, 1.0}, {1.0, 0.0}}.validate()), ArgumentError);
}

TEST_CASE("uniform and persistence kernels are doubly stochastic")
{
  auto const vs = four_speeds();
  for (auto kind : {KernelKind::uniform, KernelKind::persistence})
  {
    KernelSpec spec;
    spec.kind = kind;
    spec.p_same = 0.8;
    auto const k = TurningKernel::build(spec, vs);
    for (std::size_t i = 0; i < vs.size(); ++i)
    {
      CHECK(k.column_sum(i) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(k.row_sum(i) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  KernelSpec spec;
  spec.kind = KernelKind::persistence;
  spec.p_same = 0.9;
  auto const pair = TurningKernel::build(spec, VelocitySet::symmetric_pair(1.0));
  // Measure 2: same direction 2p/2, opposite 2(1-p)/2.
  CHECK(pair(1, 1) == doctest::Approx(0.9));
  CHECK(pair(0, 1) == doctest::Approx(0.1));
}

TEST_CASE("tabulated kernels: normalization is enforced and residuals rebalanced")
{
  auto const vs = VelocitySet::symmetric_pair(1.0);
  KernelSpec bad;
  bad.kind = KernelKind::tabulated;
  bad.matrix = {0.45, 0.45, 0.45, 0.45};  // columns sum to 0.9
  try
  {
    TurningKernel::build(bad, vs);
    FAIL("expected a normalization error");
  }
  catch (ConfigError const& e)
  {
    CHECK(e.code() == ErrorCode::kernel_normalization);
  }

  KernelSpec near;
  near.kind = KernelKind::tabulated;
  near.matrix = {0.3 + 4e-10, 0.7 - 4e-10, 0.7, 0.3};
  auto const k = TurningKernel::build(near, vs);
  for (std::size_t i = 0; i < 2; ++i)
  {
    CHECK(std::abs(k.column_sum(i) - 1.0) < 1e-15);
    CHECK(std::abs(k.row_sum(i) - 1.0) < 1e-15);
  }
  bad.matrix = {0.5, 0.5, -0.5, 1.5};
  CHECK_THROWS_AS(TurningKernel::build(bad, vs), ConfigError);
}

TEST_CASE("generator norm equals the spectral radius of the symmetrized generator")
{
  auto const vs = four_speeds();
  KernelSpec spec;
  spec.kind = KernelKind::persistence;
  spec.p_same = 0.7;
  auto const k = TurningKernel::build(spec, vs);
  auto const b = k.generator();
  // Oracle: largest |eigenvalue| of the self-adjoint form W^{1/2} B W^{-1/2}.
  Eigen::MatrixXd m(4, 4);
  for (int i = 0; i < 4; ++i)
  {
    for (int j = 0; j < 4; ++j)
      m(i, j) = std::sqrt(vs.weights[i]) * b[i * 4 + j] / std::sqrt(vs.weights[j]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  double const oracle = eig.eigenvalues().cwiseAbs().maxCoeff();
  CHECK(k.generator_norm() == doctest::Approx(oracle).epsilon(1e-12));
  // Generator columns conserve weighted mass: sum_i w_i B_ij = 0.
  for (int j = 0; j < 4; ++j)
  {
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
      s += vs.weights[i] * b[i * 4 + j];
    CHECK(std::abs(s) < 1e-14);
  }
}

TEST_CASE("turning rates are nonnegative with exact suprema")
{
  RateSpec sat;
  sat.kind = RateKind::saturating;
  sat.rate_min = 0.1;
  sat.rate_max = 1.0;
  sat.half_response = 0.5;
  sat.hill = 2.0;
  sat.responsiveness = 2.0;
  CHECK(sat(-3.0) == doctest::Approx(1.0));
  CHECK(sat(0.25) == doctest::Approx(0.55));  // responsiveness * y1 = half_response
  CHECK(sat.sup_over(-1.0, 1.0) == doctest::Approx(1.0));

  RateSpec lin;
  lin.kind = RateKind::clipped_linear;
  lin.rate = 1.0;
  lin.slope = -2.0;
  CHECK(lin(1.0) == 0.0);
  CHECK(lin(-1.0) == doctest::Approx(3.0));
  CHECK(lin.sup_over(-1.0, 2.0) == doctest::Approx(3.0));

  RateSpec c;
  c.rate = 0.7;
  CHECK(c(123.0) == 0.7);
}

TEST_CASE("gain gradient matches central differences")
{
  GainSpec g;
  g.kind = GainKind::saturating;
  g.gain = {2.0, 0.5};
  g.saturation = {1.5, 0.0};
  std::vector<double> s{0.7, 1.3}, grad(2);
  g.gradient(s, grad);
  for (std::size_t c = 0; c < 2; ++c)
  {
    double const h = 1e-6;
    auto sp = s, sm = s;
    sp[c] += h;
    sm[c] -= h;
    CHECK(grad[c] == doctest::Approx((g(sp) - g(sm)) / (2 * h)).epsilon(1e-8));
  }
  CHECK(g(std::vector<double>{-1.0, -1.0}) == 0.0);
}

TEST_CASE("cartoon vector field and its divergence")
{
  ModelConfig cfg;
  cfg.t_e = 0.5;
  cfg.t_a = 2.0;
  cfg.g.gain = {3.0};
  cfg.g.saturation = {0.0};
  std::vector<double> s{2.0};
  auto const f = cartoon_rhs(s, {1.0, 4.0}, cfg);
  CHECK(f[0] == doctest::Approx((6.0 - 1.0 - 4.0) / 0.5));
  CHECK(f[1] == doctest::Approx((6.0 - 4.0) / 2.0));
  // Divergence by central differences of the field.
  double const h = 1e-5;
  double const fd = (cartoon_rhs(s, {1.0 + h, 4.0}, cfg)[0] - cartoon_rhs(s, {1.0 - h, 4.0}, cfg)[0]) / (2 * h)
                    + (cartoon_rhs(s, {1.0, 4.0 + h}, cfg)[1] - cartoon_rhs(s, {1.0, 4.0 - h}, cfg)[1]) / (2 * h);
  CHECK(cartoon_divergence(cfg) == doctest::Approx(fd).epsilon(1e-9));
}

TEST_CASE("combined kernel and trajectory derivative")
{
  ModelConfig cfg;
  cfg.velocities = VelocitySet::symmetric_pair(1.0);
  cfg.kernel = TurningKernel::build({}, cfg.velocities);
  cfg.lambda.rate = 2.0;
  CHECK(combined_kernel(0, 1, {0.0, 0.0}, cfg) == doctest::Approx(1.0));
  CHECK(turning_kernel(0, 1, cfg.kernel) == doctest::Approx(0.5));
  std::vector<double> gx{0.5, -1.0}, gt{0.25, 2.0};
  auto const d = signal_derivative_along_trajectory(-2.0, gx, gt);
  CHECK(d[0] == doctest::Approx(-0.75));
  CHECK(d[1] == doctest::Approx(4.0));
}

TEST_CASE("reaction terms")
{
  std::vector<SignalParams> p{{1.0, 2.0, 0.5}, {1.0, 1.0, 3.0}};
  Reaction r;
  std::vector<double> s{1.0, 2.0}, out(2);
  r.evaluate(p, s, 4.0, out);
  CHECK(out[0] == doctest::Approx(8.0 - 0.5));
  CHECK(out[1] == doctest::Approx(4.0 - 6.0));
  r.coupling = {1.0, 0.5, 0.0, 2.0};
  r.evaluate(p, s, 4.0, out);
  CHECK(out[0] == doctest::Approx(8.0 - 2.0));
  r.kind = ReactionKind::consume;
  r.evaluate(p, s, 4.0, out);
  CHECK(out[1] == doctest::Approx(-8.0));
}
