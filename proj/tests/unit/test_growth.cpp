#include <string>

#include "doctest.h"
#include "kchem/error.hpp"
#include "kchem/growth.hpp"

using namespace kchem;

namespace {

ModelConfig compliant_model()
{
  ModelConfig cfg;
  cfg.t_e = 0.25;
  cfg.t_a = 1.0;
  cfg.velocities = VelocitySet::symmetric_pair(1.0);
  cfg.kernel = TurningKernel::build({}, cfg.velocities);
  cfg.g.gain = {1.0};
  cfg.g.saturation = {0.0};
  cfg.lambda.kind = RateKind::saturating;
  cfg.lambda.rate_min = 0.1;
  cfg.lambda.rate_max = 1.0;
  cfg.signal.params = {{1.0, 1.0, 0.25}};
  return cfg;
}

GrowthSpec compliant_growth()
{
  GrowthSpec gs;
  gs.phi = GrowthFunction::power(1.0, 1.0, 1.0);
  gs.psi = GrowthFunction::power(1.0, 1.0, 1.0);
  gs.lambda_fn = GrowthFunction::power(0.0, 0.0, 1.0);
  gs.pi = GrowthFunction::power(0.0, 0.0, 1.0);
  gs.c_div = 5.5;
  gs.c_div_one = 5.5;
  return gs;
}

SampleBox box()
{
  SampleBox b;
  b.s_max = 1.0;
  b.dcdt_max = 2.0;
  b.y_lo = {-1.2, -0.1};
  b.y_hi = {1.3, 1.1};
  return b;
}

}  // namespace

TEST_CASE("growth functions: power law and tables")
{
  auto const p = GrowthFunction::power(1.0, 2.0, 0.5);
  CHECK(p(4.0) == doctest::Approx(5.0));
  CHECK(p.admissible(10.0, 50));
  GrowthFunction t;
  t.kind = GrowthFunction::Kind::table;
  t.r = {0.0, 1.0, 3.0};
  t.value = {1.0, 2.0, 6.0};
  CHECK(t(0.5) == doctest::Approx(1.5));
  CHECK(t(2.0) == doctest::Approx(4.0));
  CHECK(t(9.0) == doctest::Approx(6.0));
  CHECK(t.admissible(5.0, 40));
  t.value = {1.0, 0.5, 6.0};
  CHECK_FALSE(t.admissible(5.0, 40));
}

TEST_CASE("a compliant cartoon model passes every hypothesis")
{
  auto const r = validate_growth_conditions(compliant_model(), compliant_growth(), box());
  for (auto const& h : r.hypotheses)
  {
    INFO(h.id << " " << h.witness);
    CHECK(h.passed);
  }
  CHECK(r.bounded_rate);
  CHECK(r.cartoon_parabolic);
  CHECK(r.kernel_bound == doctest::Approx(0.5));
  CHECK(r.rate_sup == doctest::Approx(1.0));
}

TEST_CASE("violations are reported with a witness")
{
  auto cfg = compliant_model();
  auto gs = compliant_growth();
  SUBCASE("unbounded clipped-linear rate")
  {
    cfg.lambda.kind = RateKind::clipped_linear;
    cfg.lambda.rate = 1.0;
    cfg.lambda.slope = -1.0;
    auto const r = validate_growth_conditions(cfg, gs, box());
    CHECK_FALSE(r.passed("bounded_rate"));
    CHECK_FALSE(r.bounded_rate);
    CHECK_FALSE(r.find("bounded_rate")->witness.empty());
    gs.c_bounded = 10.0;
    CHECK(validate_growth_conditions(cfg, gs, box()).bounded_rate);
  }
  SUBCASE("exponent product above one")
  {
    gs.omega = 2.0;
    gs.sigma = 0.75;
    auto const r = validate_growth_conditions(cfg, gs, box());
    CHECK_FALSE(r.passed("rate_power_growth"));
    CHECK(r.find("rate_power_growth")->witness.find("omega*sigma") != std::string::npos);
  }
  SUBCASE("gain growth bound too small")
  {
    gs.phi = GrowthFunction::power(0.0, 1.0, 1.0);
    CHECK_FALSE(validate_growth_conditions(cfg, gs, box()).passed("gain_growth"));
  }
  SUBCASE("divergence bound too small")
  {
    gs.c_div = 4.0;
    CHECK_FALSE(validate_growth_conditions(cfg, gs, box()).passed("divergence_growth"));
  }
  SUBCASE("empty box")
  {
    auto b = box();
    b.y_lo[0] = 2.0;
    CHECK_THROWS_AS(validate_growth_conditions(cfg, gs, b), ArgumentError);
  }
}
