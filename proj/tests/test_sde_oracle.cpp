#include <gtest/gtest.h>

#include <cmath>

#include "gbesq/samplers.hpp"
#include "gbesq/sde_oracle.hpp"

using namespace gbesq;

namespace {

const auto kStep = PiecewiseFn::step({0.0, 0.5, 1.0}, {1.0, 2.0});

EulerConfig small(std::size_t paths, int steps, std::uint64_t seed = 7) {
  EulerConfig c;
  c.n_paths = paths;
  c.n_steps = steps;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(EulerGrid, ContainsBreakpointsOnce) {
  const auto g = euler_grid(1.0, 4, {0.5, 0.3, 0.3, 1.5, -1.0});
  EXPECT_EQ(g, (std::vector<double>{0.0, 0.25, 0.3, 0.5, 0.75, 1.0}));
  EXPECT_THROW(euler_grid(1.0, 0, {}), std::invalid_argument);
}

TEST(EulerEstimate, ZeroProcessIsExactlyOne) {
  const auto spec = make_spec(PiecewiseFn::constant(0.0, 1.0), 0.0);
  const auto e = euler_estimate(spec, TerminalExp{0.7}, 1.0, small(100, 10));
  EXPECT_EQ(e.value, 1.0);
  EXPECT_EQ(e.std_error, 0.0);
  const auto f = euler_estimate(spec, IntegralExp{RadonMeasure::lebesgue(1.0).with_atom(0.5, 2.0)}, 1.0, small(100, 10));
  EXPECT_EQ(f.value, 1.0);
}

TEST(EulerEstimate, MeanIsStartPlusIntegratedDimension) {
  const auto spec = make_spec(kStep, 1.0);
  const auto e = euler_estimate(spec, TerminalMean{}, 1.0, small(20000, 200));
  EXPECT_NEAR(e.value, 1.0 + kStep.integral(0.0, 1.0), 4.0 * e.std_error);
}

TEST(EulerEstimate, TerminalAndIntegralTransforms) {
  const auto spec = make_spec(kStep, 1.0);
  const auto mu = RadonMeasure::lebesgue(1.0, 0.5).with_atom(0.5, 0.3);
  const auto est = euler_estimates(spec, {TerminalExp{0.7}, IntegralExp{mu}}, 1.0, small(40000, 400));
  EXPECT_NEAR(est[0].value, transition_laplace(spec, 1.0, 0.7), 3.0 * est[0].std_error);
  EXPECT_NEAR(est[1].value, functional_laplace(spec, mu), 3.0 * est[1].std_error);
  EXPECT_THROW(euler_estimates(spec, {IntegralExp{mu}, IntegralExp{RadonMeasure::lebesgue(1.0)}}, 1.0, small(10, 10)),
               std::invalid_argument);
}

TEST(EulerEstimate, KernelBridgeOfAConstantDimension) {
  const auto delta = PiecewiseFn::constant(2.0, 1.0);
  const auto mu = RadonMeasure::lebesgue(1.0, 0.5);
  const auto e = euler_estimate(make_spec(delta, 1.0), KernelBridge{1.0, 0.05, mu}, 1.0, small(100000, 200));
  EXPECT_NEAR(e.value, bridge_laplace(delta, 1.0, 1.0, 1.0, mu, mixture_coeffs(delta, 1.0, 1.0, 1.0)),
              3.0 * e.std_error);
}

TEST(EulerSamples, StayNonnegativeAndAreReproducible) {
  const auto spec = make_spec(PiecewiseFn::constant(0.3, 1.0), 0.05);
  auto cfg = small(2000, 100);
  cfg.threads = 1;
  const auto a = euler_terminal_samples(spec, 1.0, cfg);
  cfg.threads = 3;
  const auto b = euler_terminal_samples(spec, 1.0, cfg);
  EXPECT_EQ(a, b);
  for (double v : a) EXPECT_GE(v, 0.0);
}

TEST(CoupledMonotonicity, IdenticalSpecsNeverCross) {
  const auto spec = make_spec(kStep, 0.5);
  EXPECT_EQ(coupled_monotonicity_check(spec, spec, 1.0, small(500, 500)), 0.0);
}

TEST(CoupledMonotonicity, ComparisonTheorem) {
  const auto cfg = small(2000, 2000);
  EXPECT_LT(coupled_monotonicity_check(make_spec(PiecewiseFn::constant(0.0, 1.0), 0.0),
                                       make_spec(PiecewiseFn::constant(1.0, 1.0), 1.0), 1.0, cfg),
            1e-3);
  EXPECT_LT(coupled_monotonicity_check(make_spec(PiecewiseFn::constant(1.0, 1.0), 0.5),
                                       make_spec(PiecewiseFn::constant(2.0, 1.0), 0.5), 1.0, cfg),
            1e-3);
}

TEST(CoupledMonotonicity, Preconditions) {
  const auto a = make_spec(PiecewiseFn::constant(1.0, 1.0), 1.0), b = make_spec(PiecewiseFn::constant(2.0, 1.0), 0.5);
  EXPECT_THROW(coupled_monotonicity_check(a, b, 1.0, small(10, 10)), std::invalid_argument);
  EXPECT_THROW(coupled_monotonicity_check(b.without_drift(), make_spec(PiecewiseFn::constant(1.0, 1.0), 2.0), 1.0,
                                          small(10, 10)),
               std::invalid_argument);
}
