#include <gtest/gtest.h>

#include <cmath>

#include "gbesq/model_adapters.hpp"
#include "gbesq/stats.hpp"

using namespace gbesq;

namespace {

std::vector<double> exact_draws(const ModelAdapter& m, double t, std::size_t n, std::uint64_t seed) {
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    out[i] = sample_model(m, t, rng);
  });
  return out;
}

// Euler for dV = (a - b V) dt + s sqrt(V) dW with full truncation; piecewise (a, s) via callbacks.
template <class Coeffs>
std::vector<double> euler_square_root(double v0, double t, int steps, std::size_t n, std::uint64_t seed,
                                      Coeffs coeffs) {
  std::vector<double> out(n);
  const double h = t / steps, sh = std::sqrt(h);
  parallel_for(n, [&](std::size_t i) {
    RngStream rng(seed, i);
    double v = v0;
    for (int k = 0; k < steps; ++k) {
      const auto [a, b, s] = coeffs((k + 0.5) * h);
      const double vp = std::max(v, 0.0);
      v += (a - b * vp) * h + s * std::sqrt(vp) * sh * rng.normal();
    }
    out[i] = std::max(v, 0.0);
  });
  return out;
}

}  // namespace

TEST(SpaceMap, RoundTrip) {
  const std::vector<ModelAdapter> models{adapt_ou(-0.7, 0.3, 0.2, 2.0), adapt_cir(0.05, 0.8, 0.3, 0.04, 2.0),
                                         adapt_cev(0.1, 0.4, 0.3, 1.5, 2.0), adapt_cev(-0.2, 0.4, 0.0, 1.5, 2.0)};
  for (const auto& m : models)
    for (double t : {0.0, 0.3, 1.7})
      for (double v : {0.0, 1e-6, 0.01, 0.5, 1.0, 3.0, 40.0}) {
        const double back = m.space_map.to_model(t, m.space_map.to_process(t, v));
        EXPECT_NEAR(back, v, 1e-12 * std::max(1.0, v));
      }
}

TEST(AdaptOu, TimeChangeAndStart) {
  const auto m = adapt_ou(-0.5, 0.3, 0.4, 1.0);
  EXPECT_DOUBLE_EQ(m.gbesq.x0, 0.16);
  EXPECT_DOUBLE_EQ(m.gbesq.delta(0.1), 1.0);
  EXPECT_NEAR(m.time_change(0.7), -0.09 / (2.0 * -0.5) * (std::exp(0.7) - 1.0), 1e-14);
  EXPECT_EQ(adapt_ou(0.3, 1.0, 0.0, 1.0).gbesq.x0, 0.0);
  // mu -> 0: slope sigma^2 at 0 and the Brownian clock
  const auto z = adapt_ou(1e-15, 0.3, 1.0, 1.0);
  EXPECT_NEAR(z.time_change.derivative(0.0), 0.09, 1e-15);
  EXPECT_NEAR(z.time_change(0.8), 0.09 * 0.8, 1e-14);
  EXPECT_THROW(adapt_ou(0.1, 0.0, 1.0, 1.0), std::invalid_argument);
}

TEST(AdaptOu, SecondMomentMatchesEulerOfTheSde) {
  // V is |U| for dU = mu U dt + sigma dW
  const double mu = -0.8, sigma = 0.5, x = 0.3, t = 1.0;
  const auto v = exact_draws(adapt_ou(mu, sigma, x, t), t, 20000, 3);
  std::vector<double> u(20000);
  parallel_for(u.size(), [&](std::size_t i) {
    RngStream rng(4, i);
    double w = x;
    const int steps = 400;
    const double h = t / steps;
    for (int k = 0; k < steps; ++k) w += mu * w * h + sigma * std::sqrt(h) * rng.normal();
    u[i] = std::abs(w);
  });
  std::vector<double> v2, u2;
  for (double a : v) v2.push_back(a * a);
  for (double a : u) u2.push_back(a * a);
  const auto ev = accumulate(v2), eu = accumulate(u2);
  const double closed = x * x * std::exp(2.0 * mu * t) + sigma * sigma * std::expm1(2.0 * mu * t) / (2.0 * mu);
  EXPECT_NEAR(ev.mean(), closed, 4.0 * ev.std_error());
  EXPECT_NEAR(ev.mean(), eu.mean(), 4.0 * std::hypot(ev.std_error(), eu.std_error()));
  EXPECT_LT(ks_two_sample(v, u), ks_critical_1pct(v.size(), u.size()));
}

TEST(AdaptCir, DimensionAndTransitionLaw) {
  EXPECT_DOUBLE_EQ(adapt_cir(0.01, 0.5, 0.2, 0.1, 1.0).gbesq.delta(0.0), 1.0);
  EXPECT_THROW(adapt_cir(-0.1, 0.5, 0.2, 0.1, 1.0), std::invalid_argument);
  const double a = 0.06, b = 1.2, s = 0.3, v0 = 0.04, t = 1.0;
  const auto exact = exact_draws(adapt_cir(a, b, s, v0, t), t, 20000, 5);
  const auto euler = euler_square_root(v0, t, 1000, 20000, 6, [&](double) { return std::array<double, 3>{a, b, s}; });
  EXPECT_LT(ks_two_sample(exact, euler), ks_critical_1pct(exact.size(), euler.size()));
  const auto m = accumulate(exact);
  const double mean = v0 * std::exp(-b * t) + a / b * (1.0 - std::exp(-b * t));
  EXPECT_NEAR(m.mean(), mean, 4.0 * m.std_error());
}

TEST(AdaptCev, DimensionRange) {
  EXPECT_EQ(adapt_cev(0.1, 0.3, 0.5, 1.0, 1.0).gbesq.delta(0.0), 0.0);
  EXPECT_DOUBLE_EQ(adapt_cev(0.1, 0.3, 0.0, 1.0, 1.0).gbesq.delta(0.0), 1.0);
  EXPECT_DOUBLE_EQ(adapt_cev(0.1, 0.3, 0.25, 2.0, 1.0).gbesq.x0, std::pow(2.0, 1.5));
  EXPECT_THROW(adapt_cev(0.1, 0.3, 0.7, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(adapt_cev(0.1, 0.3, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST(AdaptCev, SquareRootCaseIsTheZeroDimensionCir) {
  // rho = 1/2: dV = mu V dt + sigma sqrt(V) dW, i.e. CIR with alpha = 0, beta = -mu
  const auto cev = adapt_cev(0.2, 0.4, 0.5, 0.8, 1.0), cir = adapt_cir(0.0, -0.2, 0.4, 0.8, 1.0);
  for (double t : {0.1, 0.5, 1.0}) {
    EXPECT_NEAR(cev.time_change(t), cir.time_change(t), 1e-14);
    EXPECT_NEAR(cev.space_map.to_model(t, 0.7), cir.space_map.to_model(t, 0.7), 1e-14);
  }
}

TEST(RegimePath, ValidationAndMerging) {
  RegimePath p{{0.0, 0.5, 0.5, 1.0, 2.0}, {0, 1, 1, 1}, {0.04, 0.08}, {0.2, 0.4}};
  const auto m = p.merged();
  EXPECT_EQ(m.times, (std::vector<double>{0.0, 0.5, 2.0}));
  EXPECT_EQ(m.states, (std::vector<int>{0, 1}));
  RegimePath bad = p;
  bad.sigma[1] = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = p;
  bad.states[0] = 2;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(AdaptExtendedCir, SingleAndTwoRegimes) {
  const auto one = adapt_extended_cir(RegimePath{{0.0, 2.0}, {0}, {0.04}, {0.2}}, 0.03, 2.0);
  EXPECT_DOUBLE_EQ(one.gbesq.delta(0.01), 4.0 * 0.04 / 0.04);
  EXPECT_NEAR(one.time_change(1.3), 0.04 * 1.3 / 4.0, 1e-16);
  const auto two = adapt_extended_cir(RegimePath{{0.0, 1.0, 2.0}, {0, 1}, {0.04, 0.08}, {0.2, 0.4}}, 0.03, 2.0);
  const double f1 = 0.01, f2 = f1 + 0.04;
  EXPECT_NEAR(two.time_change(1.0), f1, 1e-16);
  EXPECT_NEAR(two.time_change(2.0), f2, 1e-16);
  ASSERT_EQ(two.gbesq.delta.values().size(), 2u);
  EXPECT_NEAR(two.gbesq.delta.breakpoints()[1], f1, 1e-16);
  EXPECT_DOUBLE_EQ(two.gbesq.delta.values()[0], 4.0);
  EXPECT_DOUBLE_EQ(two.gbesq.delta.values()[1], 2.0);
  // the bond measure has density 4 / sigma^2 on each image piece
  const auto mu = model_time_lebesgue(two, 2.0);
  EXPECT_NEAR(mu.total_mass(), 2.0, 1e-12);
  EXPECT_NEAR(mu.density()(0.5 * f1), 100.0, 1e-9);
  EXPECT_NEAR(mu.density()(0.5 * (f1 + f2)), 25.0, 1e-9);
}

TEST(AdaptExtendedCir, TransitionLawMatchesEulerOfTheRegimeSde) {
  const RegimePath path{{0.0, 0.6, 1.0}, {1, 0}, {0.04, 0.08}, {0.2, 0.4}};
  const double r0 = 0.03, t = 1.0;
  const auto exact = exact_draws(adapt_extended_cir(path, r0, t), t, 20000, 8);
  const auto euler = euler_square_root(r0, t, 1000, 20000, 9, [&](double u) {
    const int k = u < 0.6 ? 1 : 0;
    return std::array<double, 3>{path.alpha[k], 0.0, path.sigma[k]};
  });
  EXPECT_LT(ks_two_sample(exact, euler), ks_critical_1pct(exact.size(), euler.size()));
}
