#include <gtest/gtest.h>

#include <cmath>

#include "gbesq/propagator.hpp"

using namespace gbesq;

namespace {

RadonMeasure messy_measure() {
  return RadonMeasure({{0.15, 0.7}, {0.6, 1.9}}, PiecewiseFn::step({0.0, 0.25, 0.5, 0.9, 1.0}, {0.3, 4.0, 0.0, 1.2}), 1.0);
}

}  // namespace

TEST(Propagator, DensityPieceClosedForm) {
  const auto p = density_propagator(0.5, 1.0);  // k = 1
  EXPECT_NEAR(p.a11(), std::cosh(1.0), 1e-15);
  EXPECT_NEAR(p.a12(), std::sinh(1.0), 1e-15);
  EXPECT_NEAR(p.a21(), std::sinh(1.0), 1e-15);
  EXPECT_NEAR(p.a22(), std::cosh(1.0), 1e-15);
  const auto z = density_propagator(0.0, 0.7);
  EXPECT_EQ(z.a12(), 0.7);
  EXPECT_EQ(z.a21(), 0.0);
}

TEST(Propagator, LebesgueGivesSinhOverK) {
  for (double alpha : {0.1, 0.5, 2.0}) {
    const double k = std::sqrt(2.0 * alpha);
    const auto p = full_propagator(RadonMeasure::lebesgue(1.0, alpha), 0.0, 1.0);
    EXPECT_NEAR(p.a12(), std::sinh(k) / k, 1e-14);
  }
}

TEST(Propagator, HeavyPiecesStayFinite) {
  const auto p = density_propagator(5000.0, 10.0);  // k L = 1000
  EXPECT_TRUE(std::isfinite(p.m11));
  EXPECT_NEAR(p.log_scale, 1000.0, 1e-9);
  const double k = 100.0;
  EXPECT_NEAR(std::log(p.m12) + p.log_scale, 1000.0 - std::log(2.0 * k), 1e-12);
}

TEST(Propagator, DiracAfterFreePiece) {
  // atom lambda at t after a free piece: psi(t) = t, psi'(t+) = 1 + 2 lambda t
  const double t = 0.8, lambda = 1.7;
  const auto p = full_propagator(RadonMeasure::dirac(t, lambda, t), 0.0, t);
  EXPECT_NEAR(p.a12(), t, 1e-15);
  EXPECT_NEAR(p.a22(), 1.0 + 2.0 * lambda * t, 1e-15);
}

TEST(Propagator, ComposeRejectsGaps) {
  EXPECT_THROW(compose(density_propagator(1.0, 0.5, 0.0), density_propagator(1.0, 0.5, 0.6)), std::invalid_argument);
  EXPECT_THROW(density_propagator(-1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(atom_propagator(-0.1), std::invalid_argument);
}

TEST(Propagator, UnitDeterminant) {
  const auto mu = messy_measure();
  for (double u : {0.0, 0.1, 0.15, 0.4}) {
    for (double v : {0.6, 0.75, 1.0}) {
      EXPECT_NEAR(full_propagator(mu, u, v).det(), 1.0, 1e-12) << u << " " << v;
    }
  }
  EXPECT_NEAR(full_propagator(RadonMeasure::lebesgue(1.0, 3.0), 0.0, 1.0).det(), 1.0, 1e-12);
}

TEST(Propagator, PsiIsInvariantUnderTimeReversal) {
  const auto mu = messy_measure();
  const auto p = full_propagator(mu, 0.0, 1.0);
  const auto q = full_propagator(mu.reversed(1.0), 0.0, 1.0);
  EXPECT_NEAR(q.a12() / p.a12(), 1.0, 1e-12);
  EXPECT_NEAR(q.a11(), p.reversed().a11(), 1e-12 * std::abs(p.a22()));
  EXPECT_NEAR(q.a22(), p.reversed().a22(), 1e-12 * std::abs(p.a11()));
}

TEST(Propagator, SplittingAPieceChangesNothing) {
  const auto whole = density_propagator(0.9, 1.0);
  const auto split = compose(density_propagator(0.9, 0.37, 0.0), density_propagator(0.9, 0.63, 0.37));
  EXPECT_NEAR(whole.a11(), split.a11(), 1e-14);
  EXPECT_NEAR(whole.a12(), split.a12(), 1e-14);
  EXPECT_NEAR(whole.a21(), split.a21(), 1e-14);
}

TEST(DecayingSolution, DiracCase) {
  for (double t : {0.5, 1.0, 3.0}) {
    for (double lambda : {0.01, 0.3, 1.0, 7.5, 200.0}) {
      const auto phi = decaying_solution(RadonMeasure::dirac(t, lambda, t), t);
      EXPECT_NEAR(phi.dphi0(), -2.0 * lambda / (1.0 + 2.0 * lambda * t), 1e-13);
      EXPECT_NEAR(phi.phi_at(t), 1.0 / (1.0 + 2.0 * lambda * t), 1e-13);
      EXPECT_NEAR(phi.phi_at(0.5 * t), 1.0 - lambda * t / (1.0 + 2.0 * lambda * t), 1e-13);
    }
  }
}

TEST(DecayingSolution, LebesgueCase) {
  // Phi(s) = cosh(k (a - s)) / cosh(k a)
  const double a = 1.3;
  for (double alpha : {0.1, 2.0, 800.0}) {
    const double k = std::sqrt(2.0 * alpha);
    const auto phi = decaying_solution(RadonMeasure::lebesgue(a, alpha), a);
    EXPECT_NEAR(phi.dphi0(), -k * std::tanh(k * a), 1e-11 * k);
    for (double s : {0.2, 0.65, 1.3}) {
      const double expected = k * (a - s) - k * a + std::log1p(std::exp(-2.0 * k * (a - s))) - std::log1p(std::exp(-2.0 * k * a));
      EXPECT_NEAR(phi.log_phi_at(s), expected, 1e-11 * (1.0 + std::abs(expected)));
    }
  }
}

TEST(DecayingSolution, PositiveAndNonIncreasing) {
  const auto phi = decaying_solution(messy_measure(), 1.0);
  double prev = 0.0;
  for (double s = 0.0; s <= 1.0; s += 0.01) {
    const double v = phi.log_phi_at(s);
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
  EXPECT_EQ(phi.log_phi_at(0.0), 0.0);
}

TEST(DecayingSolution, RejectsSupportBeyondHorizon) {
  EXPECT_THROW(decaying_solution(RadonMeasure::lebesgue(2.0), 1.0), std::invalid_argument);
  EXPECT_NO_THROW(decaying_solution(RadonMeasure::dirac(1.0, 1.0, 1.0), 1.0));
}
