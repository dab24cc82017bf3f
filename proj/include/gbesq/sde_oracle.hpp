#pragma once

// Brute-force Euler reference for dX = (2 beta X + delta) du + 2 sqrt(X) dW
// (full truncation: max(X, 0) in drift and diffusion). Oracle only.

#include <cstdint>
#include <variant>
#include <vector>

#include "gbesq/transforms.hpp"

namespace gbesq {

struct EulerConfig {
  int n_steps = 2000;
  std::size_t n_paths = 200000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: GBESQ_THREADS or hardware
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// E[exp(-lambda X_t)]
struct TerminalExp {
  double lambda;
};
/// E[exp(-int_0^t X dmu)]; trapezoid on density pieces, atoms picked up on the grid.
struct IntegralExp {
  RadonMeasure mu;
};
/// E[exp(-int X dmu) | X_t = y] with a Gaussian kernel of bandwidth eps in X_t.
struct KernelBridge {
  double y;
  double eps;
  RadonMeasure mu;
};
/// E[X_t]
struct TerminalMean {};

using Payoff = std::variant<TerminalExp, IntegralExp, KernelBridge, TerminalMean>;

Estimate euler_estimate(const GbesqSpec& spec, const Payoff& payoff, double t, const EulerConfig& cfg);
/// Several payoffs from one set of paths. Integral payoffs must share one measure.
std::vector<Estimate> euler_estimates(const GbesqSpec& spec, const std::vector<Payoff>& payoffs, double t,
                                      const EulerConfig& cfg);

/// X_t (truncated at 0) for every path.
std::vector<double> euler_terminal_samples(const GbesqSpec& spec, double t, const EulerConfig& cfg);

/// Fraction of (path, step) pairs where the dominating path falls below the
/// dominated one by more than `tolerance`, under shared Gaussian increments.
/// Requires x1 <= x2, delta1 <= delta2 and a common drift.
double coupled_monotonicity_check(const GbesqSpec& lower, const GbesqSpec& upper, double t, const EulerConfig& cfg,
                                  double tolerance = 1e-12);

/// Step grid: n_steps uniform steps refined by the given extra points.
std::vector<double> euler_grid(double t, int n_steps, const std::vector<double>& extra);

}  // namespace gbesq
