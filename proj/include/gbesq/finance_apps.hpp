#pragma once

// Stochastic volatility, regime-switching bonds and default curves built on
// the exact samplers and transforms.

#include <cstdint>
#include <vector>

#include "gbesq/model_adapters.hpp"
#include "gbesq/samplers.hpp"

namespace gbesq {

/// dS/S = mu dt + sqrt(V) dB, dV = delta dt + 2 sqrt(V) dW, d<B, W> = rho dt.
struct SvModel {
  PiecewiseFn mu;
  double rho = 0.0;
  GbesqSpec vol;
  double s0 = 1.0;

  void validate() const;
};

struct SvState {
  double s;
  double v;
  double integral;  // int V over the step
};

/// Exact draw of (S_t, V_t, int_0^t V) from the model's initial state.
SvState sv_exact_step(const SvModel& model, double t, RngStream& rng, const SamplerOptions& opt = {});
/// Exact transition over [a, b] from `from` (its integral field is ignored).
SvState sv_exact_step(const SvModel& model, double a, double b, const SvState& from, RngStream& rng,
                      const SamplerOptions& opt = {});
/// Full-truncation Euler path of the joint system (oracle).
SvState sv_euler_path(const SvModel& model, double t, int n_steps, RngStream& rng);

struct MonteCarloConfig {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  int threads = 0;
  SamplerOptions sampler;
};

/// log(S_t / S_0) for n_paths exact draws split into `steps` equal chained steps.
std::vector<double> sv_log_returns(const SvModel& model, double t, int steps, const MonteCarloConfig& cfg);
std::vector<double> sv_euler_log_returns(const SvModel& model, double t, int n_steps, const MonteCarloConfig& cfg);

enum class BondRoute { Ode, MonteCarlo };

struct BondQuote {
  double price;
  double std_error;  // 0 for the deterministic route
  BondRoute route;
};

/// E[exp(-int_0^T r)] for dr = alpha(S) dt + sigma(S) sqrt(r) dW on a given regime path.
BondQuote price_bond(const RegimePath& regimes, double r0, double horizon, BondRoute route,
                     const MonteCarloConfig& cfg = {});
/// Single regime, no mean reversion: exp(-r0 (2/g) tanh(g T/2)) cosh(g T/2)^(-2 alpha/sigma^2), g = sigma sqrt 2.
double bond_closed_form(double alpha, double sigma, double r0, double horizon);

struct SurvivalPoint {
  double t;
  double analytic;
  double empirical;
  double std_error;
};

/// P[tau > t] on the grid, analytically and from `cfg.n_paths` default-time draws with step h.
std::vector<SurvivalPoint> default_curve(const GbesqSpec& intensity, const std::vector<double>& grid, double h,
                                         const MonteCarloConfig& cfg);
/// Default times (horizon + 1 when beyond the horizon).
std::vector<double> default_times(const GbesqSpec& intensity, double horizon, double h, const MonteCarloConfig& cfg);

}  // namespace gbesq
