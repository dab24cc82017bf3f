#include "gbesq/finance_apps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gbesq/sde_oracle.hpp"
#include "gbesq/stats.hpp"

namespace gbesq {

void SvModel::validate() const {
  if (!(rho >= -1.0 && rho <= 1.0)) throw std::invalid_argument("SvModel: |rho| must be <= 1");
  if (!(s0 > 0.0)) throw std::invalid_argument("SvModel: S0 must be > 0");
  if (vol.has_drift()) throw std::invalid_argument("SvModel: the variance spec must be driftless");
  vol.validate();
}

SvState sv_exact_step(const SvModel& model, double t, RngStream& rng, const SamplerOptions& opt) {
  return sv_exact_step(model, 0.0, t, SvState{model.s0, model.vol.x0, 0.0}, rng, opt);
}

SvState sv_exact_step(const SvModel& model, double a, double b, const SvState& from, RngStream& rng,
                      const SamplerOptions& opt) {
  model.validate();
  if (!(b > a) || a < 0.0) throw std::invalid_argument("sv_exact_step: need 0 <= a < b");
  const auto pts = sample_skeleton(GbesqSpec{model.vol.delta.shifted(a, b - a), std::nullopt, from.v}, {0.0, b - a},
                                   true, rng, std::nullopt, opt);
  const double v = pts.back().value, integral = *pts.back().integral;
  // int sqrt(V) dW from the variance equation
  const double w_part = 0.5 * (v - from.v - model.vol.delta.integral(a, b));
  const double mean = model.mu.integral(a, b) - 0.5 * integral + model.rho * w_part;
  const double sd = std::sqrt(std::max(0.0, (1.0 - model.rho * model.rho) * integral));
  return {from.s * std::exp(mean + sd * rng.normal()), v, integral};
}

SvState sv_euler_path(const SvModel& model, double t, int n_steps, RngStream& rng) {
  model.validate();
  auto pts = model.vol.delta.breakpoints();
  pts.insert(pts.end(), model.mu.breakpoints().begin(), model.mu.breakpoints().end());
  const auto grid = euler_grid(t, n_steps, pts);
  const double rc = std::sqrt(std::max(0.0, 1.0 - model.rho * model.rho));
  double logs = std::log(model.s0), v = model.vol.x0, integral = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double h = grid[i] - grid[i - 1], mid = 0.5 * (grid[i] + grid[i - 1]), sh = std::sqrt(h);
    const double z1 = rng.normal(), z2 = rng.normal();
    const double vp = std::max(v, 0.0);
    logs += (model.mu(mid) - 0.5 * vp) * h + std::sqrt(vp) * sh * (model.rho * z1 + rc * z2);
    v += model.vol.delta(mid) * h + 2.0 * std::sqrt(vp) * sh * z1;
    integral += 0.5 * (vp + std::max(v, 0.0)) * h;
  }
  return {std::exp(logs), std::max(v, 0.0), integral};
}

std::vector<double> sv_log_returns(const SvModel& model, double t, int steps, const MonteCarloConfig& cfg) {
  if (steps < 1) throw std::invalid_argument("sv_log_returns: steps must be >= 1");
  std::vector<double> out(cfg.n_paths);
  parallel_for(
      cfg.n_paths,
      [&](std::size_t p) {
        RngStream rng(cfg.seed, p);
        SvState st{model.s0, model.vol.x0, 0.0};
        for (int k = 0; k < steps; ++k) st = sv_exact_step(model, t * k / steps, t * (k + 1) / steps, st, rng, cfg.sampler);
        out[p] = std::log(st.s / model.s0);
      },
      cfg.threads);
  return out;
}

std::vector<double> sv_euler_log_returns(const SvModel& model, double t, int n_steps, const MonteCarloConfig& cfg) {
  std::vector<double> out(cfg.n_paths);
  parallel_for(
      cfg.n_paths,
      [&](std::size_t p) {
        RngStream rng(cfg.seed, p);
        out[p] = std::log(sv_euler_path(model, t, n_steps, rng).s / model.s0);
      },
      cfg.threads);
  return out;
}

BondQuote price_bond(const RegimePath& regimes, double r0, double horizon, BondRoute route,
                     const MonteCarloConfig& cfg) {
  const ModelAdapter model = adapt_extended_cir(regimes, r0, horizon);
  const RadonMeasure mu = model_time_lebesgue(model, horizon);
  if (route == BondRoute::Ode) return {functional_laplace(model.gbesq, mu), 0.0, route};

  const double end = model.time_change(horizon);
  std::vector<double> disc(cfg.n_paths);
  parallel_for(
      cfg.n_paths,
      [&](std::size_t p) {
        RngStream rng(cfg.seed, p);
        double acc = 0.0;
        for (const auto& pt : sample_skeleton(model.gbesq, {0.0, end}, true, rng, mu, cfg.sampler)) acc += *pt.integral;
        disc[p] = std::exp(-acc);
      },
      cfg.threads);
  const auto m = accumulate(disc);
  return {m.mean(), m.std_error(), route};
}

double bond_closed_form(double alpha, double sigma, double r0, double horizon) {
  const double g = sigma * std::sqrt(2.0), h = 0.5 * g * horizon;
  return std::exp(-r0 * (2.0 / g) * std::tanh(h)) * std::pow(std::cosh(h), -2.0 * alpha / (sigma * sigma));
}

std::vector<double> default_times(const GbesqSpec& intensity, double horizon, double h, const MonteCarloConfig& cfg) {
  std::vector<double> taus(cfg.n_paths);
  parallel_for(
      cfg.n_paths,
      [&](std::size_t p) {
        RngStream rng(cfg.seed, p);
        const auto tau = sample_default_time(intensity, horizon, h, rng, cfg.sampler);
        taus[p] = tau ? *tau : horizon + 1.0;
      },
      cfg.threads);
  return taus;
}

std::vector<SurvivalPoint> default_curve(const GbesqSpec& intensity, const std::vector<double>& grid, double h,
                                         const MonteCarloConfig& cfg) {
  if (grid.empty()) throw std::invalid_argument("default_curve: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1])))
      throw std::invalid_argument("default_curve: grid must be positive and increasing");
  const auto taus = default_times(intensity, grid.back(), h, cfg);
  std::vector<SurvivalPoint> out;
  for (double t : grid) {
    MeanAccumulator acc;
    for (double tau : taus) acc.add(tau > t ? 1.0 : 0.0);
    out.push_back({t, functional_laplace(intensity, RadonMeasure::lebesgue(t)), acc.mean(), acc.std_error()});
  }
  return out;
}

}  // namespace gbesq
