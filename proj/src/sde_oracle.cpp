#include "gbesq/sde_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gbesq/samplers.hpp"
#include "gbesq/stats.hpp"

namespace gbesq {

std::vector<double> euler_grid(double t, int n_steps, const std::vector<double>& extra) {
  if (!(t > 0.0)) throw std::invalid_argument("euler_grid: t must be > 0");
  if (n_steps < 1) throw std::invalid_argument("euler_grid: n_steps must be >= 1");
  std::vector<double> g;
  g.reserve(n_steps + 1 + extra.size());
  for (int i = 0; i <= n_steps; ++i) g.push_back(t * i / n_steps);
  g.back() = t;
  for (double p : extra)
    if (p > 0.0 && p < t) g.push_back(p);
  std::sort(g.begin(), g.end());
  // drop points closer than a rounding error
  std::vector<double> out{g.front()};
  for (std::size_t i = 1; i < g.size(); ++i)
    if (g[i] - out.back() > 1e-12 * t) out.push_back(g[i]);
  out.back() = t;
  return out;
}

namespace {

struct StepCoeffs {
  double h;
  double sqrt_h;
  double delta;
  double beta;
};

std::vector<StepCoeffs> step_coeffs(const GbesqSpec& spec, const std::vector<double>& grid) {
  std::vector<StepCoeffs> out;
  out.reserve(grid.size() - 1);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = grid[i - 1], b = grid[i], mid = 0.5 * (a + b);
    out.push_back({b - a, std::sqrt(b - a), spec.delta(mid), spec.beta ? (*spec.beta)(a) : 0.0});
  }
  return out;
}

std::vector<double> spec_points(const GbesqSpec& spec) {
  std::vector<double> pts = spec.delta.breakpoints();
  if (spec.beta) pts.insert(pts.end(), spec.beta->breakpoints().begin(), spec.beta->breakpoints().end());
  return pts;
}

inline double euler_step(double x, const StepCoeffs& c, double z) {
  const double xp = std::max(x, 0.0);
  return x + (2.0 * c.beta * xp + c.delta) * c.h + 2.0 * std::sqrt(xp) * c.sqrt_h * z;
}

// Density value and atom weight attached to each grid node / step.
struct MeasureOnGrid {
  std::vector<double> step_density;  // per step
  std::vector<double> node_atom;     // per node
};

MeasureOnGrid measure_on_grid(const RadonMeasure& mu, const std::vector<double>& grid) {
  MeasureOnGrid m;
  m.step_density.resize(grid.size() - 1);
  m.node_atom.assign(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) m.step_density[i - 1] = mu.density()(0.5 * (grid[i - 1] + grid[i]));
  for (const auto& a : mu.atoms()) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), a.location - 1e-12 * grid.back());
    if (it == grid.end()) throw std::invalid_argument("euler_estimate: atom beyond the horizon");
    m.node_atom[it - grid.begin()] += a.weight;
  }
  return m;
}

std::vector<double> measure_points(const RadonMeasure& mu) {
  std::vector<double> pts = mu.density().breakpoints();
  for (const auto& a : mu.atoms()) pts.push_back(a.location);
  return pts;
}

}  // namespace

Estimate euler_estimate(const GbesqSpec& spec, const Payoff& payoff, double t, const EulerConfig& cfg) {
  return euler_estimates(spec, {payoff}, t, cfg).front();
}

std::vector<Estimate> euler_estimates(const GbesqSpec& spec, const std::vector<Payoff>& payoffs, double t,
                                      const EulerConfig& cfg) {
  spec.validate();
  if (cfg.n_paths < 2) throw std::invalid_argument("euler_estimate: need at least 2 paths");
  std::vector<double> extra = spec_points(spec);
  const RadonMeasure* mu = nullptr;
  for (const auto& payoff : payoffs) {
    const RadonMeasure* m = nullptr;
    if (const auto* p = std::get_if<IntegralExp>(&payoff)) m = &p->mu;
    if (const auto* p = std::get_if<KernelBridge>(&payoff)) {
      if (!(p->eps > 0.0)) throw std::invalid_argument("euler_estimate: kernel bandwidth must be > 0");
      m = &p->mu;
    }
    if (m && mu && !(*m == *mu)) throw std::invalid_argument("euler_estimates: integral payoffs need one measure");
    if (m) mu = m;
  }
  if (mu) {
    if (mu->horizon() > t + 1e-12) throw std::invalid_argument("euler_estimate: measure extends beyond t");
    const auto pts = measure_points(*mu);
    extra.insert(extra.end(), pts.begin(), pts.end());
  }
  const auto grid = euler_grid(t, cfg.n_steps, extra);
  const auto coeffs = step_coeffs(spec, grid);
  const MeasureOnGrid mg = mu ? measure_on_grid(*mu, grid) : MeasureOnGrid{};

  // per path: (terminal value, integral)
  std::vector<double> xt(cfg.n_paths), integral(mu ? cfg.n_paths : 0);
  parallel_for(
      cfg.n_paths,
      [&](std::size_t p) {
        RngStream rng(cfg.seed, p);
        double x = spec.x0, acc = 0.0;
        if (mu) acc += mg.node_atom[0] * x;
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
          const double prev = std::max(x, 0.0);
          x = euler_step(x, coeffs[i], rng.normal());
          if (mu) {
            const double cur = std::max(x, 0.0);
            acc += mg.step_density[i] * 0.5 * (prev + cur) * coeffs[i].h + mg.node_atom[i + 1] * cur;
          }
        }
        xt[p] = std::max(x, 0.0);
        if (mu) integral[p] = acc;
      },
      cfg.threads);

  std::vector<Estimate> out;
  for (const auto& payoff : payoffs) out.push_back(std::visit(
      [&](const auto& pay) -> Estimate {
        using T = std::decay_t<decltype(pay)>;
        MeanAccumulator acc;
        if constexpr (std::is_same_v<T, TerminalExp>) {
          for (double v : xt) acc.add(std::exp(-pay.lambda * v));
        } else if constexpr (std::is_same_v<T, IntegralExp>) {
          for (double v : integral) acc.add(std::exp(-v));
        } else if constexpr (std::is_same_v<T, TerminalMean>) {
          for (double v : xt) acc.add(v);
        } else {
          // ratio estimator sum K f / sum K with delta-method error
          MeanAccumulator num, den;
          double cross = 0.0;
          std::vector<double> kf(cfg.n_paths), k(cfg.n_paths);
          for (std::size_t p = 0; p < cfg.n_paths; ++p) {
            const double u = (xt[p] - pay.y) / pay.eps;
            k[p] = std::exp(-0.5 * u * u);
            kf[p] = k[p] * std::exp(-integral[p]);
            num.add(kf[p]);
            den.add(k[p]);
          }
          if (!(den.mean() > 0.0)) throw std::runtime_error("euler_estimate: no path near the conditioning value");
          for (std::size_t p = 0; p < cfg.n_paths; ++p) cross += (kf[p] - num.mean()) * (k[p] - den.mean());
          cross /= static_cast<double>(cfg.n_paths - 1);
          const double r = num.mean() / den.mean();
          const double var = (num.variance() - 2.0 * r * cross + r * r * den.variance()) /
                             (den.mean() * den.mean() * static_cast<double>(cfg.n_paths));
          return {r, std::sqrt(std::max(var, 0.0))};
        }
        return {acc.mean(), acc.std_error()};
      },
      payoff));
  return out;
}

std::vector<double> euler_terminal_samples(const GbesqSpec& spec, double t, const EulerConfig& cfg) {
  spec.validate();
  const auto grid = euler_grid(t, cfg.n_steps, spec_points(spec));
  const auto coeffs = step_coeffs(spec, grid);
  std::vector<double> out(cfg.n_paths);
  parallel_for(
      cfg.n_paths,
      [&](std::size_t p) {
        RngStream rng(cfg.seed, p);
        double x = spec.x0;
        for (const auto& c : coeffs) x = euler_step(x, c, rng.normal());
        out[p] = std::max(x, 0.0);
      },
      cfg.threads);
  return out;
}

double coupled_monotonicity_check(const GbesqSpec& lower, const GbesqSpec& upper, double t, const EulerConfig& cfg,
                                  double tolerance) {
  lower.validate();
  upper.validate();
  if (lower.x0 > upper.x0) throw std::invalid_argument("coupled_monotonicity_check: need x1 <= x2");
  if (lower.beta != upper.beta) throw std::invalid_argument("coupled_monotonicity_check: drifts must coincide");
  std::vector<double> extra = spec_points(lower);
  const auto up = spec_points(upper);
  extra.insert(extra.end(), up.begin(), up.end());
  const auto grid = euler_grid(t, cfg.n_steps, extra);
  const auto c1 = step_coeffs(lower, grid), c2 = step_coeffs(upper, grid);
  for (std::size_t i = 0; i < c1.size(); ++i)
    if (c1[i].delta > c2[i].delta) throw std::invalid_argument("coupled_monotonicity_check: need delta1 <= delta2");

  std::vector<std::size_t> violations(cfg.n_paths, 0);
  parallel_for(
      cfg.n_paths,
      [&](std::size_t p) {
        RngStream rng(cfg.seed, p);
        double x1 = lower.x0, x2 = upper.x0;
        for (std::size_t i = 0; i < c1.size(); ++i) {
          const double z = rng.normal();
          x1 = euler_step(x1, c1[i], z);
          x2 = euler_step(x2, c2[i], z);
          if (std::max(x2, 0.0) < std::max(x1, 0.0) - tolerance) ++violations[p];
        }
      },
      cfg.threads);
  std::size_t total = 0;
  for (auto v : violations) total += v;
  return static_cast<double>(total) / (static_cast<double>(cfg.n_paths) * static_cast<double>(c1.size()));
}

}  // namespace gbesq
