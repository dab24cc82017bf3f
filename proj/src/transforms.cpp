#include "gbesq/transforms.hpp"

#include <cmath>
#include <stdexcept>

namespace gbesq {

void GbesqSpec::validate() const {
  if (!(x0 >= 0.0) || !std::isfinite(x0)) throw std::invalid_argument("GbesqSpec: x0 must be finite and >= 0");
  if (delta.mode() != PiecewiseFn::Mode::Step)
    throw std::invalid_argument("GbesqSpec: delta must be piecewise constant");
  if (!delta.nonnegative()) throw std::invalid_argument("GbesqSpec: delta must be >= 0");
  if (beta) {
    if (beta->mode() != PiecewiseFn::Mode::Linear)
      throw std::invalid_argument("GbesqSpec: beta must be continuous piecewise linear");
    if (!beta->nonnegative()) throw std::invalid_argument("GbesqSpec: beta must be >= 0");
    const auto& b = beta->breakpoints();
    const auto& v = beta->values();
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
      const double slope = (v[i + 1] - v[i]) / (b[i + 1] - b[i]);
      const double lo = std::min(v[i] * v[i], v[i + 1] * v[i + 1]);
      if (slope + lo < -1e-14) throw std::invalid_argument("GbesqSpec: beta' + beta^2 < 0 on a piece");
    }
  }
}

GbesqSpec make_spec(PiecewiseFn delta, double x0) {
  GbesqSpec s{std::move(delta), std::nullopt, x0};
  s.validate();
  return s;
}

GbesqSpec make_spec(PiecewiseFn delta, PiecewiseFn beta, double x0) {
  GbesqSpec s{std::move(delta), std::move(beta), x0};
  s.validate();
  return s;
}

namespace {

void require_driftless(const GbesqSpec& spec, const char* where) {
  if (spec.has_drift()) throw std::invalid_argument(std::string(where) + ": spec must be driftless");
}

}  // namespace

cplx transition_laplace(const GbesqSpec& spec, double t, cplx lambda) {
  require_driftless(spec, "transition_laplace");
  if (!(t > 0.0)) throw std::invalid_argument("transition_laplace: t must be > 0");
  if (lambda.imag() == 0.0 && !(lambda.real() > -0.5 / t))
    throw std::domain_error("transition_laplace: lambda outside the analyticity domain");
  const cplx one(1.0, 0.0);
  cplx log_value = -lambda * spec.x0 / (one + 2.0 * lambda * t);
  for (const auto& p : spec.delta.pieces(0.0, t)) {
    if (p.value_start == 0.0) continue;
    const cplx upper = one + 2.0 * lambda * (t - p.end);
    const cplx lower = one + 2.0 * lambda * (t - p.start);
    log_value += 0.5 * p.value_start * (std::log(upper) - std::log(lower));
  }
  return std::exp(log_value);
}

double transition_laplace(const GbesqSpec& spec, double t, double lambda) {
  require_driftless(spec, "transition_laplace");
  if (!(t > 0.0)) throw std::invalid_argument("transition_laplace: t must be > 0");
  if (!(lambda > -0.5 / t)) throw std::domain_error("transition_laplace: lambda outside the analyticity domain");
  double log_value = -lambda * spec.x0 / (1.0 + 2.0 * lambda * t);
  for (const auto& p : spec.delta.pieces(0.0, t)) {
    if (p.value_start == 0.0) continue;
    log_value += 0.5 * p.value_start *
                 (std::log1p(2.0 * lambda * (t - p.end)) - std::log1p(2.0 * lambda * (t - p.start)));
  }
  return std::exp(log_value);
}

double transition_atom_at_zero(const GbesqSpec& spec, double t) {
  require_driftless(spec, "transition_atom_at_zero");
  if (!(t > 0.0)) throw std::invalid_argument("transition_atom_at_zero: t must be > 0");
  double log_value = -spec.x0 / (2.0 * t);
  for (const auto& p : spec.delta.pieces(0.0, t)) {
    if (p.value_start == 0.0) continue;
    if (t - p.end <= 0.0) return 0.0;
    log_value += 0.5 * p.value_start * std::log((t - p.end) / (t - p.start));
  }
  return std::exp(log_value);
}

double transition_mean(const GbesqSpec& spec, double t) {
  require_driftless(spec, "transition_mean");
  return spec.x0 + spec.delta.integral(0.0, t);
}

double functional_laplace(const GbesqSpec& spec, const RadonMeasure& mu, int drift_refinement) {
  spec.validate();
  if (mu.is_zero()) return 1.0;
  const double a = mu.horizon();
  std::vector<double> extra(spec.delta.breakpoints());
  std::optional<PiecewiseFn> drift;
  Boundary boundary = Boundary::RightNeumann;
  if (spec.beta) {
    drift = spec.beta->midpoint_steps(drift_refinement);
    boundary = Boundary::Principal;
  }
  const DecayingSolution phi = decaying_solution(mu, a, boundary, extra, drift);
  double log_value = 0.5 * spec.x0 * phi.dphi0();
  for (const auto& p : spec.delta.pieces(0.0, a)) {
    if (p.value_start == 0.0) continue;
    log_value += 0.5 * p.value_start * (phi.log_phi_at(p.end) - phi.log_phi_at(p.start));
  }
  return std::exp(log_value);
}

double drift_weight(const PiecewiseFn& beta, double s) {
  const auto& b = beta.breakpoints();
  const auto& v = beta.values();
  double slope = 0.0;
  if (beta.mode() == PiecewiseFn::Mode::Linear && s >= b.front() && s < b.back()) {
    std::size_t i = 0;
    while (i + 2 < b.size() && s >= b[i + 1]) ++i;
    slope = (v[i + 1] - v[i]) / (b[i + 1] - b[i]);
  }
  const double val = beta(s);
  return slope + val * val;
}

double girsanov_log_weight(const GbesqSpec& spec, const PathFunctionals& path) {
  if (!spec.beta) return 0.0;
  if (!path.has_integrals) throw std::invalid_argument("girsanov_log_weight: missing path integrals");
  const PiecewiseFn& beta = *spec.beta;
  return 0.5 * (beta(path.t) * path.xt - beta(0.0) * path.x0 - path.int_beta_delta - path.int_drift_weight_x);
}

GbesqSpec scaling_image(const GbesqSpec& spec, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("scaling_image: c must be > 0");
  GbesqSpec out;
  out.delta = spec.delta.time_scaled(c);
  if (spec.beta) out.beta = spec.beta->time_scaled(c).value_scaled(c);
  out.x0 = spec.x0 / c;
  return out;
}

}  // namespace gbesq
