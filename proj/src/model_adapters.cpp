#include "gbesq/model_adapters.hpp"

#include <cmath>
#include <stdexcept>

namespace gbesq {

double SpaceMap::to_model(double t, double x) const {
  if (x < 0.0) throw std::domain_error("SpaceMap: negative process value");
  return std::exp(rate * t) * (power == 1.0 ? x : std::pow(x, power));
}

double SpaceMap::to_process(double t, double v) const {
  if (v < 0.0) throw std::domain_error("SpaceMap: negative model value");
  const double u = v * std::exp(-rate * t);
  return power == 1.0 ? u : std::pow(u, 1.0 / power);
}

void RegimePath::validate() const {
  if (times.size() < 2 || states.size() + 1 != times.size())
    throw std::invalid_argument("RegimePath: need times.size() == states.size() + 1 >= 2");
  if (times.front() != 0.0) throw std::invalid_argument("RegimePath: must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] < times[i - 1]) throw std::invalid_argument("RegimePath: times must be nondecreasing");
  if (!(times.back() > 0.0)) throw std::invalid_argument("RegimePath: empty horizon");
  if (alpha.size() != sigma.size() || alpha.empty()) throw std::invalid_argument("RegimePath: parameter sizes differ");
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (!(alpha[k] >= 0.0)) throw std::invalid_argument("RegimePath: alpha must be >= 0");
    if (!(sigma[k] > 0.0)) throw std::invalid_argument("RegimePath: sigma must be > 0");
  }
  for (int s : states)
    if (s < 0 || s >= static_cast<int>(alpha.size())) throw std::invalid_argument("RegimePath: state out of range");
}

RegimePath RegimePath::merged() const {
  validate();
  RegimePath out{{0.0}, {}, alpha, sigma};
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!(times[i + 1] > times[i])) continue;
    if (!out.states.empty() && out.states.back() == states[i]) {
      out.times.back() = times[i + 1];
    } else {
      out.states.push_back(states[i]);
      out.times.push_back(times[i + 1]);
    }
  }
  return out;
}

ModelAdapter adapt_ou(double mu, double sigma, double x, double horizon) {
  if (!(sigma > 0.0)) throw std::invalid_argument("adapt_ou: sigma must be > 0");
  // f(u) = sigma^2 (1 - exp(-2 mu u)) / (2 mu)
  const auto f = TimeChange::exponential(sigma * sigma, -2.0 * mu, horizon);
  return {make_spec(PiecewiseFn::constant(1.0, f(horizon)), x * x), f, SpaceMap{mu, 0.5}};
}

ModelAdapter adapt_cir(double alpha, double beta, double sigma, double x, double horizon) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("adapt_cir: alpha must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("adapt_cir: sigma must be > 0");
  if (x < 0.0) throw std::invalid_argument("adapt_cir: start must be >= 0");
  const auto f = TimeChange::exponential(0.25 * sigma * sigma, beta, horizon);
  return {make_spec(PiecewiseFn::constant(4.0 * alpha / (sigma * sigma), f(horizon)), x), f, SpaceMap{-beta, 1.0}};
}

ModelAdapter adapt_cev(double mu, double sigma, double rho, double x, double horizon) {
  if (!(sigma > 0.0)) throw std::invalid_argument("adapt_cev: sigma must be > 0");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("adapt_cev: rho must be in [0, 1)");
  if (x < 0.0) throw std::invalid_argument("adapt_cev: start must be >= 0");
  const double delta = (2.0 * rho - 1.0) / (rho - 1.0);
  if (delta < 0.0) throw std::invalid_argument("adapt_cev: rho in (1/2, 1) gives a negative dimension");
  const double q = rho - 1.0;
  // f(t) = (rho-1) sigma^2 (exp(2 (rho-1) mu t) - 1) / (2 mu)
  const auto f = TimeChange::exponential(q * q * sigma * sigma, 2.0 * q * mu, horizon);
  return {make_spec(PiecewiseFn::constant(delta, f(horizon)), std::pow(x, -2.0 * q)), f, SpaceMap{mu, 1.0 / (-2.0 * q)}};
}

ModelAdapter adapt_extended_cir(const RegimePath& regimes, double r0, double horizon) {
  if (r0 < 0.0) throw std::invalid_argument("adapt_extended_cir: r0 must be >= 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("adapt_extended_cir: horizon must be > 0");
  const RegimePath path = regimes.merged();
  if (path.horizon() < horizon * (1.0 - 1e-12)) throw std::invalid_argument("adapt_extended_cir: path shorter than horizon");

  std::vector<double> breaks{0.0}, slopes;
  std::vector<int> states;
  for (std::size_t i = 0; i < path.states.size() && breaks.back() < horizon; ++i) {
    const double end = std::min(path.times[i + 1], horizon);
    if (!(end > breaks.back())) continue;
    const double s = path.sigma[path.states[i]];
    breaks.push_back(end);
    slopes.push_back(0.25 * s * s);
    states.push_back(path.states[i]);
  }
  breaks.back() = horizon;
  const TimeChange f = TimeChange::piecewise_linear(breaks, slopes);

  std::vector<double> image{0.0}, delta;
  for (std::size_t i = 0; i < states.size(); ++i) {
    image.push_back(f(breaks[i + 1]));
    const double a = path.alpha[states[i]], s = path.sigma[states[i]];
    delta.push_back(4.0 * a / (s * s));
  }
  return {make_spec(PiecewiseFn::step(image, delta), r0), f, SpaceMap{0.0, 1.0}};
}

RadonMeasure model_time_lebesgue(const ModelAdapter& model, double horizon) {
  if (model.space_map.rate != 0.0 || model.space_map.power != 1.0)
    throw std::invalid_argument("model_time_lebesgue: needs the identity space map");
  return pushforward_functional(PiecewiseFn::constant(1.0, horizon), model.time_change, horizon);
}

double sample_model(const ModelAdapter& model, double t, RngStream& rng, const SamplerOptions& opt) {
  if (!(t > 0.0)) throw std::invalid_argument("sample_model: t must be > 0");
  const double x = sample_endpoint(model.gbesq, model.time_change(t), rng, opt);
  return model.space_map.to_model(t, x);
}

}  // namespace gbesq
