#pragma once

// Named models as time-changed, rescaled GBESQ: V_t = space_map(t, X_{f(t)}).

#include <vector>

#include "gbesq/samplers.hpp"
#include "gbesq/time_structures.hpp"
#include "gbesq/transforms.hpp"

namespace gbesq {

/// V = exp(rate t) X^power and back. power > 0.
struct SpaceMap {
  double rate = 0.0;
  double power = 1.0;

  double to_model(double t, double x) const;
  double to_process(double t, double v) const;
};

struct ModelAdapter {
  GbesqSpec gbesq;
  TimeChange time_change;
  SpaceMap space_map;
};

/// Piecewise-constant regime path on [0, times.back()]: state states[i] on
/// [times[i], times[i+1]). Per-state parameters alpha[k] >= 0, sigma[k] > 0.
struct RegimePath {
  std::vector<double> times;
  std::vector<int> states;
  std::vector<double> alpha;
  std::vector<double> sigma;

  void validate() const;
  double horizon() const { return times.back(); }
  /// Same path with zero-length pieces dropped and equal neighbours joined.
  RegimePath merged() const;
};

/// dV = mu V dt + sigma dW reflected at 0: delta = 1, start x^2.
ModelAdapter adapt_ou(double mu, double sigma, double x, double horizon);
/// dV = (alpha - beta V) dt + sigma sqrt(V) dW.
ModelAdapter adapt_cir(double alpha, double beta, double sigma, double x, double horizon);
/// dV = mu V dt + sigma V^rho dW with 0 <= rho <= 1/2 (reflected at 0 below 1/2).
ModelAdapter adapt_cev(double mu, double sigma, double rho, double x, double horizon);
/// dr = alpha(S_t) dt + sigma(S_t) sqrt(r) dW on a given regime path.
ModelAdapter adapt_extended_cir(const RegimePath& regimes, double r0, double horizon);

/// Measure mu on process time with int_0^T X_{f(s)} ds = int X dmu
/// (extended CIR, identity space map).
RadonMeasure model_time_lebesgue(const ModelAdapter& model, double horizon);

/// Exact draw of V_t.
double sample_model(const ModelAdapter& model, double t, RngStream& rng, const SamplerOptions& opt = {});

}  // namespace gbesq
