#pragma once

// Closed-form Laplace transforms of GBESQ laws: transition kernel, additive
// functionals (with and without drift), bridges, and the change-of-law weight.
//
// The process is dX = (2 beta X + delta) du + 2 sqrt(X) dW, X_0 = x0.

#include <complex>
#include <optional>
#include <vector>

#include "gbesq/propagator.hpp"
#include "gbesq/time_structures.hpp"

namespace gbesq {

using cplx = std::complex<double>;

/// Law of a GBESQ: step dimension delta >= 0, optional continuous
/// piecewise-linear drift beta >= 0 with beta' + beta^2 >= 0, start x0 >= 0.
struct GbesqSpec {
  PiecewiseFn delta;
  std::optional<PiecewiseFn> beta;
  double x0 = 0.0;

  /// Throws std::invalid_argument when an invariant fails.
  void validate() const;
  bool has_drift() const { return beta.has_value(); }
  GbesqSpec without_drift() const { return GbesqSpec{delta, std::nullopt, x0}; }
};

GbesqSpec make_spec(PiecewiseFn delta, double x0);
GbesqSpec make_spec(PiecewiseFn delta, PiecewiseFn beta, double x0);

/// E[exp(-lambda X_t)] for a driftless spec, product form over the pieces of
/// delta on [0, t]. Real lambda must exceed -1/(2t); complex lambda is
/// evaluated on the principal branch (analytic off the negative real axis).
double transition_laplace(const GbesqSpec& spec, double t, double lambda);
cplx transition_laplace(const GbesqSpec& spec, double t, cplx lambda);
/// lim_{lambda -> inf} of the transition transform: P[X_t = 0].
double transition_atom_at_zero(const GbesqSpec& spec, double t);
/// E[X_t] = x0 + int_0^t delta (driftless).
double transition_mean(const GbesqSpec& spec, double t);

/// E[exp(-int X dmu)] for mu supported on [0, mu.horizon()]. With drift, beta
/// is replaced by its midpoint step approximation on `drift_refinement`
/// sub-pieces of each linear piece.
double functional_laplace(const GbesqSpec& spec, const RadonMeasure& mu, int drift_refinement = 256);

/// Posterior law of the surviving-excursion count in the bridge mixture.
struct BridgeMixture {
  std::vector<double> b;   // b(first..first+N), sums to one
  double nu = 0.0;         // d/2 - 1 with d = inf delta on [0, t]
  double zeta = 0.0;       // sqrt(xy)/t, the constant-dimension Bessel parameter
  double z_dom = 0.0;      // parameter of the dominating Bessel law
  double tail_bound = 0.0; // Bessel(nu, z_dom) mass beyond N
  int first = 0;           // index of b[0]

  static BridgeMixture trivial() { return BridgeMixture{{1.0}, 0.0, 0.0, 0.0, 0.0, 0}; }
  std::size_t size() const { return b.size(); }
};

/// Per-alpha ingredients of the bridge transforms of alpha * mu over [0, t]:
///   bridge_{x->y}(alpha mu) = exp(x cx + y cy + log_b) sum_n b(n) exp(-2 n log_psi_ratio)
/// with cx = (1/t - m11/m12)/2, cy = (1/t - m22/m12)/2 (full propagator of
/// alpha mu on [0, t]), log_b = int_0^t B0 delta and log_psi_ratio = log(m12/t).
/// Works for complex alpha off the negative real axis by following the
/// continuous branch of log m12(u -> t) in u.
class BridgeKernel {
 public:
  struct Terms {
    cplx cx;
    cplx cy;
    cplx log_b;
    cplx log_psi_ratio;
  };

  BridgeKernel(const PiecewiseFn& delta, double t, const RadonMeasure& mu);

  Terms terms(cplx alpha) const;
  Terms terms(double alpha) const { return terms(cplx(alpha, 0.0)); }

  double horizon() const { return t_; }
  /// mu has a single density value on [0, t] and no interior atoms; the
  /// canonical solutions are then evaluated in closed form.
  bool uniform() const { return uniform_; }

 private:
  struct Interval {
    double start;
    double end;
    double m;
    double delta;
    double atom_at_start;  // weight of an atom at `start`
  };
  double t_;
  std::vector<Interval> intervals_;
  double atom_at_end_ = 0.0;
  bool uniform_ = false;
};

/// Conditional Laplace transform alpha -> E[exp(-alpha int X dmu) | X_0 = x, X_t = y].
class BridgeTransform {
 public:
  BridgeTransform(const PiecewiseFn& delta, double x, double y, double t, const RadonMeasure& mu,
                  BridgeMixture mix);
  cplx operator()(cplx alpha) const;
  double operator()(double alpha) const { return (*this)(cplx(alpha, 0.0)).real(); }
  cplx log(cplx alpha) const;
  const BridgeMixture& mixture() const { return mix_; }

 private:
  BridgeKernel kernel_;
  double x_;
  double y_;
  BridgeMixture mix_;
};

/// Bridge to zero: A0^x exp(int B0 delta).
double bridge_zero_laplace(const PiecewiseFn& delta, double x, double t, const RadonMeasure& mu);
/// Full bridge x -> y with precomputed mixture coefficients.
double bridge_laplace(const PiecewiseFn& delta, double x, double y, double t, const RadonMeasure& mu,
                      const BridgeMixture& mix);

/// Path quantities needed by the change-of-law weight.
struct PathFunctionals {
  double x0 = 0.0;
  double xt = 0.0;
  double t = 0.0;
  double int_beta_delta = 0.0;    // int beta delta ds
  double int_drift_weight_x = 0.0; // int (beta' + beta^2) X ds
  bool has_integrals = false;
};

/// log of d(drifted law)/d(driftless law) on F_t:
/// (beta_t X_t - beta_0 X_0 - int beta delta - int (beta' + beta^2) X) / 2.
double girsanov_log_weight(const GbesqSpec& spec, const PathFunctionals& path);

/// beta' + beta^2 as a step function (exact midpoint values are not needed:
/// it is linear-quadratic on each piece and evaluated pointwise).
double drift_weight(const PiecewiseFn& beta, double s);

/// Law of (1/c) X_{c .}: delta(c .), c beta(c .), start x0 / c.
GbesqSpec scaling_image(const GbesqSpec& spec, double c);

/// log(sinh z / z) on Re z >= 0, continuous from z = 0.
cplx log_sinhc(cplx z);
/// log cosh z on Re z >= 0, continuous from z = 0.
cplx log_cosh(cplx z);
/// tanh(k s) / k, with the k -> 0 limit s.
cplx tanh_over(cplx k, double s);

}  // namespace gbesq
