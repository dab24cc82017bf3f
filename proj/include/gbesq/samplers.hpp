#pragma once

// Exact transform-based sampling: endpoints, bridge mixtures, conditional
// integrals given endpoints, skeletons and default times.

#include <cstdint>
#include <optional>
#include <boost/random/normal_distribution.hpp>
#include <random>
#include <vector>

#include "gbesq/lap_inversion.hpp"
#include "gbesq/transforms.hpp"

namespace gbesq {

/// Reproducible substream: mt19937_64 seeded from a splitmix64 hash of (seed, id).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  double uniform();       // (0, 1)
  double normal();
  double exponential();   // mean 1
  std::mt19937_64& engine() { return engine_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t id_;
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;  // ziggurat
};

std::uint64_t splitmix64(std::uint64_t x);

/// Sampler accuracy knobs. Defaults are fixed for reproducibility.
struct SamplerOptions {
  double quantile_tol = 1e-10;
  double mixture_tol = 1e-12;
  int mixture_n_max = 400;
};

/// Posterior of the surviving-excursion count for the bridge x -> y over [0, t].
/// Throws std::invalid_argument for y = 0 (use the bridge-to-zero transform).
BridgeMixture mixture_coeffs(const PiecewiseFn& delta, double x, double y, double t, int n_max = 400,
                             double tol = 1e-12);

/// Bessel(nu, z) weights for n = 0..count-1; nu >= -1.
std::vector<double> bessel_weights(double nu, double z, int count);
/// Bessel(nu, z) mass beyond n_last.
double bessel_tail(double nu, double z, int n_last);

/// Transition transform of a driftless spec over [0, t] packaged for inversion.
TransformCallable endpoint_transform(const GbesqSpec& spec, double t);
/// alpha -> E[exp(-alpha int X dmu) | X_0 = x, X_t = y] packaged for inversion,
/// with deterministic endpoint atoms of mu removed (their contribution is
/// returned in `offset`).
struct BridgeIntegralTransform {
  TransformCallable transform;
  double offset = 0.0;
  bool degenerate = false;  // integral is exactly `offset`
};
BridgeIntegralTransform bridge_integral_transform(const PiecewiseFn& delta, double x, double y, double t,
                                                  const RadonMeasure& mu, const SamplerOptions& opt = {});

double sample_endpoint(const GbesqSpec& spec, double t, RngStream& rng, const SamplerOptions& opt = {});
double sample_bridge_integral(const PiecewiseFn& delta, double x, double y, double t, const RadonMeasure& mu,
                              RngStream& rng, const SamplerOptions& opt = {});

struct SkeletonPoint {
  double time;
  double value;
  std::optional<double> integral;  // int X dmu over (t_{i-1}, t_i]
};

/// Sequential exact sampling at `times` (first must be 0). Integrals are taken
/// against `mu` when given, else against Lebesgue measure.
std::vector<SkeletonPoint> sample_skeleton(const GbesqSpec& spec, const std::vector<double>& times,
                                           bool with_integrals, RngStream& rng,
                                           const std::optional<RadonMeasure>& mu = std::nullopt,
                                           const SamplerOptions& opt = {});

/// First time int_0^tau X ds exceeds an Exp(1) threshold on the grid of step h,
/// with linear interpolation inside the crossing step; nullopt when beyond T.
std::optional<double> sample_default_time(const GbesqSpec& intensity, double horizon, double h, RngStream& rng,
                                          const SamplerOptions& opt = {});

/// Thread count from GBESQ_THREADS, else the hardware concurrency.
int default_threads();

/// Runs body(i) for i in [0, n) on `threads` workers in contiguous blocks.
/// Results are deterministic when body only touches per-index state.
template <class Body>
void parallel_for(std::size_t n, Body&& body, int threads = 0);

}  // namespace gbesq

#include "gbesq/detail/parallel_for.hpp"
