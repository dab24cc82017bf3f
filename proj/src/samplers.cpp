#include "gbesq/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <thread>
#include <string>

namespace gbesq {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), id_(stream_id), engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL))) {}

double RngStream::uniform() {
  // 53 random bits, shifted off zero
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::exponential() { return -std::log(uniform()); }

int default_threads() {
  if (const char* env = std::getenv("GBESQ_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> bessel_log_terms(double nu, double z, int count) {
  std::vector<double> lt(count);
  const double lz = std::log(0.5 * z);
  for (int n = 0; n < count; ++n) {
    const double g = n + nu + 1.0;
    lt[n] = g <= 0.0 ? -std::numeric_limits<double>::infinity()
                     : (2.0 * n + nu) * lz - std::lgamma(g) - std::lgamma(n + 1.0);
  }
  return lt;
}

// Enough terms to hold all but a negligible fraction of Bessel(nu, z).
int bessel_support(double z) { return static_cast<int>(60.0 + z + 12.0 * std::sqrt(z)); }

std::vector<double> normalized_bessel(double nu, double z, int& total) {
  if (!(nu >= -1.0)) throw std::invalid_argument("bessel_weights: nu must be >= -1");
  if (!(z >= 0.0)) throw std::invalid_argument("bessel_weights: z must be >= 0");
  if (z == 0.0) {
    total = nu > -1.0 ? 1 : 2;
    std::vector<double> w(total, 0.0);
    w.back() = 1.0;
    return w;
  }
  total = bessel_support(z);
  std::vector<double> lt = bessel_log_terms(nu, z, total);
  const double top = *std::max_element(lt.begin(), lt.end());
  std::vector<double> w(total);
  double sum = 0.0;
  for (int n = 0; n < total; ++n) sum += (w[n] = std::exp(lt[n] - top));
  for (double& v : w) v /= sum;
  return w;
}

// Largest power family resolved on one shared Talbot contour (measured against
// the constant-dimension Gamma numerators).
constexpr int kSharedContourPowers = 40;

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

double endpoint_variance(const GbesqSpec& spec, double t) {
  double v = 4.0 * spec.x0 * t;
  // 4 int delta(r) (t - r) dr; Simpson is exact on linear pieces
  for (const auto& p : spec.delta.pieces(0.0, t)) {
    const double m = 0.5 * (p.start + p.end);
    v += 4.0 * (p.end - p.start) / 6.0 *
         (p.value_start * (t - p.start) + 2.0 * (p.value_start + p.value_end) * (t - m) + p.value_end * (t - p.end));
  }
  return v;
}

// Inverse-CDF draw from Bessel(nu, z). Large z only visits a window of
// +-20 sqrt(z) around the mode (the standard deviation is about sqrt(z)/2).
int draw_bessel(double nu, double z, double u) {
  int lo = 0, count = 0;
  std::vector<double> w;
  if (z < 1000.0) {
    w = normalized_bessel(nu, z, count);
  } else {
    const double mode = 0.5 * (std::sqrt(z * z + nu * nu) - nu);
    const double half = 20.0 * std::sqrt(z) + 60.0;
    lo = static_cast<int>(std::max(0.0, std::floor(mode - half)));
    count = static_cast<int>(std::ceil(mode + half)) - lo + 1;
    w.resize(count);
    const double lz2 = 2.0 * std::log(0.5 * z);
    double l = (2.0 * lo + nu) * std::log(0.5 * z) - std::lgamma(lo + nu + 1.0) - std::lgamma(lo + 1.0);
    double top = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < count; ++k) {
      w[k] = l;
      top = std::max(top, l);
      const double n = lo + k;
      l += lz2 - std::log(n + 1.0) - std::log(n + nu + 1.0);
    }
    double sum = 0.0;
    for (double& v : w) sum += (v = std::exp(v - top));
    for (double& v : w) v /= sum;
  }
  double acc = 0.0;
  int k = 0;
  while (k < count - 1 && (acc += w[k]) < u) ++k;
  return lo + k;
}

// Last index kept when the Bessel(nu, z) tail beyond it must stay <= tol.
int bessel_cutoff(double nu, double z, double tol, double* tail_out) {
  int total = 0;
  const std::vector<double> w = normalized_bessel(nu, z, total);
  int n_last = total - 1;
  double tail = 0.0;
  while (n_last > 0 && tail + w[n_last] <= tol) tail += w[n_last--];
  if (tail_out) *tail_out = tail;
  return n_last;
}

}  // namespace

std::vector<double> bessel_weights(double nu, double z, int count) {
  int total = 0;
  std::vector<double> w = normalized_bessel(nu, z, total);
  w.resize(static_cast<std::size_t>(count), 0.0);
  return w;
}

double bessel_tail(double nu, double z, int n_last) {
  int total = 0;
  const std::vector<double> w = normalized_bessel(nu, z, total);
  double tail = 0.0;
  for (int n = total - 1; n > n_last; --n) tail += w[n];
  return tail;
}

BridgeMixture mixture_coeffs(const PiecewiseFn& delta, double x, double y, double t, int n_max, double tol) {
  if (!(t > 0.0)) throw std::invalid_argument("mixture_coeffs: t must be > 0");
  if (!(x >= 0.0) || !(y >= 0.0)) throw std::invalid_argument("mixture_coeffs: endpoints must be >= 0");
  if (y == 0.0) throw std::invalid_argument("mixture_coeffs: y = 0 is the bridge to zero, no mixture needed");
  const GbesqSpec base_spec = make_spec(delta, 0.0);

  BridgeMixture mix;
  const double d = delta.min_on(0.0, t);
  mix.nu = 0.5 * d - 1.0;
  mix.zeta = std::sqrt(x * y) / t;
  mix.z_dom = std::sqrt(x * y) * std::max(1.0, 1.0 / t);
  if (x == 0.0) {
    mix.b = {1.0};
    return mix;
  }

  double tail = 0.0;
  const int n_last = bessel_cutoff(mix.nu, mix.z_dom, tol, &tail);
  if (n_last > n_max) throw std::invalid_argument("mixture_coeffs: tolerance unreachable within n_max");
  mix.tail_bound = tail;

  TransformCallable base = endpoint_transform(base_spec, t);
  std::vector<double> g;
  if (n_last + 1 <= kSharedContourPowers) {
    g = invert_density_powers(base, [t](cplx l) { return 1.0 / (1.0 + 2.0 * t * l); }, y, n_last + 1, 24);
  } else {
    // high Gamma powers: one shifted vertical-line inversion per term
    g.resize(n_last + 1);
    for (int n = 0; n <= n_last; ++n) {
      TransformCallable fn = base;
      fn.eval = [spec = base_spec, t, n](cplx l) {
        return transition_laplace(spec, t, l) * std::pow(1.0 + 2.0 * t * l, -static_cast<double>(n));
      };
      if (n > 0) fn.atom_mass = 0.0;
      fn.mean = *base.mean + 2.0 * t * n;
      fn.variance = *base.variance + 4.0 * t * t * n;
      fn.method = InversionMethod::Euler;
      if (n == 0 && fn.atom_mass >= 1.0) {
        g[n] = 0.0;  // delta vanishes on [0, t]: no continuous part
        continue;
      }
      g[n] = invert_density(fn, y, 1e-10);
    }
  }

  std::vector<double> lb(n_last + 1);
  const double lx = std::log(x / (2.0 * t));
  for (int n = 0; n <= n_last; ++n)
    lb[n] = g[n] > 0.0 ? n * lx - std::lgamma(n + 1.0) + std::log(g[n]) : -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(lb.begin(), lb.end());
  if (!std::isfinite(top)) throw InversionError("mixture_coeffs: all numerators vanished");
  mix.b.resize(n_last + 1);
  double sum = 0.0;
  for (int n = 0; n <= n_last; ++n) sum += (mix.b[n] = std::exp(lb[n] - top));
  for (double& v : mix.b) v /= sum;
  return mix;
}

TransformCallable endpoint_transform(const GbesqSpec& spec, double t) {
  if (spec.has_drift()) throw std::invalid_argument("endpoint_transform: spec must be driftless");
  if (!(t > 0.0)) throw std::invalid_argument("endpoint_transform: t must be > 0");
  spec.validate();
  TransformCallable f;
  f.eval = [spec, t](cplx l) { return transition_laplace(spec, t, l); };
  f.abscissa = -0.5 / t;
  f.atom_mass = transition_atom_at_zero(spec, t);
  f.mean = transition_mean(spec, t);
  f.variance = endpoint_variance(spec, t);
  return f;
}

namespace {

BridgeIntegralTransform integral_transform(const PiecewiseFn& delta, double x, double y, double t,
                                           const RadonMeasure& mu, const SamplerOptions& opt,
                                           const BridgeMixture* given) {
  if (!(t > 0.0)) throw std::invalid_argument("bridge_integral_transform: t must be > 0");
  if (!(x >= 0.0) || !(y >= 0.0)) throw std::invalid_argument("bridge_integral_transform: endpoints must be >= 0");
  if (mu.horizon() > t * (1.0 + 1e-12) && mu.mass(t, mu.horizon()) > 0.0) {
    double at_t = 0.0;
    for (const auto& a : mu.atoms())
      if (same_time(a.location, t)) at_t += a.weight;
    if (mu.mass(t, mu.horizon()) - at_t > 0.0)
      throw std::invalid_argument("bridge_integral_transform: support of mu exceeds t");
  }

  BridgeIntegralTransform out;
  std::vector<RadonMeasure::Atom> interior_atoms;
  for (const auto& a : mu.atoms()) {
    if (same_time(a.location, 0.0)) out.offset += a.weight * x;
    else if (same_time(a.location, t)) out.offset += a.weight * y;
    else interior_atoms.push_back(a);
  }
  const double h = std::min(t, mu.horizon());
  const RadonMeasure interior(interior_atoms, mu.density().shifted(0.0, h), h);
  const bool zero_path = x == 0.0 && y == 0.0 && delta.max_on(0.0, t) == 0.0;
  if (interior.is_zero() || zero_path) {
    out.degenerate = true;
    return out;
  }

  BridgeMixture mix = given ? *given
                  : y > 0.0 ? mixture_coeffs(delta, x, y, t, opt.mixture_n_max, opt.mixture_tol)
                            : BridgeMixture::trivial();
  auto bt = std::make_shared<const BridgeTransform>(delta, x, y, t, interior, std::move(mix));
  const double scale = interior.total_mass() * (x + y + t * (1.0 + delta.max_on(0.0, t))) + 1e-300;

  TransformCallable& f = out.transform;
  f.eval = [bt](cplx a) { return (*bt)(a); };
  f.log_eval = [bt](cplx a) { return bt->log(a); };
  f.abscissa = -1.0 / scale;
  const double far = std::clamp((*bt)(1e10 / scale), 0.0, 1.0);
  f.atom_mass = far > 1e-13 ? far : 0.0;
  if (f.atom_mass >= 1.0 - 1e-13) {
    out.degenerate = true;
    return out;
  }
  return out;
}

}  // namespace

BridgeIntegralTransform bridge_integral_transform(const PiecewiseFn& delta, double x, double y, double t,
                                                  const RadonMeasure& mu, const SamplerOptions& opt) {
  return integral_transform(delta, x, y, t, mu, opt, nullptr);
}

double sample_endpoint(const GbesqSpec& spec, double t, RngStream& rng, const SamplerOptions& opt) {
  const TransformCallable f = endpoint_transform(spec, t);
  const double u = rng.uniform();
  if (u <= f.atom_mass) return 0.0;
  return quantile(f, u, opt.quantile_tol);
}

double sample_bridge_integral(const PiecewiseFn& delta, double x, double y, double t, const RadonMeasure& mu,
                              RngStream& rng, const SamplerOptions& opt) {
  // Constant dimension: the mixture is Bessel(nu, sqrt(xy)/t), so draw the
  // excursion count and invert the conditional law.
  std::optional<BridgeMixture> drawn;
  if (x > 0.0 && y > 0.0 && t > 0.0 && delta.min_on(0.0, t) == delta.max_on(0.0, t)) {
    BridgeMixture m;
    m.nu = 0.5 * delta.min_on(0.0, t) - 1.0;
    m.zeta = std::sqrt(x * y) / t;
    m.z_dom = m.zeta;
    const int n = draw_bessel(m.nu, m.zeta, rng.uniform());
    m.first = n;
    m.b = {1.0};
    drawn = std::move(m);
  }
  const BridgeIntegralTransform bit = integral_transform(delta, x, y, t, mu, opt, drawn ? &*drawn : nullptr);
  const double u = rng.uniform();
  if (bit.degenerate || u <= bit.transform.atom_mass) return bit.offset;
  return bit.offset + quantile(bit.transform, u, opt.quantile_tol);
}

namespace {

struct Segment {
  double value;
  double integral;
};

// One skeleton step [s, e]. The bridge transform is exact only while the
// dimension is constant, so the step is cut wherever delta changes value.
Segment advance(const PiecewiseFn& delta, double s, double e, double x, const RadonMeasure* mu, bool with_integral,
                RngStream& rng, const SamplerOptions& opt) {
  std::vector<double> cuts{s};
  const auto pieces = delta.pieces(s, e);
  for (std::size_t k = 1; k < pieces.size(); ++k)
    if (pieces[k].value_start != pieces[k - 1].value_start && pieces[k].start > cuts.back()) cuts.push_back(pieces[k].start);
  cuts.push_back(e);
  Segment out{x, 0.0};
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    const double a = cuts[k - 1], len = cuts[k] - a;
    const PiecewiseFn d = delta.shifted(a, len);
    const double y = sample_endpoint(GbesqSpec{d, std::nullopt, out.value}, len, rng, opt);
    if (with_integral) {
      const RadonMeasure piece = mu ? mu->window(a, cuts[k], false, true) : RadonMeasure::lebesgue(len);
      out.integral += sample_bridge_integral(d, out.value, y, len, piece, rng, opt);
    }
    out.value = y;
  }
  return out;
}

}  // namespace

std::vector<SkeletonPoint> sample_skeleton(const GbesqSpec& spec, const std::vector<double>& times,
                                           bool with_integrals, RngStream& rng,
                                           const std::optional<RadonMeasure>& mu, const SamplerOptions& opt) {
  if (times.empty() || times.front() != 0.0) throw std::invalid_argument("sample_skeleton: times must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("sample_skeleton: times must be increasing");
  if (spec.has_drift()) throw std::invalid_argument("sample_skeleton: spec must be driftless");
  spec.validate();
  if (mu && mu->horizon() + 1e-12 < times.back())
    throw std::invalid_argument("sample_skeleton: measure horizon shorter than the last time");

  std::vector<SkeletonPoint> out;
  out.push_back({0.0, spec.x0, with_integrals ? std::optional<double>(0.0) : std::nullopt});
  if (with_integrals && mu) {
    double w0 = 0.0;
    for (const auto& a : mu->atoms())
      if (same_time(a.location, 0.0)) w0 += a.weight;
    out.back().integral = w0 * spec.x0;
  }
  double x = spec.x0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const auto seg = advance(spec.delta, times[i - 1], times[i], x, mu ? &*mu : nullptr, with_integrals, rng, opt);
    out.push_back({times[i], seg.value, with_integrals ? std::optional<double>(seg.integral) : std::nullopt});
    x = seg.value;
  }
  return out;
}

std::optional<double> sample_default_time(const GbesqSpec& intensity, double horizon, double h, RngStream& rng,
                                          const SamplerOptions& opt) {
  if (!(horizon > 0.0) || !(h > 0.0)) throw std::invalid_argument("sample_default_time: horizon and h must be > 0");
  if (intensity.has_drift()) throw std::invalid_argument("sample_default_time: intensity must be driftless");
  intensity.validate();
  const double threshold = rng.exponential();
  const int steps = std::max(1, static_cast<int>(std::ceil(horizon / h - 1e-9)));
  double acc = 0.0, x = intensity.x0, s = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double e = i + 1 == steps ? horizon : (i + 1) * h;
    const auto seg = advance(intensity.delta, s, e, x, nullptr, true, rng, opt);
    const double inc = seg.integral;
    if (acc + inc >= threshold && inc > 0.0) return s + (e - s) * (threshold - acc) / inc;
    acc += inc;
    x = seg.value;
    s = e;
  }
  return std::nullopt;
}

}  // namespace gbesq
