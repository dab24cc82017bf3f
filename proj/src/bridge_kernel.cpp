#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gbesq/transforms.hpp"

namespace gbesq {

cplx log_sinhc(cplx z) {
  if (std::abs(z) < 0.1) {
    const cplx z2 = z * z;
    return z2 * (1.0 / 6.0 + z2 * (-1.0 / 180.0 + z2 * (1.0 / 2835.0 + z2 * (-1.0 / 37800.0 + z2 / 467775.0))));
  }
  return z + std::log(1.0 - std::exp(-2.0 * z)) - std::log(2.0 * z);
}

cplx log_cosh(cplx z) {
  if (std::abs(z) < 1e-4) return 0.5 * z * z;
  return z + std::log(1.0 + std::exp(-2.0 * z)) - std::numbers::ln2;
}

cplx tanh_over(cplx k, double s) {
  const cplx z = k * s;
  if (std::abs(z) < 1e-2) {
    const cplx z2 = z * z;
    return s * (1.0 + z2 * (-1.0 / 3.0 + z2 * (2.0 / 15.0 - z2 * 17.0 / 315.0)));
  }
  const cplx e = std::exp(-2.0 * z);
  return (1.0 - e) / ((1.0 + e) * k);
}

namespace {

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

struct StepResult {
  cplx dlog;  // log w(c - len) - log w(c), continuous branch
  cplx q;     // w'/w at c - len
};

// Backward step of w'' = k^2 w over a constant piece, from q = w'/w at the
// right end. Substeps keep the principal log on the continuous branch.
StepResult back_step(cplx q, cplx k, cplx k2, double len, int depth = 0) {
  const cplx tt = tanh_over(k, len);
  const cplx f = 1.0 - q * tt;
  if (depth < 48 && (std::abs(k.imag()) * len > 0.5 || std::abs(std::arg(f)) > 0.5 * std::numbers::pi)) {
    const StepResult a = back_step(q, k, k2, 0.5 * len, depth + 1);
    const StepResult b = back_step(a.q, k, k2, 0.5 * len, depth + 1);
    return {a.dlog + b.dlog, b.q};
  }
  return {log_cosh(k * len) + std::log(f), (q - k2 * tt) / f};
}

}  // namespace

BridgeKernel::BridgeKernel(const PiecewiseFn& delta, double t, const RadonMeasure& mu) : t_(t) {
  if (!(t > 0.0)) throw std::invalid_argument("BridgeKernel: t must be > 0");
  if (delta.mode() != PiecewiseFn::Mode::Step || !delta.nonnegative())
    throw std::invalid_argument("BridgeKernel: delta must be a nonnegative step function");
  if (mu.horizon() > t * (1.0 + 1e-12)) {
    double at_t = 0.0;
    for (const auto& a : mu.atoms())
      if (same_time(a.location, t)) at_t += a.weight;
    if (mu.mass(t, mu.horizon()) - at_t > 0.0)
      throw std::invalid_argument("BridgeKernel: support of mu exceeds t");
  }
  std::vector<double> pts{0.0, t};
  for (double p : mu.density().breakpoints())
    if (p > 0.0 && p < t) pts.push_back(p);
  for (const auto& a : mu.atoms())
    if (a.location > 0.0 && a.location < t) pts.push_back(a.location);
  for (double p : delta.breakpoints())
    if (p > 0.0 && p < t) pts.push_back(p);
  std::sort(pts.begin(), pts.end());
  std::vector<double> merged;
  for (double p : pts)
    if (merged.empty() || !same_time(merged.back(), p)) merged.push_back(p);
  merged.back() = t;

  auto atom_weight = [&](double at) {
    double w = 0.0;
    for (const auto& a : mu.atoms())
      if (same_time(a.location, at)) w += a.weight;
    return w;
  };
  for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
    const double mid = 0.5 * (merged[i] + merged[i + 1]);
    const double m = mid <= mu.horizon() ? mu.density()(mid) : 0.0;
    intervals_.push_back({merged[i], merged[i + 1], m, delta(mid), atom_weight(merged[i])});
  }
  atom_at_end_ = atom_weight(t);
  uniform_ = true;
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (intervals_[i].m != intervals_.front().m) uniform_ = false;
    if (i > 0 && intervals_[i].atom_at_start != 0.0) uniform_ = false;
  }
}

BridgeKernel::Terms BridgeKernel::terms(cplx alpha) const {
  const std::size_t n = intervals_.size();
  std::vector<cplx> l_start(n);
  cplx q0;

  if (uniform_) {
    const cplx k2 = 2.0 * alpha * intervals_.front().m;
    const cplx k = std::sqrt(k2);
    for (std::size_t j = 0; j < n; ++j) l_start[j] = log_sinhc(k * (t_ - intervals_[j].start));
    q0 = -1.0 / tanh_over(k, t_);
  } else {
    cplx q;
    cplx l;
    for (std::size_t j = n; j-- > 0;) {
      const Interval& iv = intervals_[j];
      const double len = iv.end - iv.start;
      const cplx k2 = 2.0 * alpha * iv.m;
      const cplx k = std::sqrt(k2);
      if (j + 1 == n) {
        l = log_sinhc(k * len);
        q = -1.0 / tanh_over(k, len);
      } else {
        const StepResult st = back_step(q, k, k2, len);
        l += st.dlog - std::log((t_ - iv.start) / (t_ - iv.end));
        q = st.q;
      }
      l_start[j] = l;
      if (j > 0) q -= 2.0 * alpha * iv.atom_at_start;
    }
    q0 = q;
  }
  q0 -= 2.0 * alpha * intervals_.front().atom_at_start;

  cplx log_b(0.0, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (intervals_[j].delta == 0.0) continue;
    const cplx l_end = j + 1 < n ? l_start[j + 1] : cplx(0.0, 0.0);
    log_b += 0.5 * intervals_[j].delta * (l_end - l_start[j]);
  }

  // Forward ratio psi'/psi of the solution started at 0 with (0, 1).
  cplx r;
  if (uniform_) {
    const cplx k = std::sqrt(2.0 * alpha * intervals_.front().m);
    r = 1.0 / tanh_over(k, t_);
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      const Interval& iv = intervals_[j];
      const double len = iv.end - iv.start;
      const cplx k2 = 2.0 * alpha * iv.m;
      const cplx k = std::sqrt(k2);
      const cplx tt = tanh_over(k, len);
      if (j == 0) {
        r = 1.0 / tt;
      } else {
        r += 2.0 * alpha * iv.atom_at_start;
        r = (k2 * tt + r) / (1.0 + r * tt);
      }
    }
  }
  r += 2.0 * alpha * atom_at_end_;

  const double inv_t = 1.0 / t_;
  return Terms{0.5 * (inv_t + q0), 0.5 * (inv_t - r), log_b, l_start.front()};
}

BridgeTransform::BridgeTransform(const PiecewiseFn& delta, double x, double y, double t, const RadonMeasure& mu,
                                 BridgeMixture mix)
    : kernel_(delta, t, mu), x_(x), y_(y), mix_(std::move(mix)) {
  if (x < 0.0 || y < 0.0) throw std::invalid_argument("BridgeTransform: endpoints must be >= 0");
  if (mix_.b.empty()) throw std::invalid_argument("BridgeTransform: empty mixture");
}

cplx BridgeTransform::log(cplx alpha) const {
  const BridgeKernel::Terms tm = kernel_.terms(alpha);
  const cplx rho = std::exp(-2.0 * tm.log_psi_ratio);
  cplx series(0.0, 0.0);
  for (std::size_t n = mix_.b.size(); n-- > 0;) series = series * rho + mix_.b[n];
  const cplx lead = -2.0 * static_cast<double>(mix_.first) * tm.log_psi_ratio;
  return x_ * tm.cx + y_ * tm.cy + tm.log_b + lead + std::log(series);
}

cplx BridgeTransform::operator()(cplx alpha) const { return std::exp(log(alpha)); }

double bridge_zero_laplace(const PiecewiseFn& delta, double x, double t, const RadonMeasure& mu) {
  if (x < 0.0) throw std::invalid_argument("bridge_zero_laplace: x must be >= 0");
  const BridgeKernel kernel(delta, t, mu);
  const BridgeKernel::Terms tm = kernel.terms(1.0);
  return std::exp(x * tm.cx.real() + tm.log_b.real());
}

double bridge_laplace(const PiecewiseFn& delta, double x, double y, double t, const RadonMeasure& mu,
                      const BridgeMixture& mix) {
  return BridgeTransform(delta, x, y, t, mu, mix)(1.0);
}

}  // namespace gbesq
