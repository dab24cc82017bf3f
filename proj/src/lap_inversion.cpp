#include "gbesq/lap_inversion.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace gbesq {

namespace {

constexpr double kShiftSds = 8.0;

void check_callable(const TransformCallable& f) {
  if (!f.eval) throw std::invalid_argument("TransformCallable: no evaluator");
  if (!(f.abscissa < 0.0)) throw std::invalid_argument("TransformCallable: abscissa must be < 0");
  if (!f.has_density) throw InversionError("law has no density away from zero");
}

}  // namespace

int talbot_nodes(double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("talbot_nodes: tol must be > 0");
  // about 0.6 M digits from the contour, minus cancellation in double precision
  const double digits = -std::log10(tol);
  return std::clamp(static_cast<int>(std::ceil(2.0 * digits)), 12, 28);
}

int euler_nodes(double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("euler_nodes: tol must be > 0");
  const double digits = -std::log10(tol);
  return std::clamp(static_cast<int>(std::ceil(1.8 * digits)), 10, 22);
}

namespace {

struct EulerWeights {
  double a;
  std::vector<double> eta;
};

const EulerWeights& euler_weights(int m) {
  static thread_local std::vector<std::optional<EulerWeights>> cache;
  if (static_cast<int>(cache.size()) <= m) cache.resize(m + 1);
  if (!cache[m]) {
    EulerWeights w;
    w.a = m * std::log(10.0) / 3.0;
    std::vector<double> xi(2 * m + 1, 1.0);
    xi[0] = 0.5;
    xi[2 * m] = std::ldexp(1.0, -m);
    double binom = 1.0;  // C(m, j)
    for (int j = 1; j < m; ++j) {
      binom = binom * (m - j + 1) / j;
      xi[2 * m - j] = xi[2 * m - j + 1] + std::ldexp(binom, -m);
    }
    w.eta.resize(2 * m + 1);
    for (int k = 0; k <= 2 * m; ++k) w.eta[k] = (k % 2 ? -1.0 : 1.0) * xi[k];
    cache[m] = std::move(w);
  }
  return *cache[m];
}

}  // namespace

cplx shifted_eval(const TransformCallable& f, cplx s, double shift) {
  if (shift == 0.0) return f.eval(s);
  if (f.log_eval) return std::exp(shift * s + f.log_eval(s));
  return std::exp(shift * s) * f.eval(s);
}

InversionPoint euler_point(const TransformCallable& f, double y, int m, double shift) {
  check_callable(f);
  if (!(y > shift) || shift < 0.0) throw std::invalid_argument("euler_point: need y > shift >= 0");
  if (shift > 0.0 && f.atom_mass > 0.0) throw std::invalid_argument("euler_point: shift with an atom at zero");
  const double z = y - shift;
  const EulerWeights& w = euler_weights(m);
  double dens = 0.0, cum = 0.0;
  for (int k = 0; k <= 2 * m; ++k) {
    const cplx s = cplx(w.a, std::numbers::pi * k) / z;
    const cplx v = shifted_eval(f, s, shift) - f.atom_mass;
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InversionError("transform not finite on the Euler line");
    dens += w.eta[k] * v.real();
    cum += w.eta[k] * (v / s).real();
  }
  const double scale = std::exp(w.a) / z;
  dens *= scale;
  cum = f.atom_mass + cum * scale;
  if (!std::isfinite(dens) || !std::isfinite(cum)) throw InversionError("Euler inversion did not converge");
  return {std::clamp(cum, 0.0, 1.0), std::max(dens, 0.0)};
}

double talbot_shift(const TransformCallable& f) {
  const auto [mean, var] = transform_moments(f);
  return std::max(0.0, mean - kShiftSds * std::sqrt(var));
}

TalbotContour::TalbotContour(const TransformCallable& f, double y0, int nodes, double shift)
    : y0_(y0), shift_(shift), atom_(f.atom_mass) {
  check_callable(f);
  if (!(y0 > shift)) throw std::invalid_argument("TalbotContour: y0 must exceed the shift");
  if (nodes < 4) throw std::invalid_argument("TalbotContour: too few nodes");
  if (shift < 0.0 || (shift > 0.0 && atom_ > 0.0)) throw std::invalid_argument("TalbotContour: bad shift");
  const int m = nodes;
  r_ = 2.0 * m / (5.0 * (y0 - shift));
  f0_ = shifted_eval(f, cplx(r_, 0.0), shift).real() - atom_;
  s_.reserve(m - 1);
  fw_.reserve(m - 1);
  for (int k = 1; k < m; ++k) {
    const double th = k * std::numbers::pi / m;
    const double cot = 1.0 / std::tan(th);
    const cplx s(r_ * th * cot, r_ * th);
    const double sigma = th + (th * cot - 1.0) * cot;
    const cplx v = shifted_eval(f, s, shift);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      if (std::abs(s) > 1e3 * r_) {
        // far along the contour the transform has decayed to its atom
        s_.push_back(s);
        fw_.push_back(cplx(0.0, 0.0));
        continue;
      }
      throw InversionError("transform not finite on the contour");
    }
    s_.push_back(s);
    fw_.push_back((v - atom_) * cplx(1.0, sigma));
  }
}

double TalbotContour::raw(double y, bool integrate) const {
  const double m = static_cast<double>(s_.size() + 1);
  double acc = 0.5 * std::exp(r_ * y) * f0_ / (integrate ? r_ : 1.0);
  for (std::size_t k = 0; k < s_.size(); ++k) {
    cplx term = std::exp(y * s_[k]) * fw_[k];
    if (integrate) term /= s_[k];
    acc += term.real();
  }
  return r_ / m * acc;
}

double TalbotContour::density(double y) const {
  if (!(y > 0.0)) throw std::invalid_argument("TalbotContour: density needs y > 0");
  if (y <= shift_) return 0.0;
  const double v = raw(y - shift_, false);
  if (!std::isfinite(v)) throw InversionError("density inversion did not converge");
  return std::max(v, 0.0);
}

double TalbotContour::cdf(double y) const {
  if (y < 0.0) return 0.0;
  if (y == 0.0) return atom_;
  if (y <= shift_) return atom_;
  const double v = atom_ + raw(y - shift_, true);
  if (!std::isfinite(v)) throw InversionError("cdf inversion did not converge");
  return std::clamp(v, 0.0, 1.0);
}

double invert_density(const TransformCallable& f, double y, double tol) {
  check_callable(f);
  if (f.method == InversionMethod::Euler) {
    if (!(y > 0.0)) throw std::invalid_argument("invert_density: y must be > 0");
    const double c = f.atom_mass > 0.0 ? 0.0 : talbot_shift(f);
    if (y <= c) return 0.0;
    return euler_point(f, y, euler_nodes(tol), c).density;
  }
  const double c = f.atom_mass > 0.0 ? 0.0 : talbot_shift(f);
  if (y <= c) return 0.0;
  return TalbotContour(f, y, talbot_nodes(tol), c).density(y);
}

double invert_cdf(const TransformCallable& f, double y, double tol) {
  check_callable(f);
  if (y <= 0.0) return y < 0.0 ? 0.0 : f.atom_mass;
  if (f.method == InversionMethod::Euler) {
    const double c = f.atom_mass > 0.0 ? 0.0 : talbot_shift(f);
    if (y <= c) return f.atom_mass;
    return euler_point(f, y, euler_nodes(tol), c).cdf;
  }
  const double c = f.atom_mass > 0.0 ? 0.0 : talbot_shift(f);
  if (y <= c) return f.atom_mass;
  return TalbotContour(f, y, talbot_nodes(tol), c).cdf(y);
}

std::vector<double> invert_density_powers(const TransformCallable& base, const std::function<cplx(cplx)>& factor,
                                          double y, int count, int nodes) {
  check_callable(base);
  if (!(y > 0.0)) throw std::invalid_argument("invert_density_powers: y must be > 0");
  if (count < 1 || nodes < 4) throw std::invalid_argument("invert_density_powers: bad count or node budget");
  const int m = nodes;
  const double r = 2.0 * m / (5.0 * y);
  // log-domain accumulation keeps high powers from underflowing on the contour
  std::vector<double> acc(count, 0.0);
  auto add = [&](cplx s, cplx f, cplx weight, double scale) {
    const cplx lf = std::log(factor(s));
    const cplx base_term = std::exp(y * s) * weight;
    for (int n = 0; n < count; ++n) {
      const cplx fn = n == 0 ? f - base.atom_mass : f * std::exp(static_cast<double>(n) * lf);
      acc[n] += scale * (base_term * fn).real();
    }
  };
  add(cplx(r, 0.0), base.eval(cplx(r, 0.0)), cplx(1.0, 0.0), 0.5);
  for (int k = 1; k < m; ++k) {
    const double th = k * std::numbers::pi / m;
    const double cot = 1.0 / std::tan(th);
    const cplx s(r * th * cot, r * th);
    const double sigma = th + (th * cot - 1.0) * cot;
    const cplx v = base.eval(s);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InversionError("transform not finite on the contour");
    add(s, v, cplx(1.0, sigma), 1.0);
  }
  std::vector<double> out(count);
  for (int n = 0; n < count; ++n) {
    const double v = r / m * acc[n];
    if (!std::isfinite(v)) throw InversionError("density inversion did not converge");
    out[n] = std::max(v, 0.0);
  }
  return out;
}

std::pair<double, double> transform_moments(const TransformCallable& f) {
  if (f.mean && f.variance) return {*f.mean, *f.variance};
  // F(ih) = 1 - i h m1 - h^2 m2 / 2 + i h^3 m3 / 6 + ..., Richardson on h and 2h.
  // A first pass at a tiny step gives the location and scale; the second
  // centres on the mean, G(ih) = exp(i h m1) F(ih), so 1 - Re G ~ h^2 var / 2
  // carries the variance without the m2 - m1^2 cancellation.
  auto pass = [&](double h, double centre) {
    const cplx a = std::exp(cplx(0.0, h * centre)) * f.eval(cplx(0.0, h));
    const cplx b = std::exp(cplx(0.0, 2.0 * h * centre)) * f.eval(cplx(0.0, 2.0 * h));
    const double d1 = -(8.0 * a.imag() - b.imag()) / (6.0 * h);
    const double c2 = (16.0 * (1.0 - a.real()) - (1.0 - b.real())) / (6.0 * h * h);
    return std::pair{centre + d1, c2 - d1 * d1};
  };
  const double h0 = 1e-4 * std::min(1.0, -f.abscissa);
  auto [m1, var] = pass(h0, 0.0);
  const double spread = std::max(std::sqrt(std::max(var, 0.0)), 1e-3 * std::abs(m1));
  if (spread > 0.0) {
    const double h = std::min(5e-3 / spread, 0.25 * -f.abscissa);
    if (h > h0) std::tie(m1, var) = pass(h, m1);
  }
  if (f.mean) m1 = *f.mean;
  if (f.variance) var = *f.variance;
  return {m1, std::max(var, 0.0)};
}

double quantile(const TransformCallable& f, double u, double tol) {
  check_callable(f);
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("quantile: u must be in (0, 1)");
  if (u <= f.atom_mass) return 0.0;
  const auto [mean, var] = transform_moments(f);
  double guess;
  if (mean > 0.0 && var > 0.0) {
    const double shape = mean * mean / var, scale = var / mean;
    const double uc = std::clamp((u - f.atom_mass) / (1.0 - f.atom_mass), 1e-12, 1.0 - 1e-12);
    guess = scale * boost::math::gamma_p_inv(shape, uc);
    if (!(guess > 0.0) || !std::isfinite(guess)) guess = mean;
  } else {
    guess = mean > 0.0 ? mean : 1.0;
  }
  guess = std::max(guess, 1e-12 * std::max(mean, 1e-300));
  if (mean > 0.0 && var > 0.0) guess = std::max(guess, mean - 5.0 * std::sqrt(var));

  const bool euler = f.method == InversionMethod::Euler;
  const double c = f.atom_mass > 0.0 ? 0.0 : std::max(0.0, mean - kShiftSds * std::sqrt(var));
  const int nodes = euler ? euler_nodes(tol) : talbot_nodes(tol);
  std::optional<TalbotContour> contour;
  InversionPoint last{f.atom_mass, 0.0};
  auto cdf_at = [&](double y) {
    if (y <= c) {
      last = {f.atom_mass, 0.0};
      return last.cdf;
    }
    if (euler) {
      last = euler_point(f, y, nodes, c);
      return last.cdf;
    }
    const double rel = y - c;
    if (!contour || rel < 0.5 * (contour->center() - c) || rel > 2.0 * (contour->center() - c))
      contour.emplace(f, y, nodes, c);
    last = {contour->cdf(y), contour->density(y)};
    return last.cdf;
  };

  // Newton from the moment-matched guess inside a bracket that only widens
  // when the right end is still unknown
  double lo = c, hi = std::numeric_limits<double>::infinity();
  double y = guess > c ? guess : c + std::max(std::sqrt(var), 1e-300);
  for (int it = 0; it < 300; ++it) {
    const double g = cdf_at(y) - u;
    if (std::abs(g) <= tol) return y;
    if (g < 0.0) lo = y; else hi = y;
    if (std::isfinite(hi) && hi - lo <= 1e-15 * hi) return y;
    double next = last.density > 0.0 ? y - g / last.density : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(hi)) next = std::min(next, c + 4.0 * (y - c));
    if (!(next > lo && next < hi)) {
      if (!std::isfinite(hi)) next = c + 2.0 * (y - c);
      else if (lo > c && hi - c > 4.0 * (lo - c)) next = c + std::sqrt((lo - c) * (hi - c));
      else next = 0.5 * (lo + hi);
    }
    y = next;
  }
  throw InversionError("quantile: root search did not converge (u=" + std::to_string(u) + ", bracket [" +
                       std::to_string(lo) + ", " + std::to_string(hi) + "])");
}

}  // namespace gbesq
