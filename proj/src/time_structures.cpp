#include "gbesq/time_structures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gbesq {

namespace {

constexpr double kTimeEps = 1e-12;

bool nearly(double a, double b, double scale = 1.0) {
  return std::abs(a - b) <= kTimeEps * std::max({1.0, scale, std::abs(a), std::abs(b)});
}

void check_breaks(const std::vector<double>& b) {
  if (b.size() < 2) throw std::invalid_argument("PiecewiseFn: need at least two breakpoints");
  for (std::size_t i = 1; i < b.size(); ++i) {
    if (!(b[i] > b[i - 1]))
      throw std::invalid_argument("PiecewiseFn: breakpoints must be strictly increasing");
  }
  for (double x : b) {
    if (!std::isfinite(x)) throw std::invalid_argument("PiecewiseFn: non-finite breakpoint");
  }
}

// Sorted union with near-duplicates removed.
std::vector<double> merge_points(std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts) {
    if (out.empty() || !nearly(p, out.back())) out.push_back(p);
  }
  return out;
}

}  // namespace

double expm1_ratio(double x) {
  if (std::abs(x) < 1e-6) return 1.0 + x / 2.0 + x * x / 6.0;
  return std::expm1(x) / x;
}

// ---------------------------------------------------------------------------
// PiecewiseFn

PiecewiseFn::PiecewiseFn() : mode_(Mode::Step), breaks_{0.0, 1.0}, values_{0.0} {}

PiecewiseFn::PiecewiseFn(Mode mode, std::vector<double> breaks, std::vector<double> values)
    : mode_(mode), breaks_(std::move(breaks)), values_(std::move(values)) {
  check_breaks(breaks_);
  const std::size_t expected = mode_ == Mode::Step ? breaks_.size() - 1 : breaks_.size();
  if (values_.size() != expected) throw std::invalid_argument("PiecewiseFn: wrong number of values");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("PiecewiseFn: non-finite value");
  }
}

PiecewiseFn PiecewiseFn::step(std::vector<double> breakpoints, std::vector<double> values) {
  return PiecewiseFn(Mode::Step, std::move(breakpoints), std::move(values));
}

PiecewiseFn PiecewiseFn::linear(std::vector<double> breakpoints, std::vector<double> node_values) {
  return PiecewiseFn(Mode::Linear, std::move(breakpoints), std::move(node_values));
}

PiecewiseFn PiecewiseFn::constant(double value, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("PiecewiseFn::constant: horizon must be > 0");
  return step({0.0, horizon}, {value});
}

std::size_t PiecewiseFn::piece_index(double t) const {
  const std::size_t n = breaks_.size() - 1;
  if (t <= breaks_.front()) return 0;
  if (t >= breaks_.back()) return n - 1;
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  return static_cast<std::size_t>(it - breaks_.begin()) - 1;
}

double PiecewiseFn::operator()(double t) const {
  if (mode_ == Mode::Step) return values_[piece_index(t)];
  if (t <= breaks_.front()) return values_.front();
  if (t >= breaks_.back()) return values_.back();
  const std::size_t i = piece_index(t);
  const double w = (t - breaks_[i]) / (breaks_[i + 1] - breaks_[i]);
  return values_[i] + w * (values_[i + 1] - values_[i]);
}

std::vector<PiecewiseFn::Piece> PiecewiseFn::pieces(double a, double b) const {
  std::vector<Piece> out;
  if (!(b > a)) return out;
  auto emit = [&](double s, double e) {
    if (e - s <= 0.0) return;
    if (mode_ == Mode::Step) {
      const double v = values_[piece_index(0.5 * (s + e))];
      out.push_back({s, e, v, v});
    } else {
      out.push_back({s, e, (*this)(s), (*this)(e)});
    }
  };
  if (a < breaks_.front()) emit(a, std::min(b, breaks_.front()));
  for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
    const double s = std::max(a, breaks_[i]);
    const double e = std::min(b, breaks_[i + 1]);
    if (e > s) emit(s, e);
  }
  if (b > breaks_.back()) emit(std::max(a, breaks_.back()), b);
  return out;
}

double PiecewiseFn::integral(double a, double b) const {
  if (b < a) throw std::invalid_argument("PiecewiseFn::integral: b < a");
  double sum = 0.0;
  for (const auto& p : pieces(a, b)) sum += (p.end - p.start) * 0.5 * (p.value_start + p.value_end);
  return sum;
}

double PiecewiseFn::min_on(double a, double b) const {
  if (b <= a) return (*this)(a);
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : pieces(a, b)) m = std::min({m, p.value_start, p.value_end});
  return m;
}

double PiecewiseFn::max_on(double a, double b) const {
  if (b <= a) return (*this)(a);
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& p : pieces(a, b)) m = std::max({m, p.value_start, p.value_end});
  return m;
}

bool PiecewiseFn::nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

PiecewiseFn PiecewiseFn::shifted(double s, double length) const {
  const double len = length > 0.0 ? length : breaks_.back() - s;
  if (!(len > 0.0)) throw std::invalid_argument("PiecewiseFn::shifted: empty range");
  std::vector<double> pts{0.0, len};
  for (double b : breaks_) {
    const double u = b - s;
    if (u > 0.0 && u < len) pts.push_back(u);
  }
  pts = merge_points(std::move(pts));
  if (mode_ == Mode::Step) {
    std::vector<double> vals;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) vals.push_back((*this)(s + 0.5 * (pts[i] + pts[i + 1])));
    return step(std::move(pts), std::move(vals));
  }
  std::vector<double> vals;
  for (double p : pts) vals.push_back((*this)(s + p));
  return linear(std::move(pts), std::move(vals));
}

PiecewiseFn PiecewiseFn::time_scaled(double c) const {
  if (!(c > 0.0)) throw std::invalid_argument("PiecewiseFn::time_scaled: c must be > 0");
  std::vector<double> b = breaks_;
  for (double& x : b) x /= c;
  return PiecewiseFn(mode_, std::move(b), values_);
}

PiecewiseFn PiecewiseFn::value_scaled(double c) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= c;
  return PiecewiseFn(mode_, breaks_, std::move(v));
}

PiecewiseFn PiecewiseFn::plus(const PiecewiseFn& other) const {
  if (mode_ != other.mode_) throw std::invalid_argument("PiecewiseFn::plus: mode mismatch");
  std::vector<double> pts = breaks_;
  pts.insert(pts.end(), other.breaks_.begin(), other.breaks_.end());
  pts = merge_points(std::move(pts));
  std::vector<double> vals;
  if (mode_ == Mode::Step) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double m = 0.5 * (pts[i] + pts[i + 1]);
      vals.push_back((*this)(m) + other(m));
    }
  } else {
    for (double p : pts) vals.push_back((*this)(p) + other(p));
  }
  return PiecewiseFn(mode_, std::move(pts), std::move(vals));
}

PiecewiseFn PiecewiseFn::midpoint_steps(int subdivisions) const {
  if (mode_ == Mode::Step) return *this;
  if (subdivisions < 1) throw std::invalid_argument("midpoint_steps: subdivisions must be >= 1");
  std::vector<double> pts{breaks_.front()};
  std::vector<double> vals;
  for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
    const double h = (breaks_[i + 1] - breaks_[i]) / subdivisions;
    for (int j = 0; j < subdivisions; ++j) {
      const double a = breaks_[i] + j * h;
      const double b = j + 1 == subdivisions ? breaks_[i + 1] : a + h;
      vals.push_back((*this)(0.5 * (a + b)));
      pts.push_back(b);
    }
  }
  return step(std::move(pts), std::move(vals));
}

// ---------------------------------------------------------------------------
// RadonMeasure

RadonMeasure::RadonMeasure() : RadonMeasure({}, PiecewiseFn::constant(0.0, 1.0), 1.0) {}

RadonMeasure::RadonMeasure(std::vector<Atom> atoms, PiecewiseFn density, double horizon)
    : horizon_(horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("RadonMeasure: horizon must be finite and > 0");
  if (density.mode() != PiecewiseFn::Mode::Step)
    throw std::invalid_argument("RadonMeasure: density must be a step function");
  if (!density.nonnegative()) throw std::invalid_argument("RadonMeasure: negative density");
  if (density.start() < -kTimeEps * horizon || density.end() > horizon * (1.0 + kTimeEps))
    throw std::invalid_argument("RadonMeasure: density support outside [0, horizon]");

  // Density on exactly [0, horizon], zero where it was not given.
  std::vector<double> pts{0.0, horizon};
  for (double b : density.breakpoints()) {
    if (b > 0.0 && b < horizon && !nearly(b, horizon, horizon) && !nearly(b, 0.0, horizon)) pts.push_back(b);
  }
  pts = merge_points(std::move(pts));
  std::vector<double> vals;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double m = 0.5 * (pts[i] + pts[i + 1]);
    vals.push_back(m < density.start() || m > density.end() ? 0.0 : density(m));
  }
  density_ = PiecewiseFn::step(std::move(pts), std::move(vals));

  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.location) || !std::isfinite(a.weight))
      throw std::invalid_argument("RadonMeasure: non-finite atom");
    if (a.weight < 0.0) throw std::invalid_argument("RadonMeasure: negative atom weight");
    if (a.location < -kTimeEps * horizon || a.location > horizon * (1.0 + kTimeEps))
      throw std::invalid_argument("RadonMeasure: atom outside [0, horizon]");
    if (a.weight == 0.0) continue;
    const double loc = std::clamp(a.location, 0.0, horizon);
    if (!atoms_.empty() && nearly(atoms_.back().location, loc, horizon)) {
      atoms_.back().weight += a.weight;
    } else {
      atoms_.push_back({loc, a.weight});
    }
  }
}

RadonMeasure RadonMeasure::zero(double horizon) {
  return RadonMeasure({}, PiecewiseFn::constant(0.0, horizon), horizon);
}

RadonMeasure RadonMeasure::lebesgue(double horizon, double scale) {
  if (scale < 0.0) throw std::invalid_argument("RadonMeasure::lebesgue: negative scale");
  return RadonMeasure({}, PiecewiseFn::constant(scale, horizon), horizon);
}

RadonMeasure RadonMeasure::dirac(double location, double weight, double horizon) {
  const double h = horizon > 0.0 ? horizon : location;
  if (!(h > 0.0)) throw std::invalid_argument("RadonMeasure::dirac: horizon must be > 0");
  return RadonMeasure({{location, weight}}, PiecewiseFn::constant(0.0, h), h);
}

bool RadonMeasure::is_zero() const {
  return atoms_.empty() && std::all_of(density_.values().begin(), density_.values().end(),
                                       [](double v) { return v == 0.0; });
}

double RadonMeasure::mass(double s, double t) const {
  const double eps = kTimeEps * std::max(1.0, horizon_);
  if (s < -eps || t > horizon_ + eps || s > t + eps)
    throw std::out_of_range("RadonMeasure::mass: interval outside [0, horizon]");
  s = std::clamp(s, 0.0, horizon_);
  t = std::clamp(t, s, horizon_);
  double m = density_.integral(s, t);
  for (const Atom& a : atoms_) {
    if (a.location >= s - eps && a.location <= t + eps) m += a.weight;
  }
  return m;
}

RadonMeasure RadonMeasure::reversed(double t) const {
  if (horizon_ > t * (1.0 + kTimeEps))
    throw std::invalid_argument("RadonMeasure::reversed: support exceeds t");
  const auto& b = density_.breakpoints();
  const auto& v = density_.values();
  std::vector<double> pts;
  std::vector<double> vals;
  if (t - horizon_ > kTimeEps * t) {
    pts.push_back(0.0);
    vals.push_back(0.0);
  }
  for (std::size_t i = b.size(); i-- > 0;) pts.push_back(std::max(0.0, t - b[i]));
  for (std::size_t i = v.size(); i-- > 0;) vals.push_back(v[i]);
  pts.front() = 0.0;
  pts.back() = t;
  std::vector<Atom> atoms;
  for (const Atom& a : atoms_) atoms.push_back({t - a.location, a.weight});
  return RadonMeasure(std::move(atoms), PiecewiseFn::step(std::move(pts), std::move(vals)), t);
}

RadonMeasure RadonMeasure::scaled(double c) const {
  if (c < 0.0) throw std::invalid_argument("RadonMeasure::scaled: negative factor");
  std::vector<Atom> atoms = atoms_;
  for (Atom& a : atoms) a.weight *= c;
  return RadonMeasure(std::move(atoms), density_.value_scaled(c), horizon_);
}

RadonMeasure RadonMeasure::with_atom(double location, double weight) const {
  std::vector<Atom> atoms = atoms_;
  atoms.push_back({location, weight});
  const double h = std::max(horizon_, location);
  return RadonMeasure(std::move(atoms), density_, h);
}

RadonMeasure RadonMeasure::window(double s, double t, bool keep_left_atom, bool keep_right_atom) const {
  const double eps = kTimeEps * std::max(1.0, horizon_);
  if (s < -eps || t > horizon_ + eps || !(t > s))
    throw std::out_of_range("RadonMeasure::window: interval outside [0, horizon]");
  std::vector<Atom> atoms;
  for (const Atom& a : atoms_) {
    const bool at_left = std::abs(a.location - s) <= eps;
    const bool at_right = std::abs(a.location - t) <= eps;
    if (at_left && !keep_left_atom) continue;
    if (at_right && !keep_right_atom) continue;
    if (a.location >= s - eps && a.location <= t + eps) atoms.push_back({std::clamp(a.location - s, 0.0, t - s), a.weight});
  }
  return RadonMeasure(std::move(atoms), density_.shifted(s, t - s), t - s);
}

RadonMeasure RadonMeasure::plus(const RadonMeasure& other) const {
  const double h = std::max(horizon_, other.horizon_);
  auto extend = [h](const PiecewiseFn& d) {
    if (d.end() >= h) return d;
    std::vector<double> b = d.breakpoints();
    std::vector<double> v = d.values();
    b.push_back(h);
    v.push_back(0.0);
    return PiecewiseFn::step(std::move(b), std::move(v));
  };
  std::vector<Atom> atoms = atoms_;
  atoms.insert(atoms.end(), other.atoms_.begin(), other.atoms_.end());
  return RadonMeasure(std::move(atoms), extend(density_).plus(extend(other.density_)), h);
}

std::vector<RadonMeasure::Segment> RadonMeasure::segments(double u, double v) const {
  const double eps = kTimeEps * std::max(1.0, horizon_);
  std::vector<Segment> out;
  std::vector<double> pts{u, v};
  for (double b : density_.breakpoints()) {
    if (b > u && b < v) pts.push_back(b);
  }
  std::vector<Atom> inside;
  for (const Atom& a : atoms_) {
    if (a.location >= u - eps && a.location <= v + eps) {
      inside.push_back(a);
      if (a.location > u && a.location < v) pts.push_back(a.location);
    }
  }
  pts = merge_points(std::move(pts));
  std::size_t next_atom = 0;
  auto emit_atoms_upto = [&](double p) {
    while (next_atom < inside.size() && inside[next_atom].location <= p + eps) {
      const Atom& a = inside[next_atom++];
      out.push_back({Segment::Kind::Atom, a.location, a.location, a.weight});
    }
  };
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    emit_atoms_upto(pts[i]);
    const double a = pts[i];
    const double b = pts[i + 1];
    const double m = 0.5 * (a + b);
    const double val = m > horizon_ ? 0.0 : density_(m);
    out.push_back({Segment::Kind::Density, a, b, val});
  }
  emit_atoms_upto(v);
  return out;
}

// ---------------------------------------------------------------------------
// TimeChange

TimeChange TimeChange::identity(double horizon) {
  return piecewise_linear({0.0, horizon}, {1.0});
}

TimeChange TimeChange::piecewise_linear(std::vector<double> breakpoints, std::vector<double> slopes) {
  if (breakpoints.empty() || breakpoints.front() != 0.0)
    throw std::invalid_argument("TimeChange: breakpoints must start at 0");
  for (double s : slopes) {
    if (!(s > 0.0)) throw std::invalid_argument("TimeChange: slopes must be > 0 (non-invertible map)");
  }
  TimeChange tc;
  tc.kind_ = Kind::PiecewiseLinear;
  tc.slopes_ = PiecewiseFn::step(std::move(breakpoints), std::move(slopes));
  tc.horizon_ = tc.slopes_.end();
  const auto& b = tc.slopes_.breakpoints();
  tc.image_breaks_.push_back(0.0);
  for (std::size_t i = 0; i + 1 < b.size(); ++i)
    tc.image_breaks_.push_back(tc.image_breaks_.back() + tc.slopes_.values()[i] * (b[i + 1] - b[i]));
  return tc;
}

TimeChange TimeChange::exponential(double scale, double rate, double horizon) {
  if (!(scale > 0.0)) throw std::invalid_argument("TimeChange: exponential scale must be > 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("TimeChange: horizon must be > 0");
  TimeChange tc;
  tc.kind_ = Kind::Exponential;
  tc.scale_ = scale;
  tc.rate_ = rate;
  tc.horizon_ = horizon;
  return tc;
}

double TimeChange::operator()(double t) const {
  if (kind_ == Kind::Exponential) return scale_ * t * expm1_ratio(rate_ * t);
  const auto& b = slopes_.breakpoints();
  if (t <= 0.0) return slopes_.values().front() * t;
  auto it = std::upper_bound(b.begin(), b.end(), t);
  std::size_t i = static_cast<std::size_t>(it - b.begin()) - 1;
  if (i >= b.size() - 1) i = b.size() - 2;
  return image_breaks_[i] + slopes_.values()[i] * (t - b[i]);
}

double TimeChange::derivative(double t) const {
  if (kind_ == Kind::Exponential) return scale_ * std::exp(rate_ * t);
  return slopes_(t);
}

double TimeChange::inverse(double s) const {
  if (kind_ == Kind::Exponential) {
    const double y = rate_ * s / scale_;
    if (y <= -1.0) throw std::domain_error("TimeChange::inverse: value outside the image");
    const double ratio = std::abs(y) < 1e-8 ? 1.0 - y / 2.0 + y * y / 3.0 : std::log1p(y) / y;
    return s / scale_ * ratio;
  }
  if (s <= 0.0) return s / slopes_.values().front();
  auto it = std::upper_bound(image_breaks_.begin(), image_breaks_.end(), s);
  std::size_t i = static_cast<std::size_t>(it - image_breaks_.begin()) - 1;
  if (i >= image_breaks_.size() - 1) i = image_breaks_.size() - 2;
  return slopes_.breakpoints()[i] + (s - image_breaks_[i]) / slopes_.values()[i];
}

// ---------------------------------------------------------------------------

RadonMeasure pushforward_functional(const PiecewiseFn& g, const TimeChange& f, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("pushforward_functional: horizon must be > 0");
  if (f.kind() != TimeChange::Kind::PiecewiseLinear)
    throw std::invalid_argument("pushforward_functional: exact only for piecewise-linear time changes");
  if (g.mode() != PiecewiseFn::Mode::Step)
    throw std::invalid_argument("pushforward_functional: g must be piecewise constant");
  if (!g.nonnegative()) throw std::invalid_argument("pushforward_functional: g must be >= 0");
  std::vector<double> pts{0.0, horizon};
  for (double b : g.breakpoints())
    if (b > 0.0 && b < horizon) pts.push_back(b);
  for (double b : f.slopes().breakpoints())
    if (b > 0.0 && b < horizon) pts.push_back(b);
  pts = merge_points(std::move(pts));
  std::vector<double> image;
  std::vector<double> dens;
  for (double p : pts) image.push_back(f(p));
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double m = 0.5 * (pts[i] + pts[i + 1]);
    dens.push_back(g(m) / f.derivative(m));
  }
  const double top = image.back();
  return RadonMeasure({}, PiecewiseFn::step(std::move(image), std::move(dens)), top);
}

double measure_of_interval(const RadonMeasure& mu, double s, double t) {
  if (s < 0.0 || t > mu.horizon() * (1.0 + kTimeEps) || s > t)
    throw std::out_of_range("measure_of_interval: need 0 <= s <= t <= horizon");
  return mu.mass(s, t);
}

RadonMeasure reverse_measure(const RadonMeasure& mu, double t) { return mu.reversed(t); }

}  // namespace gbesq
