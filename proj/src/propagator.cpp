#include "gbesq/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace gbesq {

namespace {

constexpr double kOverflowThreshold = 30.0;

// cosh(x) = exp(ls) * c and sinh(x)/kappa = exp(ls) * s for x = kappa * len.
struct HyperbolicParts {
  double ls;
  double c;
  double s;
};

HyperbolicParts hyperbolic(double kappa, double len) {
  const double x = kappa * len;
  if (x > kOverflowThreshold) {
    const double e = std::exp(-2.0 * x);
    return {x, 0.5 * (1.0 + e), 0.5 * (1.0 - e) / kappa};
  }
  if (x < 1e-4) return {0.0, 1.0 + x * x / 2.0, len * (1.0 + x * x / 6.0)};
  return {0.0, std::cosh(x), std::sinh(x) / kappa};
}

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

void renormalize(Propagator& p) {
  const double s = std::max({std::abs(p.m11), std::abs(p.m12), std::abs(p.m21), std::abs(p.m22)});
  if (s > 1e50 || (s < 1e-50 && s > 0.0)) {
    p.m11 /= s;
    p.m12 /= s;
    p.m21 /= s;
    p.m22 /= s;
    p.log_scale += std::log(s);
  }
}

}  // namespace

Propagator Propagator::identity(double at) { return Propagator{1.0, 0.0, 0.0, 1.0, 0.0, at, at}; }

double Propagator::a11() const { return m11 * std::exp(log_scale); }
double Propagator::a12() const { return m12 * std::exp(log_scale); }
double Propagator::a21() const { return m21 * std::exp(log_scale); }
double Propagator::a22() const { return m22 * std::exp(log_scale); }

double Propagator::det() const { return (m11 * m22 - m12 * m21) * std::exp(2.0 * log_scale); }

Propagator Propagator::reversed() const { return Propagator{m22, m12, m21, m11, log_scale, from, to}; }

Propagator density_propagator(double m, double length, double from) {
  if (m < 0.0) throw std::invalid_argument("density_propagator: negative density");
  if (length < 0.0) throw std::invalid_argument("density_propagator: negative length");
  const double k = std::sqrt(2.0 * m);
  const HyperbolicParts h = hyperbolic(k, length);
  // k sinh(kL) = k^2 * (sinh(kL)/k) = 2m * s
  return Propagator{h.c, h.s, 2.0 * m * h.s, h.c, h.ls, from, from + length};
}

Propagator atom_propagator(double w, double at) {
  if (w < 0.0) throw std::invalid_argument("atom_propagator: negative weight");
  return Propagator{1.0, 0.0, 2.0 * w, 1.0, 0.0, at, at};
}

Propagator compose(const Propagator& p, const Propagator& q) {
  if (!same_time(p.to, q.from)) throw std::invalid_argument("compose: mismatched endpoints");
  Propagator r;
  r.m11 = q.m11 * p.m11 + q.m12 * p.m21;
  r.m12 = q.m11 * p.m12 + q.m12 * p.m22;
  r.m21 = q.m21 * p.m11 + q.m22 * p.m21;
  r.m22 = q.m21 * p.m12 + q.m22 * p.m22;
  r.log_scale = p.log_scale + q.log_scale;
  r.from = p.from;
  r.to = q.to;
  renormalize(r);
  return r;
}

Propagator full_propagator(const RadonMeasure& mu, double u, double v) {
  if (u < 0.0 || v < u) throw std::invalid_argument("full_propagator: need 0 <= u <= v");
  Propagator acc = Propagator::identity(u);
  for (const auto& seg : mu.segments(u, v)) {
    if (seg.kind == RadonMeasure::Segment::Kind::Atom) {
      Propagator a = atom_propagator(seg.value, acc.to);
      acc = compose(acc, a);
    } else {
      acc = compose(acc, density_propagator(seg.value, seg.end - seg.start, acc.to));
    }
  }
  acc.to = v;
  return acc;
}

// ---------------------------------------------------------------------------

namespace {

// One backward step over an interval of length len with constant density m and
// drift b, from the right end where Phi'/Phi = r. Returns the log growth of Phi
// and the new ratio at the left end.
struct BackStep {
  double dlog;
  double r;
};

BackStep back_step(double m, double b, double len, double r) {
  const double kappa = std::sqrt(b * b + 2.0 * m);
  const HyperbolicParts h = hyperbolic(kappa, len);
  const double phi_factor = h.c - b * h.s - h.s * r;
  const double dphi_factor = -2.0 * m * h.s + (h.c + b * h.s) * r;
  if (!(phi_factor > 0.0)) throw std::logic_error("decaying_solution: Phi lost positivity");
  return {b * len + h.ls + std::log(phi_factor), dphi_factor / phi_factor};
}

}  // namespace

DecayingSolution decaying_solution(const RadonMeasure& mu, double a, Boundary boundary,
                                   const std::vector<double>& extra_points,
                                   const std::optional<PiecewiseFn>& drift) {
  if (!(a > 0.0)) throw std::invalid_argument("decaying_solution: a must be > 0");
  if (boundary == Boundary::Principal && !drift)
    throw std::invalid_argument("decaying_solution: principal boundary needs a drift");
  if (drift && drift->mode() != PiecewiseFn::Mode::Step)
    throw std::invalid_argument("decaying_solution: drift must be piecewise constant here");
  if (mu.horizon() > a * (1.0 + 1e-12)) {
    const double beyond = mu.mass(a, mu.horizon());
    double at_a = 0.0;
    for (const auto& at : mu.atoms())
      if (same_time(at.location, a)) at_a += at.weight;
    if (beyond - at_a > 0.0) throw std::invalid_argument("decaying_solution: support of mu exceeds a");
  }

  std::vector<double> pts{0.0, a};
  for (double p : mu.density().breakpoints())
    if (p > 0.0 && p < a) pts.push_back(p);
  std::map<double, double> atom_at;
  for (const auto& at : mu.atoms()) {
    if (at.location <= a * (1.0 + 1e-12)) {
      const double loc = std::min(at.location, a);
      pts.push_back(loc);
      atom_at[loc] += at.weight;
    }
  }
  for (double p : extra_points)
    if (p > 0.0 && p < a) pts.push_back(p);
  if (drift) {
    for (double p : drift->breakpoints())
      if (p > 0.0 && p < a) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> merged;
  for (double p : pts)
    if (merged.empty() || !same_time(merged.back(), p)) merged.push_back(p);

  auto atom_weight = [&](double t) {
    double w = 0.0;
    for (const auto& [loc, wt] : atom_at)
      if (same_time(loc, t)) w += wt;
    return w;
  };

  DecayingSolution sol;
  sol.boundary_ = boundary;
  sol.horizon_ = a;
  const std::size_t n = merged.size();
  sol.nodes_.resize(n);
  sol.intervals_.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double mid = 0.5 * (merged[i] + merged[i + 1]);
    const double m = mid <= mu.horizon() ? mu.density()(mid) : 0.0;
    const double b = drift ? (*drift)(mid) : 0.0;
    sol.intervals_[i] = {m, b};
  }

  // Backward sweep from Phi(a) = 1, Phi'(a+) = 0.
  sol.nodes_[n - 1] = {merged[n - 1], 0.0, -2.0 * atom_weight(merged[n - 1]), 0.0};
  for (std::size_t i = n - 1; i-- > 0;) {
    const auto& iv = sol.intervals_[i];
    const BackStep st = back_step(iv.m, iv.b, merged[i + 1] - merged[i], sol.nodes_[i + 1].dlog_left);
    auto& node = sol.nodes_[i];
    node.time = merged[i];
    node.log_phi = sol.nodes_[i + 1].log_phi + st.dlog;
    node.dlog_right = st.r;
    node.dlog_left = st.r - 2.0 * atom_weight(merged[i]);
  }
  const double shift = sol.nodes_.front().log_phi;
  for (auto& node : sol.nodes_) node.log_phi -= shift;
  return sol;
}

double DecayingSolution::log_phi_at(double s) const {
  if (s < 0.0) throw std::out_of_range("DecayingSolution: s < 0");
  if (s >= horizon_) return nodes_.back().log_phi;
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), s,
                             [](const Node& n, double t) { return n.time < t; });
  const std::size_t j = static_cast<std::size_t>(it - nodes_.begin());
  if (same_time(nodes_[j].time, s)) return nodes_[j].log_phi;
  const auto& iv = intervals_[j - 1];
  const BackStep st = back_step(iv.m, iv.b, nodes_[j].time - s, nodes_[j].dlog_left);
  return nodes_[j].log_phi + st.dlog;
}

double DecayingSolution::phi_at(double s) const { return std::exp(log_phi_at(s)); }

}  // namespace gbesq
