#pragma once

// Exact state-transition matrices of the characteristic equation
//
//     h'' = 2 h mu            (distributional sense)
//
// over the density pieces and atoms of a Radon measure mu. A propagator maps
// (h(u), h'(u)) to (h(v), h'(v)). Entries are stored with a common
// exponential scale so long, heavy pieces do not overflow.

#include <optional>
#include <vector>

#include "gbesq/time_structures.hpp"

namespace gbesq {

/// 2x2 unit-determinant transfer matrix; the true entries are
/// exp(log_scale) * {m11, m12, m21, m22}.
struct Propagator {
  double m11 = 1.0;
  double m12 = 0.0;
  double m21 = 0.0;
  double m22 = 1.0;
  double log_scale = 0.0;
  double from = 0.0;
  double to = 0.0;

  static Propagator identity(double at);

  double a11() const;
  double a12() const;
  double a21() const;
  double a22() const;
  /// Determinant of the true (unscaled) matrix.
  double det() const;
  /// Time-reversed propagator [m22, m12; m21, m11].
  Propagator reversed() const;
};

/// Constant density m >= 0 over [from, from + length]:
/// [cosh k L, sinh(k L)/k; k sinh k L, cosh k L] with k = sqrt(2m).
Propagator density_propagator(double m, double length, double from = 0.0);
/// Atom of weight w >= 0 at `at`: [1, 0; 2w, 1] (h'+ = h'- + 2 w h).
Propagator atom_propagator(double w, double at = 0.0);

/// Q * P for P: u -> s and Q: s -> v. Throws on mismatched endpoints.
Propagator compose(const Propagator& p, const Propagator& q);

/// Ordered product of the piece propagators of mu on [u, v]; atoms at u and v
/// are included.
Propagator full_propagator(const RadonMeasure& mu, double u, double v);

enum class Boundary {
  /// Phi'(a) = 0 after the last atom; Phi extends constantly to the right.
  RightNeumann,
  /// Drifted equation; the Feynman-Kac terminal condition is also Phi'(a) = 0.
  Principal,
};

/// Positive non-increasing solution of Phi'' + 2 beta Phi' = 2 Phi mu on
/// [0, a] with Phi(0) = 1, sampled at every breakpoint of mu (and of beta, and
/// of any requested extra points).
class DecayingSolution {
 public:
  struct Node {
    double time;
    double log_phi;
    double dlog_left;   // Phi'(t-) / Phi(t)
    double dlog_right;  // Phi'(t+) / Phi(t)
  };

  const std::vector<Node>& nodes() const { return nodes_; }
  Boundary boundary() const { return boundary_; }
  double horizon() const { return horizon_; }

  /// Phi'(0) with any atom at 0 applied (the left derivative).
  double dphi0() const { return nodes_.front().dlog_left; }
  double log_phi_at(double s) const;
  double phi_at(double s) const;

 private:
  friend DecayingSolution decaying_solution(const RadonMeasure&, double, Boundary,
                                            const std::vector<double>&,
                                            const std::optional<PiecewiseFn>&);
  struct Interval {
    double m;
    double b;
  };
  std::vector<Node> nodes_;
  std::vector<Interval> intervals_;  // between consecutive nodes
  Boundary boundary_ = Boundary::RightNeumann;
  double horizon_ = 0.0;
};

/// `drift`, when given, must be a step function (piecewise-constant beta).
DecayingSolution decaying_solution(const RadonMeasure& mu, double a,
                                   Boundary boundary = Boundary::RightNeumann,
                                   const std::vector<double>& extra_points = {},
                                   const std::optional<PiecewiseFn>& drift = std::nullopt);

}  // namespace gbesq
