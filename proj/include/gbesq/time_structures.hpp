#pragma once

// Deterministic time functions and measures: dimensions, drifts, Radon
// measures with atoms and time changes. Everything here is immutable after
// construction and evaluates exactly (no quadrature).

#include <span>
#include <stdexcept>
#include <vector>

namespace gbesq {

/// Right-continuous step function or continuous piecewise-linear function on
/// [breakpoints.front(), breakpoints.back()]. Outside that range the function
/// holds its boundary value.
class PiecewiseFn {
 public:
  enum class Mode { Step, Linear };

  /// One constant (step) or linear piece.
  struct Piece {
    double start;
    double end;
    double value_start;
    double value_end;  // equals value_start in step mode
  };

  PiecewiseFn();

  /// `values.size() == breakpoints.size() - 1`.
  static PiecewiseFn step(std::vector<double> breakpoints, std::vector<double> values);
  /// `node_values.size() == breakpoints.size()` (values at the breakpoints).
  static PiecewiseFn linear(std::vector<double> breakpoints, std::vector<double> node_values);
  static PiecewiseFn constant(double value, double horizon);

  Mode mode() const { return mode_; }
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }
  double start() const { return breaks_.front(); }
  double end() const { return breaks_.back(); }

  double operator()(double t) const;
  /// Exact integral over [a, b], a <= b; extends by the boundary values.
  double integral(double a, double b) const;
  /// Infimum over [a, b].
  double min_on(double a, double b) const;
  double max_on(double a, double b) const;
  bool nonnegative() const;

  /// Pieces overlapping [a, b], clipped to it, including the constant
  /// extension beyond end().
  std::vector<Piece> pieces(double a, double b) const;

  /// u -> f(u + s), defined on [0, end() - s] (or [0, length] if given).
  PiecewiseFn shifted(double s, double length = -1.0) const;
  /// u -> f(c u).
  PiecewiseFn time_scaled(double c) const;
  /// u -> c f(u).
  PiecewiseFn value_scaled(double c) const;
  /// Pointwise sum of two step functions on the union of breakpoints.
  PiecewiseFn plus(const PiecewiseFn& other) const;
  /// Step function sampled at piece midpoints (exact for step mode).
  PiecewiseFn midpoint_steps(int subdivisions) const;

  bool operator==(const PiecewiseFn&) const = default;

 private:
  PiecewiseFn(Mode mode, std::vector<double> breaks, std::vector<double> values);
  std::size_t piece_index(double t) const;

  Mode mode_;
  std::vector<double> breaks_;
  std::vector<double> values_;
};

/// Positive Radon measure on [0, horizon]: atoms plus a step density.
class RadonMeasure {
 public:
  struct Atom {
    double location;
    double weight;
    bool operator==(const Atom&) const = default;
  };

  /// One elementary element in time order: either a density piece or an atom.
  struct Segment {
    enum class Kind { Density, Atom } kind;
    double start;
    double end;    // == start for atoms
    double value;  // density value or atom weight
  };

  RadonMeasure();
  RadonMeasure(std::vector<Atom> atoms, PiecewiseFn density, double horizon);

  static RadonMeasure zero(double horizon);
  static RadonMeasure lebesgue(double horizon, double scale = 1.0);
  static RadonMeasure dirac(double location, double weight, double horizon = -1.0);

  double horizon() const { return horizon_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const PiecewiseFn& density() const { return density_; }
  bool is_zero() const;

  /// Exact mass of the closed interval [s, t].
  double mass(double s, double t) const;
  double total_mass() const { return mass(0.0, horizon_); }

  /// Image under s -> t - s; requires horizon() <= t.
  RadonMeasure reversed(double t) const;
  /// c * mu, c >= 0.
  RadonMeasure scaled(double c) const;
  /// mu + weight * delta_location.
  RadonMeasure with_atom(double location, double weight) const;
  /// Restriction to [s, t] shifted to [0, t - s]. Atoms at s are kept when
  /// `keep_left_atom`, atoms at t are kept when `keep_right_atom`.
  RadonMeasure window(double s, double t, bool keep_left_atom = true,
                      bool keep_right_atom = true) const;
  /// Sum of two measures.
  RadonMeasure plus(const RadonMeasure& other) const;

  /// Time-ordered elementary segments restricted to [u, v]. Atoms exactly at u
  /// and v are included. Density pieces of zero value are emitted as well.
  std::vector<Segment> segments(double u, double v) const;

  bool operator==(const RadonMeasure&) const = default;

 private:
  std::vector<Atom> atoms_;
  PiecewiseFn density_;
  double horizon_;
};

/// Strictly increasing map from model time [0, T] to process time, f(0) = 0.
/// Either piecewise linear (slopes on pieces) or exponential
/// f(t) = scale * (exp(rate t) - 1) / rate, whose rate -> 0 limit is scale * t.
class TimeChange {
 public:
  enum class Kind { PiecewiseLinear, Exponential };

  static TimeChange identity(double horizon);
  /// Piecewise-linear map with the given slopes (all > 0) on the pieces.
  static TimeChange piecewise_linear(std::vector<double> breakpoints, std::vector<double> slopes);
  static TimeChange exponential(double scale, double rate, double horizon);

  Kind kind() const { return kind_; }
  double horizon() const { return horizon_; }
  const PiecewiseFn& slopes() const { return slopes_; }

  double operator()(double t) const;
  double derivative(double t) const;
  double inverse(double s) const;

 private:
  TimeChange() = default;
  Kind kind_ = Kind::PiecewiseLinear;
  PiecewiseFn slopes_;
  std::vector<double> image_breaks_;
  double scale_ = 1.0;
  double rate_ = 0.0;
  double horizon_ = 0.0;
};

/// Measure on [0, f(T)] with density s -> g(f^-1(s)) / f'(f^-1(s)), so that
/// int_0^T g(s) X_{f(s)} ds = int X dmu. Exact for step g and piecewise-linear f.
RadonMeasure pushforward_functional(const PiecewiseFn& g, const TimeChange& f, double horizon);

/// Exact mass of [s, t]; throws std::out_of_range outside [0, horizon].
double measure_of_interval(const RadonMeasure& mu, double s, double t);

/// Image of mu under s -> t - s; throws std::invalid_argument if the support
/// of mu exceeds t.
RadonMeasure reverse_measure(const RadonMeasure& mu, double t);

/// exp(x) - 1 over x, stable near zero.
double expm1_ratio(double x);

}  // namespace gbesq
