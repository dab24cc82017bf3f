#pragma once

// Numerical inversion of Laplace transforms of laws on [0, inf): density,
// CDF and quantile. Two fixed-node methods:
//
// Talbot (fixed contour), for transforms analytic off the negative real axis
// and of moderate growth to the left:
//   f(y) ~ (r/M) [ F(r) e^{ry} / 2 + sum_k Re(e^{y s_k} F(s_k) (1 + i sigma_k)) ]
//   s_k = r theta_k (cot theta_k + i),  theta_k = k pi / M,  r = 2M / (5 y0).
//
// Euler (Fourier series on a vertical line with binomial averaging), which
// only evaluates F at Re s > 0:
//   f(y) ~ (e^A / y) sum_{k=0}^{2M} eta_k Re F((A + i pi k) / y),  A = M ln 10 / 3.

#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace gbesq {

using cplx = std::complex<double>;

enum class InversionMethod { Talbot, Euler };

struct TransformCallable {
  std::function<cplx(cplx)> eval;
  double abscissa = -1.0;   // analytic for Re lambda > abscissa (< 0)
  double atom_mass = 0.0;   // mass at zero, i.e. lim F at +inf
  bool has_density = true;  // false for laws with atoms away from zero
  std::optional<double> mean;
  std::optional<double> variance;
  InversionMethod method = InversionMethod::Euler;
  std::function<cplx(cplx)> log_eval;  // optional log F, used with large contour shifts
};

class InversionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Node counts used for a target accuracy; fixed so results are reproducible.
/// exp(shift * s) F(s), through log_eval when available.
cplx shifted_eval(const TransformCallable& f, cplx s, double shift);

int talbot_nodes(double tol);
int euler_nodes(double tol);  // the Euler sum uses 2M + 1 evaluations

struct InversionPoint {
  double cdf;
  double density;
};
/// CDF and density at y from one set of Euler nodes, inverting the law of
/// X - shift (see talbot_shift).
InversionPoint euler_point(const TransformCallable& f, double y, int m, double shift = 0.0);

/// Origin shift c = max(0, mean - 8 sd), used by both methods. Laws concentrated far from zero are
/// inverted as the law of X - c, whose transform e^{c s} F(s) stays tame on
/// the left part of the contour; the mass below c is neglected.
double talbot_shift(const TransformCallable& f);

/// F evaluated once on the contour tuned for y0. Densities and CDFs at nearby
/// y reuse the cached values; accuracy degrades slowly outside [y0/2, 2 y0]
/// (measured from the shifted origin).
class TalbotContour {
 public:
  TalbotContour(const TransformCallable& f, double y0, int nodes, double shift = 0.0);
  double density(double y) const;
  double cdf(double y) const;  // clamped to [0, 1]
  double center() const { return y0_; }
  double shift() const { return shift_; }

 private:
  double y0_;
  double shift_;
  double r_;
  double atom_;
  std::vector<cplx> s_;      // nodes k = 1..M-1
  std::vector<cplx> fw_;     // (F(s_k) - atom) (1 + i sigma_k)
  double f0_;                // F(r) - atom, the k = 0 term
  double raw(double y, bool integrate) const;
};

double invert_density(const TransformCallable& f, double y, double tol = 1e-9);
double invert_cdf(const TransformCallable& f, double y, double tol = 1e-9);
double quantile(const TransformCallable& f, double u, double tol = 1e-9);

/// Densities at y of the laws with transforms base * factor^n, n = 0..count-1,
/// all from one set of Talbot nodes. factor must vanish at infinity; the atom
/// of base is removed from the n = 0 term only. High powers of a factor with a
/// pole near the contour lose accuracy (see mixture_coeffs for the fallback).
std::vector<double> invert_density_powers(const TransformCallable& base, const std::function<cplx(cplx)>& factor,
                                          double y, int count, int nodes);

/// Mean and variance read off F'(0) and F''(0) (complex step).
std::pair<double, double> transform_moments(const TransformCallable& f);

}  // namespace gbesq
