#pragma once

// Small Monte Carlo statistics helpers shared by tests and validation.

#include <cstddef>
#include <functional>
#include <vector>

namespace gbesq {

/// Running mean and variance (Welford).
class MeanAccumulator {
 public:
  void add(double v);
  void merge(const MeanAccumulator& other);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double std_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

MeanAccumulator accumulate(const std::vector<double>& xs);

/// sup |F_n - F| for a sample against a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// sup |F_n - G_m| between two samples.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Asymptotic critical values at the 1% level.
double ks_critical_1pct(std::size_t n);
double ks_critical_1pct(std::size_t n, std::size_t m);

/// Sample variance of a vector with the standard error of that estimate
/// (from the fourth central moment).
struct VarianceEstimate {
  double variance;
  double std_error;
};
VarianceEstimate variance_with_error(const std::vector<double>& xs);

}  // namespace gbesq
