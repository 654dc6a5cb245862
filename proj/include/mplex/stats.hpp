#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace mplex {

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

double chi_squared_cdf(double x, int dof);

double normal_cdf(double x);

// One-sample Kolmogorov-Smirnov statistic against a CDF given as a callable.
template <typename Cdf>
double ks_statistic(std::vector<double> sorted_sample, Cdf cdf) {
  const int n = int(sorted_sample.size());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = cdf(sorted_sample[i]);
    d = std::max(d, std::max(f - double(i) / n, double(i + 1) / n - f));
  }
  return d;
}

}  // namespace mplex
