#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bandit2p/errors.hpp"

namespace bandit2p {

inline double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) throw InsufficientDataError("mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) throw InsufficientDataError("variance needs n >= 2");
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

inline double stderr_of(const std::vector<double>& xs) {
  return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

// Nearest-rank quantile on the sorted sample: the ceil(p*n)-th order
// statistic (1-based), clamped to [1, n]. Monotone in p by construction.
inline double nearest_rank_quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw InsufficientDataError("quantile of empty sample");
  if (p < 0.0 || p > 1.0) throw ParameterError("quantile: p must be in [0, 1]");
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return xs[rank - 1];
}

inline double binomial_stderr(double p_hat, std::size_t n) {
  if (n == 0) throw InsufficientDataError("binomial stderr needs n >= 1");
  return std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) / static_cast<double>(n));
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

// Ordinary least squares y = a + b x with slope standard error and R^2.
inline LinearFit ols_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw DimensionError("ols_fit: size mismatch");
  const std::size_t n = xs.size();
  if (n < 2) throw InsufficientDataError("ols_fit needs n >= 2");
  const double nn = static_cast<double>(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= nn;
  my /= nn;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw ParameterError("ols_fit: degenerate abscissae");
  LinearFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ys[i] - (f.intercept + f.slope * xs[i]);
    sse += e * e;
  }
  f.r2 = (syy > 0.0) ? 1.0 - sse / syy : 1.0;
  f.slope_stderr = (n > 2) ? std::sqrt(sse / (nn - 2.0) / sxx) : 0.0;
  return f;
}

}  // namespace bandit2p
