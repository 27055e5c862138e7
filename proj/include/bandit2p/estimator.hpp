#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

#include "bandit2p/errors.hpp"
#include "bandit2p/geometry.hpp"
#include "bandit2p/losses.hpp"
#include "bandit2p/sampling.hpp"
#include "bandit2p/vec.hpp"

namespace bandit2p {

// One two-point query: g = d (f(x + a u) - f(x - a u)) / (2 a) * u.
// Both raw query values are kept so traces can reconstruct every derived
// quantity offline without re-evaluating the loss.
struct TwoPointQuery {
  Vec x;
  Vec u;
  double alpha = 0.0;
  double value_plus = 0.0;
  double value_minus = 0.0;
  Vec g;

  double g_norm_sq() const { return norm_sq(g); }
};

inline TwoPointQuery two_point_gradient(const LossFunction& loss, const ConvexBody& body,
                                        const Vec& x, const Vec& u, double alpha) {
  if (alpha <= 0.0) throw ParameterError("two_point_gradient: alpha must be > 0");
  check_same_dim(x, u);
  const double un = norm(u);
  if (std::abs(un - 1.0) > 1e-9)
    throw ParameterError("two_point_gradient: u must be a unit vector");

  const Vec plus = axpy(x, alpha, u);
  const Vec minus = axpy(x, -alpha, u);
  if (!body.contains(plus) || !body.contains(minus))
    throw FeasibilityError(
        "two_point_gradient: query point outside K (alpha/xi misconfiguration?)");

  TwoPointQuery q;
  q.x = x;
  q.u = u;
  q.alpha = alpha;
  q.value_plus = loss.evaluate(plus);
  q.value_minus = loss.evaluate(minus);
  const double d = static_cast<double>(x.size());
  q.g = scaled(u, d * (q.value_plus - q.value_minus) / (2.0 * alpha));
  return q;
}

// Monte-Carlo estimate of the ball-smoothed loss E_v[f(x + alpha v)].
// alpha = 0 degenerates to an exact point evaluation.
inline std::pair<double, double> smoothed_loss_estimate(const LossFunction& loss,
                                                        const ConvexBody& body, const Vec& x,
                                                        double alpha, std::size_t n,
                                                        RandomSource& src) {
  if (alpha < 0.0) throw ParameterError("smoothed_loss_estimate: alpha must be >= 0");
  if (alpha == 0.0) return {loss.evaluate(x), 0.0};
  if (n < 2) throw ParameterError("smoothed_loss_estimate: n must be >= 2");
  if (!body.contains_ball(x, alpha))
    throw FeasibilityError("smoothed_loss_estimate: smoothing ball leaves K");

  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Vec v = sample_ball(src, x.size());
    const double val = loss.evaluate(axpy(x, alpha, v));
    sum += val;
    sum_sq += val * val;
  }
  const double nn = static_cast<double>(n);
  const double mean = sum / nn;
  const double var = (sum_sq - nn * mean * mean) / (nn - 1.0);
  return {mean, std::sqrt(std::max(var, 0.0) / nn)};
}

}  // namespace bandit2p
