#pragma once

#include "bandit2p/bandit2p.hpp"

namespace bandit2p::testing {

// Random point in D*B around the origin (not uniform in K; good enough for
// property tests).
inline Vec random_point(RandomSource& src, std::size_t d, double scale) {
  Vec v = sample_ball(src, d);
  return scaled(v, scale);
}

inline Vec random_point_in(RandomSource& src, const ConvexBody& body) {
  for (;;) {
    Vec v = random_point(src, body.dim(), body.outer_radius());
    if (body.contains(v)) return v;
  }
}

inline RunConfig basic_config(std::size_t d, int T, Vec center, std::uint64_t seed = 7) {
  RunConfig c;
  c.dim = d;
  c.horizon = T;
  c.body = ConvexBody::ball(d, 1.0);
  c.adversary.kind = AdversarySequence::Kind::Fixed;
  c.adversary.center = std::move(center);
  c.adversary.curvature = 1.0;
  c.seed = seed;
  return c;
}

// Fixed quadratic with the minimizer outside K, so the estimator noise never
// vanishes along the trajectory.
inline RunConfig exterior_center_config(std::size_t d, int T, std::uint64_t seed = 7) {
  Vec c = zeros(d);
  c[0] = 2.0;
  return basic_config(d, T, std::move(c), seed);
}

}  // namespace bandit2p::testing
