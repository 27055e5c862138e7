#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "bandit2p/errors.hpp"

namespace bandit2p {

using Vec = std::vector<double>;

inline void check_same_dim(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw DimensionError("vector dimensions differ: " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
}

inline double dot(const Vec& a, const Vec& b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

inline Vec zeros(std::size_t d) { return Vec(d, 0.0); }

inline Vec scaled(const Vec& a, double c) {
  Vec r = a;
  for (double& v : r) v *= c;
  return r;
}

// r = a + c * b
inline Vec axpy(const Vec& a, double c, const Vec& b) {
  check_same_dim(a, b);
  Vec r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += c * b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) { return axpy(a, -1.0, b); }

inline Vec add(const Vec& a, const Vec& b) { return axpy(a, 1.0, b); }

inline double dist_sq(const Vec& a, const Vec& b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

inline double dist(const Vec& a, const Vec& b) { return std::sqrt(dist_sq(a, b)); }

}  // namespace bandit2p
