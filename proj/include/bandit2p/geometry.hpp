#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "bandit2p/errors.hpp"
#include "bandit2p/vec.hpp"

namespace bandit2p {

// Boundary membership tolerance. The feasible sets are closed, so points on
// the boundary count as contained.
inline constexpr double kTolGeom = 1e-9;

// Feasible set K with r*B <= K <= D*B and closed-form Euclidean projection
// onto (1-xi)*K. Only origin-centered balls and boxes are supported; both
// admit exact projections.
class ConvexBody {
 public:
  enum class Kind { Ball, Box };

  static ConvexBody ball(std::size_t dim, double radius) {
    if (dim == 0) throw ParameterError("ConvexBody: dim must be >= 1");
    if (radius <= 0.0) throw ParameterError("ConvexBody: radius must be > 0");
    ConvexBody b;
    b.kind_ = Kind::Ball;
    b.dim_ = dim;
    b.radius_ = radius;
    b.inner_ = radius;
    b.outer_ = radius;
    return b;
  }

  static ConvexBody box(Vec half_widths) {
    if (half_widths.empty()) throw ParameterError("ConvexBody: dim must be >= 1");
    for (double a : half_widths)
      if (a <= 0.0) throw ParameterError("ConvexBody: half-widths must be > 0");
    ConvexBody b;
    b.kind_ = Kind::Box;
    b.dim_ = half_widths.size();
    b.inner_ = *std::min_element(half_widths.begin(), half_widths.end());
    b.outer_ = norm(half_widths);
    b.half_widths_ = std::move(half_widths);
    return b;
  }

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  double inner_radius() const { return inner_; }
  double outer_radius() const { return outer_; }
  double ball_radius() const { return radius_; }
  const Vec& half_widths() const { return half_widths_; }

  bool contains(const Vec& x) const {
    check_dim(x);
    if (kind_ == Kind::Ball) return norm(x) <= radius_ + kTolGeom;
    for (std::size_t i = 0; i < dim_; ++i)
      if (std::abs(x[i]) > half_widths_[i] + kTolGeom) return false;
    return true;
  }

  // True when the closed ball of radius `rho` around x lies inside K.
  bool contains_ball(const Vec& x, double rho) const {
    check_dim(x);
    if (rho < 0.0) throw ParameterError("contains_ball: rho must be >= 0");
    if (kind_ == Kind::Ball) return norm(x) + rho <= radius_ + kTolGeom;
    for (std::size_t i = 0; i < dim_; ++i)
      if (std::abs(x[i]) + rho > half_widths_[i] + kTolGeom) return false;
    return true;
  }

  // Euclidean projection onto (1-xi)*K.
  Vec project_shrunk(double xi, const Vec& x) const {
    if (xi < 0.0 || xi >= 1.0)
      throw ParameterError("project_shrunk: xi must be in [0, 1), got " + std::to_string(xi));
    check_dim(x);
    const double scale = 1.0 - xi;
    if (kind_ == Kind::Ball) {
      const double cap = scale * radius_;
      const double n = norm(x);
      if (n <= cap) return x;
      return scaled(x, cap / n);
    }
    Vec r = x;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double cap = scale * half_widths_[i];
      r[i] = std::clamp(r[i], -cap, cap);
    }
    return r;
  }

  Vec project(const Vec& x) const { return project_shrunk(0.0, x); }

 private:
  ConvexBody() = default;

  void check_dim(const Vec& x) const {
    if (x.size() != dim_)
      throw DimensionError("ConvexBody: expected dim " + std::to_string(dim_) +
                           ", got " + std::to_string(x.size()));
  }

  Kind kind_ = Kind::Ball;
  std::size_t dim_ = 0;
  double radius_ = 0.0;  // Ball only
  Vec half_widths_;      // Box only
  double inner_ = 0.0;
  double outer_ = 0.0;
};

}  // namespace bandit2p
