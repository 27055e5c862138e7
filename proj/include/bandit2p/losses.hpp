#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bandit2p/errors.hpp"
#include "bandit2p/geometry.hpp"
#include "bandit2p/sampling.hpp"
#include "bandit2p/vec.hpp"

namespace bandit2p {

// Strongly convex quadratic(+linear) loss:
//   f(x) = (m/2) ||x - c||^2 + <w, x>
// The family is closed under the ball smoothing used by the estimator
// (smoothing adds an x-independent constant), so the smoothed gradient is
// available in closed form. Constants are computed, not declared:
// mu = m and G = m (D + ||c||) + ||w|| bounds ||grad f|| over D*B.
class LossFunction {
 public:
  enum class Form { Quadratic, QuadPlusLinear };

  static LossFunction quadratic(Vec center, double curvature, double outer_radius) {
    return LossFunction(Form::Quadratic, std::move(center), curvature, {}, outer_radius);
  }

  static LossFunction quad_plus_linear(Vec center, double curvature, Vec slope,
                                       double outer_radius) {
    return LossFunction(Form::QuadPlusLinear, std::move(center), curvature, std::move(slope),
                        outer_radius);
  }

  Form form() const { return form_; }
  const Vec& center() const { return center_; }
  double curvature() const { return curvature_; }
  const Vec& slope() const { return slope_; }
  double mu() const { return curvature_; }
  double lipschitz_G() const { return lipschitz_; }
  std::size_t dim() const { return center_.size(); }

  double evaluate(const Vec& x) const {
    check_same_dim(x, center_);
    double v = 0.5 * curvature_ * dist_sq(x, center_);
    if (!slope_.empty()) v += dot(slope_, x);
    return v;
  }

  Vec gradient(const Vec& x) const {
    check_same_dim(x, center_);
    Vec g = scaled(sub(x, center_), curvature_);
    if (!slope_.empty()) g = add(g, slope_);
    return g;
  }

  // Gradient of the ball-smoothed loss E_v[f(x + alpha v)]. Smoothing a
  // quadratic adds only the constant m alpha^2 E||v||^2 / 2, so the smoothed
  // gradient coincides with the true gradient for any alpha.
  Vec smoothed_gradient(const Vec& x) const { return gradient(x); }

  // Closed-form ball-smoothed value: f(x) + m alpha^2 d / (2(d+2)),
  // using E||v||^2 = d/(d+2) for v uniform in the unit ball.
  double smoothed_value(const Vec& x, double alpha) const {
    const double d = static_cast<double>(dim());
    return evaluate(x) + 0.5 * curvature_ * alpha * alpha * d / (d + 2.0);
  }

  // Closed-form sphere average E_u[f(x + alpha u)] over u ~ S^{d-1},
  // i.e. the conditional mean of one query value: f(x) + m alpha^2 / 2.
  double sphere_query_mean(const Vec& x, double alpha) const {
    return evaluate(x) + 0.5 * curvature_ * alpha * alpha;
  }

 private:
  LossFunction(Form form, Vec center, double curvature, Vec slope, double outer_radius)
      : form_(form), center_(std::move(center)), curvature_(curvature), slope_(std::move(slope)) {
    if (curvature_ <= 0.0) throw ParameterError("LossFunction: curvature must be > 0");
    if (center_.empty()) throw ParameterError("LossFunction: empty center");
    if (!slope_.empty()) check_same_dim(slope_, center_);
    lipschitz_ = curvature_ * (outer_radius + norm(center_));
    if (!slope_.empty()) lipschitz_ += norm(slope_);
  }

  Form form_;
  Vec center_;
  double curvature_;
  Vec slope_;
  double lipschitz_ = 0.0;
};

// Process generating the loss sequence l_1..l_T. The emitted loss for round t
// may depend on the history x_1..x_{t-1} but never on round-t randomness;
// next_loss is a pure function of (kind, seed, t, history).
class AdversarySequence {
 public:
  enum class Kind { Fixed, ShiftingCenters, Adaptive };

  static AdversarySequence fixed(LossFunction loss, int horizon, const ConvexBody& body) {
    AdversarySequence a(Kind::Fixed, horizon, body, 0);
    a.fixed_loss_ = std::move(loss);
    a.declared_G_ = a.fixed_loss_->lipschitz_G();
    a.declared_mu_ = a.fixed_loss_->mu();
    return a;
  }

  // Centers perform a seeded random walk inside rho*B with per-round step
  // rho/sqrt(T), clamped by projection onto the rho-ball.
  static AdversarySequence shifting_centers(double rho, double curvature, int horizon,
                                            const ConvexBody& body, std::uint64_t seed) {
    if (rho <= 0.0 || rho > body.outer_radius())
      throw ParameterError("shifting_centers: need 0 < rho <= D");
    AdversarySequence a(Kind::ShiftingCenters, horizon, body, seed);
    a.rho_ = rho;
    a.curvature_ = curvature;
    a.declared_G_ = curvature * (body.outer_radius() + rho);
    a.declared_mu_ = curvature;
    a.centers_.push_back(zeros(body.dim()));  // c_1 = 0
    return a;
  }

  // Pushes the minimizer away along the player's recent motion:
  //   c_t = P_K(x_{t-1} + rho (x_{t-1} - x_{t-2}) / ||x_{t-1} - x_{t-2}||).
  // With no usable motion vector (t <= 2 or identical points) the push
  // direction falls back to a seeded random unit vector keyed by t.
  static AdversarySequence adaptive(double rho, double curvature, int horizon,
                                    const ConvexBody& body, std::uint64_t seed) {
    if (rho <= 0.0) throw ParameterError("adaptive: rho must be > 0");
    AdversarySequence a(Kind::Adaptive, horizon, body, seed);
    a.rho_ = rho;
    a.curvature_ = curvature;
    a.declared_G_ = curvature * 2.0 * body.outer_radius();  // centers stay in K <= D*B
    a.declared_mu_ = curvature;
    return a;
  }

  Kind kind() const { return kind_; }
  int horizon() const { return horizon_; }
  double declared_G() const { return declared_G_; }
  double declared_mu() const { return declared_mu_; }

  LossFunction next_loss(int t, const std::vector<Vec>& history) {
    if (t < 1 || t > horizon_)
      throw ParameterError("next_loss: round " + std::to_string(t) + " outside 1.." +
                           std::to_string(horizon_));
    switch (kind_) {
      case Kind::Fixed:
        return *fixed_loss_;
      case Kind::ShiftingCenters:
        return LossFunction::quadratic(center_at(t), curvature_, body_.outer_radius());
      case Kind::Adaptive:
        return LossFunction::quadratic(adaptive_center(t, history), curvature_,
                                       body_.outer_radius());
    }
    throw ParameterError("next_loss: unreachable");
  }

 private:
  AdversarySequence(Kind kind, int horizon, const ConvexBody& body, std::uint64_t seed)
      : kind_(kind), horizon_(horizon), body_(body), seed_(seed),
        walk_src_(seed, kShiftingStream) {
    if (horizon < 1) throw ParameterError("AdversarySequence: horizon must be >= 1");
  }

  static constexpr std::uint64_t kShiftingStream = 0x5ad1f7;

  // Lazily extended cached walk, so repeated queries at the same t agree.
  const Vec& center_at(int t) {
    const double step = rho_ / std::sqrt(static_cast<double>(horizon_));
    while (static_cast<int>(centers_.size()) < t) {
      Vec dir = sample_sphere(walk_src_, body_.dim());
      Vec c = axpy(centers_.back(), step, dir);
      const double n = norm(c);
      if (n > rho_) c = scaled(c, rho_ / n);
      centers_.push_back(std::move(c));
    }
    return centers_[static_cast<std::size_t>(t - 1)];
  }

  Vec adaptive_center(int t, const std::vector<Vec>& history) const {
    if (static_cast<int>(history.size()) != t - 1)
      throw ParameterError("next_loss: history length must be t-1");
    Vec base = history.empty() ? zeros(body_.dim()) : history.back();
    Vec dir;
    if (t > 2) {
      dir = sub(history[history.size() - 1], history[history.size() - 2]);
      const double n = norm(dir);
      if (n > kTolGeom) {
        dir = scaled(dir, 1.0 / n);
      } else {
        dir.clear();
      }
    }
    if (dir.empty()) {
      RandomSource fallback(seed_, kAdaptiveFallbackStream + static_cast<std::uint64_t>(t));
      dir = sample_sphere(fallback, body_.dim());
    }
    return body_.project(axpy(base, rho_, dir));
  }

  static constexpr std::uint64_t kAdaptiveFallbackStream = 0xada9d1ce'00000000ULL;

  Kind kind_;
  int horizon_;
  ConvexBody body_;
  std::uint64_t seed_;
  RandomSource walk_src_;
  std::optional<LossFunction> fixed_loss_;
  double rho_ = 0.0;
  double curvature_ = 1.0;
  double declared_G_ = 0.0;
  double declared_mu_ = 0.0;
  std::vector<Vec> centers_;
};

}  // namespace bandit2p
