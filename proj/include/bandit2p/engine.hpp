#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bandit2p/errors.hpp"
#include "bandit2p/estimator.hpp"
#include "bandit2p/geometry.hpp"
#include "bandit2p/losses.hpp"
#include "bandit2p/sampling.hpp"
#include "bandit2p/vec.hpp"

namespace bandit2p {

enum class StepSchedule {
  TwoOverMuT,  // eta_t = 2 / (mu t)
  OneOverMuT,  // eta_t = 1 / (mu t), ablation
};

inline std::string to_string(StepSchedule s) {
  return s == StepSchedule::TwoOverMuT ? "two_over_mu_t" : "one_over_mu_t";
}

// Data-only adversary description, so a run can be reproduced from its config.
struct AdversarySpec {
  AdversarySequence::Kind kind = AdversarySequence::Kind::Fixed;
  Vec center;        // Fixed
  Vec slope;         // Fixed, optional
  double curvature = 1.0;
  double rho = 0.5;  // ShiftingCenters / Adaptive

  std::string kind_name() const {
    switch (kind) {
      case AdversarySequence::Kind::Fixed: return "fixed";
      case AdversarySequence::Kind::ShiftingCenters: return "shifting";
      case AdversarySequence::Kind::Adaptive: return "adaptive";
    }
    return "?";
  }
};

struct RunConfig {
  std::size_t dim = 2;
  int horizon = 100;
  ConvexBody body = ConvexBody::ball(2, 1.0);
  AdversarySpec adversary;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::optional<double> alpha_override;
  std::optional<double> xi_override;
  std::optional<double> mu_override;  // mis-specification experiments only
  StepSchedule schedule = StepSchedule::TwoOverMuT;

  double alpha() const {
    if (alpha_override) return *alpha_override;
    const double T = static_cast<double>(horizon);
    return std::log(T) / T;
  }

  double xi() const {
    if (xi_override) return *xi_override;
    return alpha() / body.inner_radius();
  }

  double mu() const {
    if (mu_override) return *mu_override;
    return adversary.curvature;
  }

  double eta(int t) const {
    const double base = 1.0 / (mu() * static_cast<double>(t));
    return schedule == StepSchedule::TwoOverMuT ? 2.0 * base : base;
  }

  void validate() const {
    if (horizon < 2) throw ParameterError("RunConfig: horizon must be >= 2");
    if (dim == 0) throw ParameterError("RunConfig: dim must be >= 1");
    if (body.dim() != dim) throw DimensionError("RunConfig: body dim mismatch");
    const double a = alpha();
    const double x = xi();
    if (a <= 0.0) throw ParameterError("RunConfig: alpha must be > 0");
    if (x >= 1.0)
      throw ParameterError("RunConfig: xi >= 1 (alpha too large for inner radius r)");
    // Query feasibility: x_t in (1-xi)K plus an alpha step stays in K.
    if (a > x * body.inner_radius() + kTolGeom)
      throw ParameterError("RunConfig: need alpha <= xi * r so query points stay in K");
    if (mu() <= 0.0) throw ParameterError("RunConfig: mu must be > 0");
    if (adversary.kind == AdversarySequence::Kind::Fixed &&
        adversary.center.size() != dim)
      throw DimensionError("RunConfig: adversary center dim mismatch");
  }
};

struct RoundRecord {
  int t = 0;
  Vec x;
  Vec u;
  double value_plus = 0.0;
  double value_minus = 0.0;
  Vec g;
  double g_norm_sq = 0.0;
  double eta_t = 0.0;
};

struct Trace {
  RunConfig config;
  std::vector<RoundRecord> rounds;
  std::vector<LossFunction> losses;  // realized sequence, one per round
  double declared_G = 0.0;
  double declared_mu = 0.0;
};

inline AdversarySequence make_adversary(const RunConfig& c) {
  switch (c.adversary.kind) {
    case AdversarySequence::Kind::Fixed: {
      LossFunction loss =
          c.adversary.slope.empty()
              ? LossFunction::quadratic(c.adversary.center, c.adversary.curvature,
                                        c.body.outer_radius())
              : LossFunction::quad_plus_linear(c.adversary.center, c.adversary.curvature,
                                               c.adversary.slope, c.body.outer_radius());
      return AdversarySequence::fixed(std::move(loss), c.horizon, c.body);
    }
    case AdversarySequence::Kind::ShiftingCenters:
      return AdversarySequence::shifting_centers(c.adversary.rho, c.adversary.curvature,
                                                 c.horizon, c.body,
                                                 c.seed ^ (c.stream_id << 1 | 1));
    case AdversarySequence::Kind::Adaptive:
      return AdversarySequence::adaptive(c.adversary.rho, c.adversary.curvature, c.horizon,
                                         c.body, c.seed ^ (c.stream_id << 1 | 1));
  }
  throw ParameterError("make_adversary: unreachable");
}

// Algorithm: x_1 = 0; per round sample u_t on the sphere, query the loss at
// x_t +- alpha u_t, form the two-point gradient, and project the step onto
// the shrunk set (1-xi)K. Deterministic given (seed, stream_id).
inline Trace run(const RunConfig& config) {
  config.validate();
  AdversarySequence adv = make_adversary(config);
  if (adv.horizon() != config.horizon)
    throw ParameterError("run: adversary horizon mismatch");

  RandomSource src(config.seed, config.stream_id << 1);
  const double alpha = config.alpha();
  const double xi = config.xi();

  Trace trace;
  trace.config = config;
  trace.declared_G = adv.declared_G();
  trace.declared_mu = adv.declared_mu();
  trace.rounds.reserve(static_cast<std::size_t>(config.horizon));
  trace.losses.reserve(static_cast<std::size_t>(config.horizon));

  std::vector<Vec> history;
  history.reserve(static_cast<std::size_t>(config.horizon));
  Vec x = zeros(config.dim);

  for (int t = 1; t <= config.horizon; ++t) {
    LossFunction loss = adv.next_loss(t, history);
    Vec u = sample_sphere(src, config.dim);
    TwoPointQuery q = two_point_gradient(loss, config.body, x, u, alpha);

    RoundRecord rec;
    rec.t = t;
    rec.x = x;
    rec.u = std::move(u);
    rec.value_plus = q.value_plus;
    rec.value_minus = q.value_minus;
    rec.g = q.g;
    rec.g_norm_sq = norm_sq(q.g);
    rec.eta_t = config.eta(t);

    history.push_back(x);
    x = config.body.project_shrunk(xi, axpy(x, -rec.eta_t, rec.g));

    trace.rounds.push_back(std::move(rec));
    trace.losses.push_back(std::move(loss));
  }
  return trace;
}

// Best fixed point in hindsight: closed-form unconstrained minimizer of the
// cumulative quadratic, projected onto K when infeasible. Projection is
// optimal for isotropic quadratics on balls and separable quadratics on
// boxes; a first-order optimality probe turns that argument into a runtime
// check and raises SolverError instead of silently returning a non-optimum.
inline Vec comparator(const Trace& trace) {
  if (trace.losses.empty()) throw ParameterError("comparator: empty trace");
  const std::size_t d = trace.config.dim;
  double m_sum = 0.0;
  Vec b = zeros(d);
  for (const LossFunction& loss : trace.losses) {
    m_sum += loss.curvature();
    b = axpy(b, loss.curvature(), loss.center());
    if (!loss.slope().empty()) b = axpy(b, -1.0, loss.slope());
  }
  Vec x_star = scaled(b, 1.0 / m_sum);
  if (trace.config.body.contains(x_star)) return x_star;

  x_star = trace.config.body.project(x_star);

  // grad of F = sum_t l_t at the projected point
  Vec grad = zeros(d);
  for (const LossFunction& loss : trace.losses) grad = add(grad, loss.gradient(x_star));

  RandomSource probe(trace.config.seed ^ 0xc09a7a70ULL, trace.config.stream_id);
  const double tol_opt =
      1e-7 * (1.0 + norm(grad) * 2.0 * trace.config.body.outer_radius());
  for (int i = 0; i < 100; ++i) {
    Vec y = sample_ball(probe, d);
    y = scaled(y, trace.config.body.outer_radius());
    y = trace.config.body.project(y);
    if (dot(grad, sub(y, x_star)) < -tol_opt)
      throw SolverError("comparator: projected minimizer failed first-order optimality");
  }
  return x_star;
}

struct RegretBreakdown {
  double player_cost = 0.0;
  double comparator_cost = 0.0;
  double regret = 0.0;
  double gsum_weighted = 0.0;  // sum_t ||g_t||^2 / (mu t)
  double gmax = 0.0;           // max_t ||g_t||
};

inline RegretBreakdown regret(const Trace& trace, const Vec& x_star) {
  if (x_star.size() != trace.config.dim) throw DimensionError("regret: comparator dim");
  RegretBreakdown r;
  const double mu = trace.config.mu();
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const RoundRecord& rec = trace.rounds[i];
    r.player_cost += 0.5 * (rec.value_plus + rec.value_minus);
    r.comparator_cost += trace.losses[i].evaluate(x_star);
    r.gsum_weighted += rec.g_norm_sq / (mu * static_cast<double>(rec.t));
    r.gmax = std::max(r.gmax, std::sqrt(rec.g_norm_sq));
  }
  r.regret = r.player_cost - r.comparator_cost;
  return r;
}

}  // namespace bandit2p
