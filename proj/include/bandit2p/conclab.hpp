#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bandit2p/engine.hpp"
#include "bandit2p/errors.hpp"
#include "bandit2p/stats.hpp"

// Monte-Carlo verification of the probabilistic building blocks behind the
// high-probability regret bound: the exponential supermartingale, the
// martingale-difference sum bound, the weighted squared-gradient sum, the
// end-to-end regret quantile, and sphere concentration. Absolute constants
// are fitted, never asserted; scaling exponents are the falsifiable content.
namespace bandit2p::conclab {

// ---------------------------------------------------------------------------
// Z_t machinery

// Z_t = <grad lhat_t(x_t) - g_t, x_t - x>, computed exactly from the trace
// (the smoothed gradient is closed form for the quadratic family).
inline std::vector<double> z_series(const Trace& trace, const Vec& x_cmp) {
  std::vector<double> z;
  z.reserve(trace.rounds.size());
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const RoundRecord& rec = trace.rounds[i];
    const Vec grad = trace.losses[i].smoothed_gradient(rec.x);
    const Vec y = sub(rec.x, x_cmp);
    z.push_back(dot(sub(grad, rec.g), y));
  }
  return z;
}

// Exact conditional variance of Z_t given the past. For the quadratic family
// g_t = d <a, u> u with a = grad l_t(x_t), so with y = x_t - x,
//   E<g,y>^2 = d (||a||^2 ||y||^2 + 2 <a,y>^2) / (d+2)
// by the fourth-moment identity for the uniform sphere, and
//   Var(Z_t | F_{t-1}) = E<g,y>^2 - <a,y>^2.
inline std::vector<double> z_cond_variance(const Trace& trace, const Vec& x_cmp) {
  const double d = static_cast<double>(trace.config.dim);
  std::vector<double> v;
  v.reserve(trace.rounds.size());
  for (std::size_t i = 0; i < trace.rounds.size(); ++i) {
    const RoundRecord& rec = trace.rounds[i];
    const Vec a = trace.losses[i].smoothed_gradient(rec.x);
    const Vec y = sub(rec.x, x_cmp);
    const double ay = dot(a, y);
    const double second = d * (norm_sq(a) * norm_sq(y) + 2.0 * ay * ay) / (d + 2.0);
    v.push_back(std::max(second - ay * ay, 0.0));
  }
  return v;
}

// Shrunk comparator (1-xi) x*, the point the difference-sum lemma quantifies
// over.
inline Vec shrunk_comparator(const Trace& trace) {
  return scaled(comparator(trace), 1.0 - trace.config.xi());
}

inline double z_bound_b(const Trace& trace) {
  const double d = static_cast<double>(trace.config.dim);
  return 2.0 * (d + 1.0) * trace.declared_G * trace.config.body.outer_radius();
}

// ---------------------------------------------------------------------------
// Freedman-style supermartingale check

enum class DifferenceModel {
  CenteredUniform,   // Z uniform on [-b, b], conditional variance b^2/3
  CenteredTwoPoint,  // Z = +-b with probability 1/2, conditional variance b^2
  TraceZ,            // the actual Z_t process from engine runs
};

struct SupermartingaleReport {
  DifferenceModel model{};
  double b = 0.0;
  double lambda = 0.0;
  double delta = 0.0;
  std::size_t n_paths = 0;
  int horizon = 0;
  double mean_mt = 0.0;
  double stderr_mt = 0.0;
  double exceed_rate = 0.0;  // fraction of paths where sum Z_t beats the bound
  bool pass = false;
  std::vector<double> raw_mt;
  std::vector<double> raw_zsum;
};

namespace detail {
inline double mt_value(double lambda, double b, double zsum, double vt) {
  return std::exp(lambda * zsum - lambda * lambda / (2.0 * (1.0 - lambda * b / 3.0)) * vt);
}

inline double zsum_bound(double lambda, double b, double vt, double delta) {
  if (lambda == 0.0) return std::numeric_limits<double>::infinity();
  return lambda / (2.0 * (1.0 - lambda * b / 3.0)) * vt + std::log(1.0 / delta) / lambda;
}
}  // namespace detail

// Simulates M_T(lambda) = exp(lambda sum Z - lambda^2/(2(1-lambda b/3)) V_T)
// over n_paths independent paths and reports its mean (<= 1 for a genuine
// supermartingale) and the frequency of the lambda-parameterized deviation
// bound being exceeded. For TraceZ the conditional variance is exact, via the
// closed-form smoothed gradient.
inline SupermartingaleReport check_supermartingale(double b, double lambda,
                                                   std::size_t n_paths, int horizon,
                                                   DifferenceModel model, double delta,
                                                   RandomSource& src,
                                                   const RunConfig* trace_config = nullptr) {
  if (b <= 0.0) throw ParameterError("check_supermartingale: b must be > 0");
  if (lambda < 0.0 || lambda >= 3.0 / b)
    throw ParameterError("check_supermartingale: lambda must lie in [0, 3/b)");
  if (delta <= 0.0 || delta >= 1.0)
    throw ParameterError("check_supermartingale: delta must be in (0, 1)");
  if (n_paths < 2) throw ParameterError("check_supermartingale: n_paths must be >= 2");
  if (model == DifferenceModel::TraceZ && trace_config == nullptr)
    throw ParameterError("check_supermartingale: TraceZ needs a run config");

  SupermartingaleReport rep;
  rep.model = model;
  rep.b = b;
  rep.lambda = lambda;
  rep.delta = delta;
  rep.n_paths = n_paths;
  rep.horizon = model == DifferenceModel::TraceZ ? trace_config->horizon : horizon;
  rep.raw_mt.reserve(n_paths);
  rep.raw_zsum.reserve(n_paths);

  std::size_t exceed = 0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    double zsum = 0.0, vt = 0.0;
    switch (model) {
      case DifferenceModel::CenteredUniform:
        for (int t = 0; t < horizon; ++t) zsum += b * (2.0 * src.uniform() - 1.0);
        vt = static_cast<double>(horizon) * b * b / 3.0;
        break;
      case DifferenceModel::CenteredTwoPoint:
        for (int t = 0; t < horizon; ++t) zsum += (src.uniform() < 0.5 ? -b : b);
        vt = static_cast<double>(horizon) * b * b;
        break;
      case DifferenceModel::TraceZ: {
        RunConfig cfg = *trace_config;
        cfg.stream_id = trace_config->stream_id + p;
        Trace trace = run(cfg);
        const Vec x_cmp = shrunk_comparator(trace);
        for (double z : z_series(trace, x_cmp)) zsum += z;
        for (double v : z_cond_variance(trace, x_cmp)) vt += v;
        break;
      }
    }
    rep.raw_zsum.push_back(zsum);
    rep.raw_mt.push_back(detail::mt_value(lambda, b, zsum, vt));
    if (zsum > detail::zsum_bound(lambda, b, vt, delta)) ++exceed;
  }

  rep.mean_mt = mean_of(rep.raw_mt);
  rep.stderr_mt = stderr_of(rep.raw_mt);
  rep.exceed_rate = static_cast<double>(exceed) / static_cast<double>(n_paths);
  const double se = binomial_stderr(rep.exceed_rate, n_paths);
  rep.pass = rep.mean_mt <= 1.0 + 3.0 * rep.stderr_mt && rep.exceed_rate <= delta + 3.0 * se;
  return rep;
}

// ---------------------------------------------------------------------------
// Difference-sum bound check

struct ZSumReport {
  std::size_t n_runs = 0;
  double delta = 0.0;
  double violation_rate = 0.0;
  double violation_stderr = 0.0;
  double empirical_quantile = 0.0;  // (1-delta)-quantile of sum Z_t
  double max_abs_z = 0.0;
  double b = 0.0;  // 2(d+1) G D, the deterministic per-round cap
  double zmean_within_4se_fraction = 0.0;
  bool pass = false;
  std::vector<double> raw_zsum;
  std::vector<double> raw_bound;
};

// Per trace: sum_t Z_t against
//   (mu/4) sum ||x_t - x||^2 + (4 d G^2 / mu) log(1/delta) + 2(d+1) G D log(1/delta)
// with x the shrunk comparator. The violation frequency must not exceed
// delta (up to binomial error), and |Z_t| <= 2(d+1)GD must hold everywhere.
inline ZSumReport check_z_sum(const std::vector<Trace>& traces, double delta) {
  if (traces.empty()) throw InsufficientDataError("check_z_sum: no traces");
  if (delta <= 0.0 || delta >= 1.0)
    throw ParameterError("check_z_sum: delta must be in (0, 1)");
  for (const Trace& t : traces)
    for (const LossFunction& l : t.losses)
      if (l.form() != LossFunction::Form::Quadratic &&
          l.form() != LossFunction::Form::QuadPlusLinear)
        throw UnsupportedLossError("check_z_sum: exact smoothed gradient unavailable");

  ZSumReport rep;
  rep.n_runs = traces.size();
  rep.delta = delta;
  const double log1d = std::log(1.0 / delta);

  // per-round Z averages across traces, for the martingale-difference check
  const std::size_t horizon = traces.front().rounds.size();
  std::vector<double> round_sum(horizon, 0.0), round_sumsq(horizon, 0.0);

  std::size_t violations = 0;
  for (const Trace& trace : traces) {
    const double d = static_cast<double>(trace.config.dim);
    const double G = trace.declared_G;
    const double D = trace.config.body.outer_radius();
    const double mu = trace.declared_mu;
    const Vec x_cmp = shrunk_comparator(trace);
    const std::vector<double> z = z_series(trace, x_cmp);

    double zsum = 0.0, dist_sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      zsum += z[i];
      dist_sum += dist_sq(trace.rounds[i].x, x_cmp);
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z[i]));
      if (i < horizon) {
        round_sum[i] += z[i];
        round_sumsq[i] += z[i] * z[i];
      }
    }
    const double bound = mu / 4.0 * dist_sum + 4.0 * d * G * G / mu * log1d +
                         2.0 * (d + 1.0) * G * D * log1d;
    rep.b = std::max(rep.b, 2.0 * (d + 1.0) * G * D);
    rep.raw_zsum.push_back(zsum);
    rep.raw_bound.push_back(bound);
    if (zsum > bound) ++violations;
  }

  std::size_t within = 0;
  const double n = static_cast<double>(traces.size());
  for (std::size_t i = 0; i < horizon; ++i) {
    const double m = round_sum[i] / n;
    const double var = std::max(round_sumsq[i] / n - m * m, 0.0);
    const double se = std::sqrt(var / n);
    if (se == 0.0 ? m == 0.0 : std::abs(m) <= 4.0 * se) ++within;
  }
  rep.zmean_within_4se_fraction = static_cast<double>(within) / static_cast<double>(horizon);

  rep.violation_rate = static_cast<double>(violations) / n;
  rep.violation_stderr = binomial_stderr(rep.violation_rate, traces.size());
  rep.empirical_quantile = nearest_rank_quantile(rep.raw_zsum, 1.0 - delta);
  rep.pass = rep.violation_rate <= delta + 3.0 * rep.violation_stderr &&
             rep.max_abs_z <= rep.b + 1e-9;
  return rep;
}

// ---------------------------------------------------------------------------
// Sweep studies: weighted g-sum and end-to-end regret quantiles

struct SweepPointResult {
  RunConfig config;
  double declared_G = 0.0;
  double quantile = 0.0;
  double envelope_constant = 0.0;  // quantile / theoretical bound at unit constant
  std::vector<double> values;
};

struct StudyReport {
  double delta = 0.0;
  int n_runs = 0;
  std::vector<SweepPointResult> points;
  std::optional<LinearFit> fit_quantile_vs_logT;   // quantile ~ log T, fixed d
  std::optional<LinearFit> fit_logq_vs_logd;       // log quantile ~ log d, fixed T
  double max_envelope_constant = 0.0;
  bool pass = false;
};

namespace detail {

template <typename PerRunValue>
inline StudyReport sweep_study(const std::vector<RunConfig>& sweep, int n_runs, double delta,
                               PerRunValue per_run_value, double r2_threshold,
                               double d_slope_lo, double d_slope_hi, bool bound_is_gsum) {
  if (sweep.empty()) throw ParameterError("sweep_study: empty sweep");
  if (n_runs < 2) throw InsufficientDataError("sweep_study: n_runs must be >= 2");
  if (delta <= 0.0 || delta >= 1.0) throw ParameterError("sweep_study: delta in (0, 1)");

  StudyReport rep;
  rep.delta = delta;
  rep.n_runs = n_runs;

  for (const RunConfig& base : sweep) {
    base.validate();
    SweepPointResult pt;
    pt.config = base;
    pt.values.reserve(static_cast<std::size_t>(n_runs));
    for (int i = 0; i < n_runs; ++i) {
      RunConfig cfg = base;
      cfg.stream_id = base.stream_id + static_cast<std::uint64_t>(i);
      Trace trace = run(cfg);
      pt.declared_G = trace.declared_G;
      pt.values.push_back(per_run_value(trace));
    }
    pt.quantile = nearest_rank_quantile(pt.values, 1.0 - delta);

    const double d = static_cast<double>(base.dim);
    const double T = static_cast<double>(base.horizon);
    const double G = pt.declared_G;
    const double D = base.body.outer_radius();
    const double r = base.body.inner_radius();
    const double mu = base.mu();
    const double log1d = std::log(1.0 / delta);
    double bound = d * G * G / mu * (std::log(T) + log1d);
    if (!bound_is_gsum)
      bound += 2.0 * (d + 1.0) * G * D * log1d + G * std::log(T) * (3.0 + D / r);
    pt.envelope_constant = bound > 0.0 ? pt.quantile / bound : 0.0;
    rep.max_envelope_constant = std::max(rep.max_envelope_constant, pt.envelope_constant);
    rep.points.push_back(std::move(pt));
  }

  // T-fit: within the dim that has the most distinct horizons
  std::map<std::size_t, std::map<int, double>> by_dim;
  std::map<int, std::map<std::size_t, double>> by_T;
  for (const SweepPointResult& pt : rep.points) {
    by_dim[pt.config.dim][pt.config.horizon] = pt.quantile;
    by_T[pt.config.horizon][pt.config.dim] = pt.quantile;
  }
  for (const auto& [d, qs] : by_dim) {
    if (qs.size() >= 3) {
      std::vector<double> xs, ys;
      for (const auto& [T, q] : qs) {
        xs.push_back(std::log(static_cast<double>(T)));
        ys.push_back(q);
      }
      rep.fit_quantile_vs_logT = ols_fit(xs, ys);
      break;
    }
  }
  for (const auto& [T, qs] : by_T) {
    if (qs.size() >= 3) {
      std::vector<double> xs, ys;
      for (const auto& [d, q] : qs) {
        xs.push_back(std::log(static_cast<double>(d)));
        ys.push_back(std::log(std::max(q, 1e-300)));
      }
      rep.fit_logq_vs_logd = ols_fit(xs, ys);
      break;
    }
  }
  if (sweep.size() >= 2 && !rep.fit_quantile_vs_logT && !rep.fit_logq_vs_logd)
    throw InsufficientDataError("sweep_study: need >= 3 sweep points along d or T for a fit");

  rep.pass = true;
  if (rep.fit_quantile_vs_logT && rep.fit_quantile_vs_logT->r2 < r2_threshold) rep.pass = false;
  if (rep.fit_logq_vs_logd) {
    const double s = rep.fit_logq_vs_logd->slope;
    if (s < d_slope_lo || s > d_slope_hi) rep.pass = false;
  }
  return rep;
}

}  // namespace detail

// (1-delta)-quantile of S = sum_t ||g_t||^2 / (mu t) across runs: checks the
// log T growth (R^2 of the quantile against log T) and the linear-in-d
// scaling (log-log slope 1.0 +- 0.2, rejecting the naive d^2 bound).
inline StudyReport check_gsum(const std::vector<RunConfig>& sweep, int n_runs, double delta) {
  return detail::sweep_study(
      sweep, n_runs, delta,
      [](const Trace& trace) {
        double s = 0.0;
        const double mu = trace.config.mu();
        for (const RoundRecord& rec : trace.rounds)
          s += rec.g_norm_sq / (mu * static_cast<double>(rec.t));
        return s;
      },
      0.95, 0.8, 1.2, /*bound_is_gsum=*/true);
}

// (1-delta)-quantile of the realized regret across runs, with its growth fits
// in log T (R^2 >= 0.9) and d (log-log slope <= 1.3), plus the fitted envelope
// constant against the three-term high-probability bound.
inline StudyReport check_regret_highprob(const std::vector<RunConfig>& sweep, int n_runs,
                                         double delta) {
  if (static_cast<double>(n_runs) * delta < 20.0)
    throw InsufficientDataError(
        "check_regret_highprob: n_runs too small to resolve the (1-delta)-quantile");
  return detail::sweep_study(
      sweep, n_runs, delta,
      [](const Trace& trace) { return regret(trace, comparator(trace)).regret; },
      0.9, -std::numeric_limits<double>::infinity(), 1.3, /*bound_is_gsum=*/false);
}

// ---------------------------------------------------------------------------
// Sphere concentration

struct SphereConcentrationReport {
  double lipschitz_L = 0.0;
  std::size_t n_samples = 0;
  struct PerDim {
    std::size_t d = 0;
    double variance = 0.0;
    double expected_variance = 0.0;  // exactly L^2/d
    std::vector<double> taus;
    std::vector<double> tail_freqs;
  };
  std::vector<PerDim> per_dim;
  double c1_hat = 0.0;  // fitted exponential rate in d tau^2 / L^2
  bool pass = false;
};

// For the 1-Lipschitz-per-L coordinate function h(u) = L u_1, estimates tail
// frequencies over a tau grid and fits log Pr(|h| >= tau) against
// -d tau^2 / L^2. Tails must decay at least exponentially in d tau^2 and the
// variance must match L^2/d.
inline SphereConcentrationReport check_sphere_concentration(
    const std::vector<std::size_t>& d_sweep, double L, std::size_t n_samples,
    RandomSource& src) {
  if (d_sweep.empty()) throw ParameterError("check_sphere_concentration: empty sweep");
  if (L <= 0.0) throw ParameterError("check_sphere_concentration: L must be > 0");
  if (n_samples < 100000)
    throw ParameterError("check_sphere_concentration: n_samples must be >= 1e5");

  SphereConcentrationReport rep;
  rep.lipschitz_L = L;
  rep.n_samples = n_samples;

  std::vector<double> fit_x, fit_y;
  bool variance_ok = true;
  for (std::size_t d : d_sweep) {
    SphereConcentrationReport::PerDim pd;
    pd.d = d;
    pd.expected_variance = L * L / static_cast<double>(d);
    const double scale = L / std::sqrt(static_cast<double>(d));
    for (double m : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) pd.taus.push_back(m * scale);

    std::vector<std::size_t> tail_counts(pd.taus.size(), 0);
    double sum = 0.0, sum_sq = 0.0;
    std::vector<double> samples;
    samples.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
      const double h = L * sample_sphere(src, d)[0];
      samples.push_back(h);
      sum += h;
      sum_sq += h * h;
    }
    const double n = static_cast<double>(n_samples);
    const double mean = sum / n;
    pd.variance = sum_sq / n - mean * mean;
    for (double h : samples) {
      const double dev = std::abs(h - mean);
      for (std::size_t j = 0; j < pd.taus.size(); ++j)
        if (dev >= pd.taus[j]) ++tail_counts[j];
    }
    for (std::size_t j = 0; j < pd.taus.size(); ++j) {
      const double freq = static_cast<double>(tail_counts[j]) / n;
      pd.tail_freqs.push_back(freq);
      // keep well-resolved frequencies only for the rate fit
      if (tail_counts[j] >= 20) {
        fit_x.push_back(static_cast<double>(d) * pd.taus[j] * pd.taus[j] / (L * L));
        fit_y.push_back(std::log(freq));
      }
    }
    if (std::abs(pd.variance - pd.expected_variance) > 0.05 * pd.expected_variance)
      variance_ok = false;
    rep.per_dim.push_back(std::move(pd));
  }

  if (fit_x.size() < 3)
    throw InsufficientDataError("check_sphere_concentration: too few resolved tail points");
  rep.c1_hat = -ols_fit(fit_x, fit_y).slope;
  rep.pass = variance_ok && rep.c1_hat >= 0.3;
  return rep;
}

}  // namespace bandit2p::conclab
