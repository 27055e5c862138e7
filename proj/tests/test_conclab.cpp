#include <catch2/catch_amalgamated.hpp>

#include "bandit2p/conclab.hpp"
#include "helpers.hpp"

using namespace bandit2p;
using namespace bandit2p::conclab;

namespace {

// Hand-built trace: constant trajectory, zero gradient estimates.
Trace constant_trace(int T) {
  RunConfig c = bandit2p::testing::basic_config(2, T, {0.0, 0.0});
  Trace trace;
  trace.config = c;
  trace.declared_G = 3.0;
  trace.declared_mu = 1.0;
  const auto loss = LossFunction::quadratic({0.0, 0.0}, 1.0, 1.0);
  for (int t = 1; t <= T; ++t) {
    RoundRecord rec;
    rec.t = t;
    rec.x = {0.0, 0.0};
    rec.u = {1.0, 0.0};
    rec.value_plus = rec.value_minus = 0.0;
    rec.g = {0.0, 0.0};
    rec.g_norm_sq = 0.0;
    rec.eta_t = 2.0 / static_cast<double>(t);
    trace.rounds.push_back(rec);
    trace.losses.push_back(loss);
  }
  return trace;
}

}  // namespace

TEST_CASE("z series vanishes at the minimizer with zero gradient estimates") {
  const Trace trace = constant_trace(5);
  const auto z = z_series(trace, {0.0, 0.0});
  REQUIRE(z.size() == 5);
  for (double v : z) CHECK(v == 0.0);
  const auto var = z_cond_variance(trace, {0.0, 0.0});
  for (double v : var) CHECK(v == 0.0);
}

TEST_CASE("conditional variance formula matches Monte Carlo") {
  // a = grad lhat(x), y = x - x_cmp fixed; Z = <a - d<a,u>u, y>.
  RandomSource src(41, 0);
  const std::size_t d = 3;
  const Vec a = {1.0, -0.5, 0.25};
  const Vec y = {0.4, 0.3, -0.6};
  const double ay = dot(a, y);
  const double dd = static_cast<double>(d);
  const double expected =
      dd * (norm_sq(a) * norm_sq(y) + 2.0 * ay * ay) / (dd + 2.0) - ay * ay;

  const std::size_t n = 2000000;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec u = sample_sphere(src, d);
    const double z = ay - dd * dot(a, u) * dot(u, y);
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(var / static_cast<double>(n)));
  CHECK(std::abs(var - expected) <= 0.02 * expected);
}

TEST_CASE("supermartingale: degenerate cases give M = 1") {
  RandomSource src(42, 0);
  // lambda = 0: M is identically 1 whatever the increments
  const auto r0 = check_supermartingale(1.0, 0.0, 100, 50,
                                        DifferenceModel::CenteredUniform, 0.05, src);
  CHECK(r0.mean_mt == Catch::Approx(1.0));
  CHECK(r0.stderr_mt == Catch::Approx(0.0).margin(1e-15));
  CHECK(r0.exceed_rate == 0.0);
  CHECK(r0.pass);
}

TEST_CASE("supermartingale mean stays <= 1 for the two-point model") {
  RandomSource src(43, 0);
  const double b = 1.0;
  for (double lambda : {0.3, 1.0, 2.0}) {
    const auto rep = check_supermartingale(b, lambda, 20000, 100,
                                           DifferenceModel::CenteredTwoPoint, 0.05, src);
    CHECK(rep.mean_mt <= 1.0 + 3.0 * rep.stderr_mt);
    CHECK(rep.pass);
  }
}

TEST_CASE("supermartingale parameter guards") {
  RandomSource src(44, 0);
  CHECK_THROWS_AS(check_supermartingale(1.0, 3.0, 100, 10,
                                        DifferenceModel::CenteredUniform, 0.05, src),
                  ParameterError);
  CHECK_THROWS_AS(check_supermartingale(1.0, -0.1, 100, 10,
                                        DifferenceModel::CenteredUniform, 0.05, src),
                  ParameterError);
  CHECK_THROWS_AS(check_supermartingale(0.0, 0.5, 100, 10,
                                        DifferenceModel::CenteredUniform, 0.05, src),
                  ParameterError);
  CHECK_THROWS_AS(check_supermartingale(1.0, 0.5, 100, 10, DifferenceModel::TraceZ,
                                        0.05, src, nullptr),
                  ParameterError);
}

TEST_CASE("supermartingale on engine traces") {
  RandomSource src(45, 0);
  RunConfig cfg = bandit2p::testing::exterior_center_config(2, 100, 9);
  const Trace probe = run(cfg);
  const double b = z_bound_b(probe);
  const auto rep = check_supermartingale(b, 0.5 * 3.0 / b, 300, cfg.horizon,
                                         DifferenceModel::TraceZ, 0.05, src, &cfg);
  CHECK(rep.pass);
  CHECK(rep.horizon == 100);
  // every path's increments respect the cap b
  const Vec x_cmp = shrunk_comparator(probe);
  for (double z : z_series(probe, x_cmp)) CHECK(std::abs(z) <= b + 1e-9);
}

TEST_CASE("z-sum bound holds across a batch of traces") {
  std::vector<Trace> traces;
  for (int i = 0; i < 100; ++i) {
    RunConfig cfg = bandit2p::testing::exterior_center_config(2, 200, 13);
    cfg.stream_id = static_cast<std::uint64_t>(i);
    traces.push_back(run(cfg));
  }
  const auto rep = check_z_sum(traces, 0.1);
  CHECK(rep.pass);
  CHECK(rep.n_runs == 100);
  CHECK(rep.max_abs_z <= rep.b + 1e-9);
  CHECK(rep.violation_rate <= 0.1 + 3.0 * rep.violation_stderr);
  CHECK(rep.zmean_within_4se_fraction >= 0.95);

  CHECK_THROWS_AS(check_z_sum({}, 0.1), InsufficientDataError);
  CHECK_THROWS_AS(check_z_sum(traces, 1.5), ParameterError);
}

TEST_CASE("first-round weighted g-sum term respects the norm cap") {
  // ||g_1||^2 / (mu * 1) <= d^2 G^2 / mu deterministically
  for (int i = 0; i < 50; ++i) {
    RunConfig cfg = bandit2p::testing::exterior_center_config(3, 2, 17);
    cfg.stream_id = static_cast<std::uint64_t>(i);
    const Trace trace = run(cfg);
    const double d = 3.0, G = trace.declared_G, mu = trace.declared_mu;
    CHECK(trace.rounds[0].g_norm_sq / mu <= d * d * G * G / mu + 1e-9);
  }
}

TEST_CASE("gsum study on a small sweep") {
  std::vector<RunConfig> sweep;
  for (int T : {200, 600, 1800}) {
    sweep.push_back(bandit2p::testing::exterior_center_config(2, T, 19));
  }
  const auto rep = check_gsum(sweep, 40, 0.1);
  REQUIRE(rep.fit_quantile_vs_logT.has_value());
  CHECK(rep.points.size() == 3);
  CHECK(rep.fit_quantile_vs_logT->slope > 0.0);
  CHECK(rep.max_envelope_constant > 0.0);

  CHECK_THROWS_AS(check_gsum(sweep, 1, 0.1), InsufficientDataError);
  CHECK_THROWS_AS(check_gsum({}, 10, 0.1), ParameterError);
  // two points along T cannot support a fit
  std::vector<RunConfig> two = {sweep[0], sweep[1]};
  CHECK_THROWS_AS(check_gsum(two, 10, 0.1), InsufficientDataError);
}

TEST_CASE("regret study precondition") {
  std::vector<RunConfig> sweep = {bandit2p::testing::exterior_center_config(2, 100, 23)};
  CHECK_THROWS_AS(check_regret_highprob(sweep, 10, 0.05), InsufficientDataError);
  // n_runs * delta >= 20 is accepted
  std::vector<RunConfig> sweep3;
  for (int T : {100, 300, 900})
    sweep3.push_back(bandit2p::testing::exterior_center_config(2, T, 23));
  const auto rep = check_regret_highprob(sweep3, 100, 0.2);
  CHECK(rep.points.size() == 3);
  REQUIRE(rep.fit_quantile_vs_logT.has_value());
  CHECK(rep.fit_quantile_vs_logT->slope > 0.0);
}

TEST_CASE("sphere concentration check") {
  RandomSource src(46, 0);
  const auto rep = check_sphere_concentration({4, 16, 64}, 2.0, 200000, src);
  CHECK(rep.pass);
  CHECK(rep.c1_hat >= 0.3);
  for (const auto& pd : rep.per_dim) {
    CHECK(std::abs(pd.variance - pd.expected_variance) <= 0.05 * pd.expected_variance);
    // tail frequencies decrease along the tau grid
    for (std::size_t j = 1; j < pd.tail_freqs.size(); ++j)
      CHECK(pd.tail_freqs[j] <= pd.tail_freqs[j - 1]);
  }
  CHECK_THROWS_AS(check_sphere_concentration({}, 1.0, 200000, src), ParameterError);
  CHECK_THROWS_AS(check_sphere_concentration({4}, 1.0, 1000, src), ParameterError);
}
