#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bandit2p/sampling.hpp"
#include "bandit2p/stats.hpp"

using namespace bandit2p;

TEST_CASE("sphere sample is unit norm; d=1 is a fair sign") {
  RandomSource src(1, 0);
  int plus = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec u = sample_sphere(src, 1);
    CHECK((u[0] == 1.0 || u[0] == -1.0));
    if (u[0] > 0) ++plus;
  }
  CHECK(std::abs(plus - 5000) < 300);  // ~6 sigma

  for (int i = 0; i < 100; ++i) {
    const Vec u = sample_sphere(src, 3);
    CHECK(std::abs(norm(u) - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(sample_sphere(src, 0), ParameterError);
}

TEST_CASE("isotropy identity E<u,y>^2 = ||y||^2 / d") {
  // Monte-Carlo oracle for the identity used by the variance bound on Z_t.
  RandomSource src(2, 0);
  const std::size_t d = 8;
  const Vec y = {1.0, -2.0, 0.5, 0.0, 3.0, -1.0, 0.25, 2.0};
  const std::size_t n = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = dot(sample_sphere(src, d), y);
    sum += s * s;
    sum_sq += s * s * s * s;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  const double se = std::sqrt(var / static_cast<double>(n));
  const double expected = norm_sq(y) / static_cast<double>(d);
  CHECK(std::abs(mean - expected) <= 3.0 * se);
}

TEST_CASE("ball sample radial law and symmetry") {
  RandomSource src(3, 0);
  const std::size_t n = 1000000;

  // d=2: P(||v|| <= 0.5) = 0.25 exactly (area ratio oracle)
  std::size_t inside = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec v = sample_ball(src, 2);
    REQUIRE(norm(v) <= 1.0 + 1e-12);
    if (norm(v) <= 0.5) ++inside;
  }
  const double frac = static_cast<double>(inside) / static_cast<double>(n);
  const double se = binomial_stderr(0.25, n);
  CHECK(std::abs(frac - 0.25) <= 3.0 * se);

  // d=1: uniform on [-1,1], mean 0
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += sample_ball(src, 1)[0];
  const double mean = sum / static_cast<double>(n);
  CHECK(std::abs(mean) <= 3.0 / std::sqrt(3.0 * static_cast<double>(n)));  // var = 1/3
}

TEST_CASE("reproducibility across sources and distinct streams differ") {
  RandomSource a(42, 7), b(42, 7), c(42, 8);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 10000; ++i) {
    const Vec ua = sample_sphere(a, 4);
    const Vec ub = sample_sphere(b, 4);
    const Vec uc = sample_sphere(c, 4);
    if (ua != ub) all_equal = false;
    if (ua != uc) any_diff = true;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("empirical covariance approaches I/d") {
  RandomSource src(4, 0);
  const std::size_t d = 4, n = 1000000;
  std::vector<double> cov(d * d, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec u = sample_sphere(src, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) cov[i * d + j] += u[i] * u[j];
  }
  double frob = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double target = (i == j) ? 1.0 / static_cast<double>(d) : 0.0;
      const double e = cov[i * d + j] / static_cast<double>(n) - target;
      frob += e * e;
    }
  CHECK(std::sqrt(frob) <=
        5.0 * std::sqrt(static_cast<double>(d) / static_cast<double>(n)));
}

TEST_CASE("coordinate variance is 1/d") {
  for (std::size_t d : {4, 16, 64}) {
    RandomSource src(5, d);
    const std::size_t n = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double h = sample_sphere(src, d)[0];
      sum += h;
      sum_sq += h * h;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sum_sq / static_cast<double>(n) - mean * mean;
    CHECK(var <= 2.0 / static_cast<double>(d));
    CHECK(std::abs(var - 1.0 / static_cast<double>(d)) <= 0.05 / static_cast<double>(d));
  }
}
