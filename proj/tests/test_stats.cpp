#include <catch2/catch_amalgamated.hpp>

#include "bandit2p/stats.hpp"

using namespace bandit2p;

TEST_CASE("nearest-rank quantile") {
  const std::vector<double> xs = {5.0, 1.0, 3.0, 2.0, 4.0};
  CHECK(nearest_rank_quantile(xs, 0.5) == 3.0);
  CHECK(nearest_rank_quantile(xs, 0.95) == 5.0);
  CHECK(nearest_rank_quantile(xs, 0.0) == 1.0);
  CHECK(nearest_rank_quantile(xs, 1.0) == 5.0);
  CHECK_THROWS_AS(nearest_rank_quantile({}, 0.5), InsufficientDataError);
  CHECK_THROWS_AS(nearest_rank_quantile(xs, 1.5), ParameterError);
}

TEST_CASE("quantile monotone in delta") {
  std::vector<double> xs;
  for (int i = 0; i < 137; ++i) xs.push_back(static_cast<double>(i * i % 91));
  double prev = -1.0;
  for (double delta : {0.5, 0.25, 0.1, 0.05, 0.01}) {
    const double q = nearest_rank_quantile(xs, 1.0 - delta);
    CHECK(q >= prev);  // smaller delta never yields a smaller quantile
    prev = q;
  }
}

TEST_CASE("ols recovers an exact line") {
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(2.5 * x - 1.0);
  const LinearFit f = ols_fit(xs, ys);
  CHECK(f.slope == Catch::Approx(2.5));
  CHECK(f.intercept == Catch::Approx(-1.0));
  CHECK(f.r2 == Catch::Approx(1.0));
  CHECK(f.slope_stderr == Catch::Approx(0.0).margin(1e-12));
  CHECK_THROWS_AS(ols_fit({1.0}, {1.0}), InsufficientDataError);
  CHECK_THROWS_AS(ols_fit({1.0, 1.0}, {1.0, 2.0}), ParameterError);
}

TEST_CASE("moment helpers") {
  const std::vector<double> xs = {1.0, 2.0, 3.0};
  CHECK(mean_of(xs) == Catch::Approx(2.0));
  CHECK(sample_variance(xs) == Catch::Approx(1.0));
  CHECK(stderr_of(xs) == Catch::Approx(1.0 / std::sqrt(3.0)));
  CHECK(binomial_stderr(0.5, 100) == Catch::Approx(0.05));
}
