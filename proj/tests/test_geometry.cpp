#include <catch2/catch_amalgamated.hpp>

#include "bandit2p/geometry.hpp"
#include "bandit2p/sampling.hpp"
#include "helpers.hpp"

using namespace bandit2p;

TEST_CASE("membership basics") {
  const auto ball = ConvexBody::ball(2, 1.0);
  CHECK(ball.contains({0.0, 0.0}));
  CHECK_FALSE(ball.contains({1.5, 0.0}));
  CHECK(ball.contains({1.0, 0.0}));  // boundary counts as contained

  const auto box = ConvexBody::box({1.0, 2.0});
  CHECK(box.contains({0.5, -1.9}));
  CHECK_FALSE(box.contains({0.5, -2.1}));

  CHECK_THROWS_AS(ball.contains({1.0, 0.0, 0.0}), DimensionError);
}

TEST_CASE("radii") {
  const auto ball = ConvexBody::ball(3, 2.5);
  CHECK(ball.inner_radius() == 2.5);
  CHECK(ball.outer_radius() == 2.5);

  const auto box = ConvexBody::box({1.0, 2.0});
  CHECK(box.inner_radius() == 1.0);
  CHECK(box.outer_radius() == Catch::Approx(std::sqrt(5.0)));
}

TEST_CASE("shrunk projection examples") {
  const auto ball = ConvexBody::ball(2, 1.0);
  CHECK(ball.project_shrunk(0.0, {2.0, 0.0}) == Vec{1.0, 0.0});
  CHECK(ball.project_shrunk(0.5, {2.0, 0.0}) == Vec{0.5, 0.0});

  const auto box = ConvexBody::box({1.0, 1.0});
  const Vec p = box.project_shrunk(0.1, {2.0, -0.3});
  CHECK(p[0] == Catch::Approx(0.9));
  CHECK(p[1] == Catch::Approx(-0.3));

  CHECK_THROWS_AS(ball.project_shrunk(1.0, {0.0, 0.0}), ParameterError);
  CHECK_THROWS_AS(ball.project_shrunk(-0.1, {0.0, 0.0}), ParameterError);
  CHECK_THROWS_AS(ball.project_shrunk(0.0, {0.0, 0.0, 0.0}), DimensionError);
}

TEST_CASE("projection properties over random pairs") {
  RandomSource src(11, 0);
  const auto ball = ConvexBody::ball(4, 1.5);
  const auto box = ConvexBody::box({0.5, 1.0, 2.0, 0.75});
  for (const ConvexBody& body : {ball, box}) {
    for (int i = 0; i < 2000; ++i) {
      const double xi = 0.3 * src.uniform();
      const Vec x = testing::random_point(src, 4, 3.0 * body.outer_radius());
      const Vec y = testing::random_point(src, 4, 3.0 * body.outer_radius());
      const Vec px = body.project_shrunk(xi, x);
      const Vec py = body.project_shrunk(xi, y);
      // idempotence
      CHECK(dist(body.project_shrunk(xi, px), px) <= 1e-9);
      // nonexpansiveness
      CHECK(dist(px, py) <= dist(x, y) + 1e-9);
      // output lands in (1-xi)K: check via the scaled body
      Vec unscaled = scaled(px, 1.0 / (1.0 - xi));
      CHECK(body.contains(unscaled));
    }
  }
}

TEST_CASE("box radii are tight") {
  RandomSource src(13, 0);
  const auto box = ConvexBody::box({0.5, 1.0, 2.0});
  for (int i = 0; i < 1000; ++i) {
    Vec inside = sample_ball(src, 3);
    inside = scaled(inside, 0.999 * box.inner_radius());
    CHECK(box.contains(inside));
    const Vec member = testing::random_point_in(src, box);
    CHECK(norm(member) <= box.outer_radius() + 1e-12);
  }
}
