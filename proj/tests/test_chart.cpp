#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tdel/chart.hpp"
#include "tdel/error.hpp"

using namespace tdel;

TEST_CASE("wrap and canonicalize stay in the fundamental domain") {
  const TorusChart chart(2.0);
  CHECK(chart.wrap(1.0) == doctest::Approx(-1.0));
  CHECK(chart.wrap(-1.0) == doctest::Approx(-1.0));
  CHECK(chart.wrap(2.5) == doctest::Approx(0.5));
  CHECK(chart.wrap(-3.25) == doctest::Approx(0.75));
  const ChartPoint q = chart.canonicalize({5.1, -7.3, 0.2});
  CHECK(q.x == doctest::Approx(-0.9));
  CHECK(q.y == doctest::Approx(0.7));
  CHECK(q.z == doctest::Approx(0.2));
  CHECK(chart.same_point({1.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}, 1e-14));
  CHECK_FALSE(chart.same_point({0.5, 0.0, 0.0}, {-0.5, 0.0, 0.0}, 1e-14));
}

TEST_CASE("min_image picks the shortest representative") {
  const TorusChart chart(2.0);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const Vec3 a = oracle::random_point(rng, 6.0), b = oracle::random_point(rng, 6.0);
    CHECK(norm(chart.min_image(b - a)) == doctest::Approx(oracle::flat_torus_distance(a, b, 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("bump function values") {
  const BumpFunction f(0.375);
  CHECK(f.value(0.0) == doctest::Approx(0.75));
  CHECK(f.value(1.0) == doctest::Approx(0.0));
  CHECK(f.value(0.3) == doctest::Approx(f.value(-0.3)));
  CHECK(f.value(0.3) == doctest::Approx(f.value(2.3)));
  const double h = 1e-5;
  for (double y : {-0.7, 0.1, 0.45}) {
    CHECK(f.derivative(y) == doctest::Approx((f.value(y + h) - f.value(y - h)) / (2 * h)).epsilon(1e-8));
    CHECK(f.second_derivative(y) ==
          doctest::Approx((f.derivative(y + h) - f.derivative(y - h)) / (2 * h)).epsilon(1e-7));
  }
  CHECK(f.max_on(-0.2, 0.4) == doctest::Approx(0.75));
  CHECK(f.min_on(-0.2, 0.4) == doctest::Approx(f.value(0.4)));
  CHECK(f.max_on(0.9, 1.1) == doctest::Approx(f.value(0.9)));
  CHECK(f.min_on(0.9, 1.1) == doctest::Approx(0.0));
  CHECK_THROWS_AS(BumpFunction(0.5), Error);
  CHECK_THROWS_AS(BumpFunction(-0.1), Error);
}

TEST_CASE("metric tensor is diag(1, 1, 1 + f)") {
  const MetricField field(2.0, 0.375);
  const Mat3 g = metric_at(field, {0.3, 0.0, -0.1});
  CHECK(g[0][0] == 1.0);
  CHECK(g[1][1] == 1.0);
  CHECK(g[2][2] == doctest::Approx(1.75));
  CHECK(g[0][1] == 0.0);
  CHECK(field.stretch_bound() == doctest::Approx(std::sqrt(1.75)));
}

TEST_CASE("straight line length against Simpson") {
  const MetricField field(2.0, 0.375);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const Vec3 a = oracle::random_point(rng, 2.0);
    const Vec3 b = a + 0.3 * (oracle::random_point(rng, 2.0));
    const double ref = oracle::simpson_segment_length(a, b, 0.375);
    CHECK(straight_line_length(field, a, b) == doctest::Approx(ref).epsilon(1e-10));
    CHECK(segment_length_fixed(field, a, b) == doctest::Approx(ref).epsilon(1e-9));
    CHECK(straight_line_length(field, a, b) >= norm(b - a));
  }
}

TEST_CASE("straight line length is Euclidean for A = 0 and in the xy-plane") {
  const MetricField flat(2.0, 0.0);
  const MetricField bumpy(2.0, 0.375);
  const ChartPoint a{0.1, -0.2, 0.3}, b{-0.4, 0.5, -0.1};
  CHECK(straight_line_length(flat, a, b) == doctest::Approx(norm(b - a)).epsilon(1e-13));
  const ChartPoint c{0.1, -0.2, 0.3}, d{0.6, 0.4, 0.3};
  CHECK(straight_line_length(bumpy, c, d) == doctest::Approx(norm(d - c)).epsilon(1e-13));
}

TEST_CASE("fixed-rule gradients match finite differences") {
  const MetricField field(2.0, 0.375);
  const ChartPoint a{0.02, 0.05, -0.03}, b{-0.04, -0.01, 0.07};
  Vec3 ga, gb;
  segment_length_fixed(field, a, b, ga, gb);
  const double h = 1e-6;
  for (int c = 0; c < 3; ++c) {
    ChartPoint ap = a, am = a, bp = b, bm = b;
    ap[c] += h;
    am[c] -= h;
    bp[c] += h;
    bm[c] -= h;
    CHECK(ga[c] == doctest::Approx((segment_length_fixed(field, ap, b) - segment_length_fixed(field, am, b)) / (2 * h))
                       .epsilon(1e-6));
    CHECK(gb[c] == doctest::Approx((segment_length_fixed(field, a, bp) - segment_length_fixed(field, a, bm)) / (2 * h))
                       .epsilon(1e-6));
  }
}

TEST_CASE("distance lower bound is below the straight segment and above Euclidean") {
  const MetricField field(2.0, 0.375);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = oracle::random_point(rng, 2.0);
    const Vec3 b = a + 0.2 * oracle::random_point(rng, 2.0);
    const double ub = straight_line_length(field, a, b);
    const double lb = distance_lower_bound(field, a, b, ub);
    CHECK(lb <= ub * (1 + 1e-12));
    CHECK(lb >= norm(b - a) * (1 - 1e-12));
  }
}
