#include <doctest.h>

#include "tdel/error.hpp"
#include "tdel/figure.hpp"

using namespace tdel;

namespace {

constexpr double eps = 0.1;

PointSet sigma_net() {
  auto cfg = CounterexampleConfig::make(MetricField(2.0, 0.375), eps);
  const Configuration conf =
      solve_circumcentres(build_configuration(cfg, scan_xi(cfg, uniform_b_grid(cfg, 32))), cfg);
  PointSet net;
  net.points = {conf.u, conf.v, conf.w, conf.p};
  net.epsilon = eps;
  net.fixed_indices = {0, 1, 2, 3};
  return net;
}

}  // namespace

TEST_CASE("plane names") {
  CHECK(parse_plane("xz") == SlicePlane::XZ);
  CHECK(to_string(parse_plane("yz")) == "yz");
  CHECK_THROWS_AS(parse_plane("zz"), Error);
}

TEST_CASE("pixel geometry") {
  SliceLabels s;
  s.plane = SlicePlane::XZ;
  s.resolution = 5;
  s.half_width = 1.0;
  const ChartPoint c = s.pixel_centre(2, 2);
  CHECK(c.x == doctest::Approx(0.0));
  CHECK(c.z == doctest::Approx(0.0));
  CHECK(s.pixel_centre(0, 0).z > 0.0);
  CHECK(s.pixel_of(0.0, 0.0) == std::pair<int, int>{2, 2});
  CHECK(s.pixel_of(-0.99, 0.99) == std::pair<int, int>{0, 0});
}

TEST_CASE("the origin changes sides when the bump is switched on") {
  // u, v sit on the z-axis at distance a eps from the origin and w, p on
  // the x-axis at (1 + xi) a eps. Flat, u and v are nearer; with the bump
  // the z-direction is stretched by nearly 1 + xi0 > 1 + xi.
  const MetricField bumped(2.0, 0.375), flat(2.0, 0.0);
  const PointSet net = sigma_net();
  const int n = 41;
  const auto on = label_slice(bumped, net, SlicePlane::XZ, 2.0 * eps, n);
  const auto off = label_slice(flat, net, SlicePlane::XZ, 2.0 * eps, n, Execution::Serial);
  const int mid = n / 2;
  CHECK((on.at(mid, mid) == 2 || on.at(mid, mid) == 3));
  CHECK((off.at(mid, mid) == 0 || off.at(mid, mid) == 1));
  // Far along the axes the labels agree with the obvious nearest point.
  CHECK(on.at(0, mid) == 0);
  CHECK(on.at(n - 1, mid) == 1);
  CHECK(on.at(mid, n - 1) == 2);
  CHECK(on.at(mid, 0) == 3);
  const auto serial = label_slice(bumped, net, SlicePlane::XZ, 2.0 * eps, n, Execution::Serial);
  CHECK(serial.labels == on.labels);
}

TEST_CASE("SVG carries the labels and marks") {
  const MetricField field(2.0, 0.375);
  const PointSet net = sigma_net();
  const auto slice = label_slice(field, net, SlicePlane::YZ, 2.0 * eps, 16);
  const std::string svg = render_slice_svg(net, slice, {{net.points[0], "u"}, {net.points[1], "v"}},
                                           {{{0.0, 0.03, 0.0}, "c+"}});
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find(">u<") != std::string::npos);
  CHECK(svg.find(">c+<") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}
