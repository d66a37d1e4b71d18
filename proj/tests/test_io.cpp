#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "tdel/error.hpp"
#include "tdel/io.hpp"

using namespace tdel;

TEST_CASE("net JSON round-trips exactly") {
  const MetricField field(2.0, 0.375);
  PointSet net;
  net.points = {{0.1, -0.2, 0.3}, {1.0 / 3.0, 0.0, -0.7071067811865476}, {-0.999, 0.999, 1e-17}};
  net.epsilon = 0.1;
  net.fixed_indices = {2, 0};
  net.seed = 42;
  const Json j = net_to_json(field, net);
  CHECK(j["L"] == 2.0);
  CHECK(j["A"] == 0.375);
  MetricField back_field;
  const PointSet back = net_from_json(Json::parse(j.dump()), &back_field);
  CHECK(back.points == net.points);
  CHECK(back.fixed_indices == net.fixed_indices);
  CHECK(back.epsilon == net.epsilon);
  CHECK(back.seed == net.seed);
  CHECK(back_field.chart().period() == 2.0);
  CHECK(back_field.amplitude() == 0.375);
}

TEST_CASE("malformed net JSON is rejected") {
  const MetricField field(2.0, 0.375);
  PointSet net;
  net.points = {{0.0, 0.0, 0.0}};
  net.epsilon = 0.1;
  Json j = net_to_json(field, net);
  Json bad = j;
  bad["fixed_indices"] = Json::array({5});
  CHECK_THROWS_AS(net_from_json(bad), Error);
  bad = j;
  bad.erase("points");
  CHECK_THROWS_AS(net_from_json(bad), Error);
  CHECK_THROWS_AS(point_from_json(Json::array({1.0, 2.0})), Error);
}

TEST_CASE("xi scan CSV layout") {
  XiScan scan;
  scan.rows = {{0.01, 0.32, -0.001}, {0.02, 0.31, -0.002}};
  const std::string csv = xi_scan_csv(scan);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "b,xi_tilde,xi_tilde_prime");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 2);
  }
  CHECK(rows == 2);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(std::stod(format_number(0.1)) == 0.1);
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("complex JSON lists simplices, certificates and census") {
  VoronoiCertificate t{{0, 1, 2, 3}, {{0.0, 0.01, 0.0}, {0.0, -0.01, 0.0}}, {0.05, 0.05}};
  const auto complex = assemble_complex({t}, {0, 1});
  const Json j = complex_to_json(complex, coface_census(complex), "net.json");
  CHECK(j["net_ref"] == "net.json");
  CHECK(j["simplices"]["d0"].size() == 4);
  CHECK(j["simplices"]["d3"].size() == 1);
  REQUIRE(j["certificates"].size() == 1);
  CHECK(j["certificates"][0]["centres"].size() == 2);
  CHECK(j["census"].size() == 4);
}

TEST_CASE("text files") {
  const auto dir = std::filesystem::temp_directory_path() / "tdel-io-test";
  std::filesystem::create_directories(dir);
  write_text_file(dir / "a.txt", "hello\n");
  CHECK(read_text_file(dir / "a.txt") == "hello\n");
  CHECK_THROWS_AS(read_text_file(dir / "missing.txt"), Error);
  std::filesystem::remove_all(dir);
}
