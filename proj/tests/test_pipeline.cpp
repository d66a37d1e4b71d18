#include <doctest.h>

#include <filesystem>

#include "tdel/error.hpp"
#include "tdel/pipeline.hpp"

using namespace tdel;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Io;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = run_config_from_json(Json::parse(R"({"epsilon": 0.05, "seed": 7, "q1": [0, 0, 0.1]})"));
  CHECK(c.epsilon == 0.05);
  CHECK(c.seed == 7);
  CHECK(c.A == 0.375);
  REQUIRE(c.q1.has_value());
  CHECK(c.q1->z == 0.1);
  CHECK(kind_of([] { run_config_from_json(Json::parse(R"({"epsilon": 0.1, "colour": 1})")); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([] { run_config_from_json(Json::parse(R"({"q2": [1, 2]})")); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { run_config_from_json(Json::parse(R"({"epsilon": "big"})")); }) ==
        ErrorKind::InvalidArgument);
  const RunConfig back = run_config_from_json(to_json(c));
  CHECK(back.epsilon == c.epsilon);
  CHECK(back.seed == c.seed);
}

TEST_CASE("config validation") {
  RunConfig c;
  validate(c);
  c.epsilon = 0.2;  // above L / 20
  CHECK(kind_of([&] { validate(c); }) == ErrorKind::InvalidArgument);
  c = {};
  c.A = -0.1;
  CHECK(kind_of([&] { validate(c); }) == ErrorKind::InvalidArgument);
  c = {};
  c.plane = "xw";
  CHECK(kind_of([&] { validate(c); }) == ErrorKind::InvalidArgument);
  c = {};
  c.rho = 0.5;
  CHECK(kind_of([&] { validate(c); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("distance command") {
  RunConfig c;
  const Json j = cmd_distance(c);
  CHECK(j["distance"].get<double>() == doctest::Approx(0.1870829).epsilon(1e-6));
  CHECK(j["distance_shooting"].get<double>() == doctest::Approx(0.1870829).epsilon(1e-6));
  CHECK(j["lower_bound"].get<double>() <= j["distance"].get<double>());
  CHECK(j["upper_bound"].get<double>() >= j["distance"].get<double>());
  c.q1 = ChartPoint{0.3, 0.1, -0.2};
  c.q2 = ChartPoint{0.3, 0.1, -0.2};
  CHECK(cmd_distance(c)["distance"].get<double>() == 0.0);
  c.q2 = ChartPoint{-1.7, 0.1, -0.2};
  CHECK(cmd_distance(c)["distance"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("xi scan command") {
  RunConfig c;
  const std::string csv = cmd_xi_scan(c);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 33);
  c.A = 0.0;
  const std::string flat = cmd_xi_scan(c);
  CHECK(std::count(flat.begin(), flat.end(), '\n') == 33);
}

TEST_CASE("flat reproduce stops at scan_xi") {
  RunConfig c;
  c.A = 0.0;
  c.out_dir = scratch("tdel-flat-reproduce").string();
  try {
    cmd_reproduce(c);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "scan_xi");
    CHECK(e.kind() == ErrorKind::NoNegativeSlope);
    const Json j = error_json(e, e.stage());
    CHECK(j["error"]["kind"] == "NoNegativeSlope");
    CHECK(j["error"]["stage"] == "scan_xi");
    CHECK(j["error"]["message"].is_string());
  }
  std::filesystem::remove_all(c.out_dir);
}

TEST_CASE("commands that need artifacts report them missing") {
  RunConfig c;
  c.out_dir = scratch("tdel-empty").string();
  CHECK(kind_of([&] { cmd_complex(c); }) == ErrorKind::MissingArtifacts);
  CHECK(kind_of([&] { cmd_figure(c.out_dir, SlicePlane::XZ, 64); }) == ErrorKind::MissingArtifacts);
}
