#include "tdel/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tdel/error.hpp"

namespace tdel {

namespace {
constexpr int format_version = 1;
}

Json to_json(const ChartPoint& q) { return Json::array({q.x, q.y, q.z}); }

ChartPoint point_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::Io, "a point is an array of three numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json to_json(const Simplex& s) {
  Json j = Json::array();
  for (std::size_t v : s) j.push_back(v);
  return j;
}

Json net_to_json(const MetricField& field, const PointSet& net) {
  Json j;
  j["version"] = format_version;
  j["L"] = field.chart().period();
  j["A"] = field.amplitude();
  j["epsilon"] = net.epsilon;
  j["seed"] = net.seed;
  j["fixed_indices"] = net.fixed_indices;
  j["density_certified"] = net.density_certified;
  j["separation_certified"] = net.separation_certified;
  Json pts = Json::array();
  for (const auto& q : net.points) pts.push_back(to_json(q));
  j["points"] = std::move(pts);
  return j;
}

PointSet net_from_json(const Json& j, MetricField* field) {
  try {
    if (j.at("version").get<int>() != format_version) throw Error(ErrorKind::Io, "unsupported net version");
    PointSet net;
    net.epsilon = j.at("epsilon").get<double>();
    net.seed = j.at("seed").get<std::uint64_t>();
    net.fixed_indices = j.at("fixed_indices").get<std::vector<std::size_t>>();
    net.density_certified = j.value("density_certified", false);
    net.separation_certified = j.value("separation_certified", false);
    for (const auto& p : j.at("points")) net.points.push_back(point_from_json(p));
    for (std::size_t f : net.fixed_indices)
      if (f >= net.points.size()) throw Error(ErrorKind::Io, "fixed index out of range");
    if (field) *field = MetricField(j.at("L").get<double>(), j.at("A").get<double>());
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, std::string("malformed net document: ") + e.what());
  }
}

Json complex_to_json(const SimplicialComplex& complex, const std::vector<CensusEntry>& census,
                     const std::string& net_ref) {
  Json j;
  j["version"] = format_version;
  j["net_ref"] = net_ref;
  Json simplices;
  for (int d = 0; d < 4; ++d) {
    Json list = Json::array();
    for (const auto& s : complex.simplices[d]) list.push_back(to_json(s));
    simplices["d" + std::to_string(d)] = std::move(list);
  }
  j["simplices"] = std::move(simplices);
  Json certs = Json::array();
  for (const auto& c : complex.certificates) {
    Json cj;
    cj["simplex"] = to_json(c.simplex);
    Json centres = Json::array();
    for (const auto& q : c.centres) centres.push_back(to_json(q));
    cj["centres"] = std::move(centres);
    cj["radii"] = c.radii;
    certs.push_back(std::move(cj));
  }
  j["certificates"] = std::move(certs);
  Json cj = Json::array();
  for (const auto& e : census) {
    Json row;
    row["triangle"] = to_json(e.triangle);
    row["count"] = e.count;
    row["determinate"] = e.determinate;
    cj.push_back(std::move(row));
  }
  j["census"] = std::move(cj);
  Json exhausted = Json::array();
  for (const auto& s : complex.seed_exhausted) exhausted.push_back(to_json(s));
  j["seed_exhausted"] = std::move(exhausted);
  return j;
}

std::string format_number(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return buf;
}

std::string xi_scan_csv(const XiScan& scan) {
  std::string out = "b,xi_tilde,xi_tilde_prime\n";
  for (const auto& r : scan.rows)
    out += format_number(r.b) + "," + format_number(r.xi_tilde) + "," + format_number(r.xi_tilde_prime) + "\n";
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingArtifacts, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace tdel
