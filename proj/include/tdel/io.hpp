#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "tdel/delaunay.hpp"

namespace tdel {

using Json = nlohmann::ordered_json;

Json to_json(const ChartPoint& q);
ChartPoint point_from_json(const Json& j);
Json to_json(const Simplex& s);

/// {version, L, A, epsilon, seed, fixed_indices, points}
Json net_to_json(const MetricField& field, const PointSet& net);
/// Inverse of net_to_json; the field is rebuilt from L and A.
PointSet net_from_json(const Json& j, MetricField* field = nullptr);

/// {version, net_ref, simplices: {d0..d3}, certificates, census}
Json complex_to_json(const SimplicialComplex& complex, const std::vector<CensusEntry>& census,
                     const std::string& net_ref);

/// CSV with header b,xi_tilde,xi_tilde_prime and LF line endings.
std::string xi_scan_csv(const XiScan& scan);

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for batch artifacts; throws Io on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Fixed-width decimal with `digits` significant digits.
std::string format_number(double value, int digits = 17);

}  // namespace tdel
