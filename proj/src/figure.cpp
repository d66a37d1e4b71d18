#include "tdel/figure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "tdel/error.hpp"
#include "tdel/spatial.hpp"

namespace tdel {

namespace {

// In-plane axes (s, t) and the normal axis for each slice.
struct Axes {
  int s, t, n;
};

Axes axes_of(SlicePlane plane) {
  switch (plane) {
    case SlicePlane::XZ: return {0, 2, 1};
    case SlicePlane::XY: return {0, 1, 2};
    case SlicePlane::YZ: return {1, 2, 0};
  }
  return {0, 2, 1};
}

std::string colour_for(int label) {
  // Deterministic pastel palette.
  std::uint32_t h = static_cast<std::uint32_t>(label) * 2654435761u;
  const int r = 150 + static_cast<int>(h & 0x5f);
  const int g = 150 + static_cast<int>((h >> 8) & 0x5f);
  const int b = 150 + static_cast<int>((h >> 16) & 0x5f);
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

SlicePlane parse_plane(const std::string& name) {
  if (name == "xz") return SlicePlane::XZ;
  if (name == "xy") return SlicePlane::XY;
  if (name == "yz") return SlicePlane::YZ;
  throw Error(ErrorKind::InvalidArgument, "plane must be one of xz, xy, yz");
}

std::string to_string(SlicePlane plane) {
  switch (plane) {
    case SlicePlane::XZ: return "xz";
    case SlicePlane::XY: return "xy";
    case SlicePlane::YZ: return "yz";
  }
  return "xz";
}

ChartPoint SliceLabels::pixel_centre(int row, int col) const {
  const Axes ax = axes_of(plane);
  const double step = 2.0 * half_width / resolution;
  ChartPoint q{};
  q[ax.s] = -half_width + (col + 0.5) * step;
  q[ax.t] = half_width - (row + 0.5) * step;
  return q;
}

std::pair<int, int> SliceLabels::pixel_of(double s, double t) const {
  const double step = 2.0 * half_width / resolution;
  const int col = static_cast<int>(std::floor((s + half_width) / step));
  const int row = static_cast<int>(std::floor((half_width - t) / step));
  return {std::clamp(row, 0, resolution - 1), std::clamp(col, 0, resolution - 1)};
}

SliceLabels label_slice(const MetricField& field, const PointSet& net, SlicePlane plane, double half_width,
                        int resolution, Execution execution) {
  if (resolution <= 0 || !(half_width > 0.0)) throw Error(ErrorKind::InvalidArgument, "bad slice geometry");
  if (net.points.empty()) throw Error(ErrorKind::MissingArtifacts, "net has no points");
  const auto& chart = field.chart();
  SliceLabels out;
  out.plane = plane;
  out.resolution = resolution;
  out.half_width = half_width;
  out.labels.assign(static_cast<std::size_t>(resolution) * resolution, -1);

  PeriodicGrid grid(chart, net.epsilon);
  for (std::size_t i = 0; i < net.points.size(); ++i)
    grid.insert(static_cast<std::uint32_t>(i), chart.canonicalize(net.points[i]));
  // Every point is within eps of the net, hence within eps in the chart.
  const double reach = net.epsilon;
  std::vector<std::size_t> exact_rows(resolution, 0);

  for_each_index(execution, resolution, [&](std::ptrdiff_t row) {
    std::vector<std::pair<std::uint32_t, ChartPoint>> near;
    for (int col = 0; col < resolution; ++col) {
      const ChartPoint q = out.pixel_centre(static_cast<int>(row), col);
      double radius = reach;
      double best_ub = std::numeric_limits<double>::infinity();
      // Metric length dominates chart length, so once some point is within
      // metric distance `radius` nothing outside the chart ball can win.
      for (;;) {
        near.clear();
        grid.for_each_near(q, radius, [&](std::uint32_t id) {
          const ChartPoint lift = chart.lift_near(q, net.points[id]);
          if (norm(lift - q) < radius) near.push_back({id, lift});
        });
        for (const auto& [id, lift] : near) best_ub = std::min(best_ub, segment_upper_bound(field, q, lift));
        if (best_ub < radius) break;
        radius = std::isfinite(best_ub) ? best_ub * (1.0 + 1e-9) : 2.0 * radius;
      }
      int label = -1;
      double best = std::numeric_limits<double>::infinity();
      int contenders = 0;
      for (const auto& [id, lift] : near) {
        const double ub = segment_upper_bound(field, q, lift);
        if (distance_lower_bound(field, q, lift, ub) <= best_ub) ++contenders;
      }
      for (const auto& [id, lift] : near) {
        const double ub = segment_upper_bound(field, q, lift);
        if (distance_lower_bound(field, q, lift, ub) > best_ub) continue;
        const double d = contenders == 1 ? ub : std::min(shoot(field, q, lift).length, ub);
        if (d < best || (d == best && static_cast<int>(id) < label)) {
          best = d;
          label = static_cast<int>(id);
        }
      }
      if (contenders > 1) ++exact_rows[row];
      out.labels[static_cast<std::size_t>(row) * resolution + col] = label;
    }
  });
  for (auto n : exact_rows) out.exact_pixels += n;
  return out;
}

std::string render_slice_svg(const PointSet& net, const SliceLabels& slice,
                             const std::vector<FigureMark>& named_points, const std::vector<FigureMark>& marks) {
  const int n = slice.resolution;
  const double px = 512.0 / n;
  const Axes ax = axes_of(slice.plane);
  const char* names = slice.plane == SlicePlane::XZ ? "xz" : (slice.plane == SlicePlane::XY ? "xy" : "yz");
  auto to_screen = [&](const ChartPoint& q, double& sx, double& sy) {
    const double scale = 512.0 / (2.0 * slice.half_width);
    sx = (q[ax.s] + slice.half_width) * scale;
    sy = (slice.half_width - q[ax.t]) * scale;
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"512\" height=\"512\" "
         "viewBox=\"0 0 512 512\">\n";
  svg += "<title>" + std::string(names) + " slice, half width " + num(slice.half_width) + "</title>\n";
  svg += "<g shape-rendering=\"crispEdges\">\n";
  for (int row = 0; row < n; ++row) {
    int col = 0;
    while (col < n) {
      const int label = slice.at(row, col);
      int end = col + 1;
      while (end < n && slice.at(row, end) == label) ++end;
      svg += "<rect x=\"" + num(col * px) + "\" y=\"" + num(row * px) + "\" width=\"" + num((end - col) * px) +
             "\" height=\"" + num(px) + "\" fill=\"" + colour_for(label) + "\"/>\n";
      col = end;
    }
  }
  svg += "</g>\n<g fill=\"#333333\">\n";
  // Net points within a quarter eps of the plane.
  for (const auto& q : net.points) {
    if (std::abs(q[ax.n]) > 0.25 * net.epsilon) continue;
    if (std::abs(q[ax.s]) > slice.half_width || std::abs(q[ax.t]) > slice.half_width) continue;
    double sx, sy;
    to_screen(q, sx, sy);
    svg += "<circle cx=\"" + num(sx) + "\" cy=\"" + num(sy) + "\" r=\"2\"/>\n";
  }
  svg += "</g>\n";
  for (const auto& m : named_points) {
    double sx, sy;
    to_screen(m.point, sx, sy);
    svg += "<circle cx=\"" + num(sx) + "\" cy=\"" + num(sy) + "\" r=\"4\" fill=\"#000000\"/>\n";
    svg += "<text x=\"" + num(sx + 6) + "\" y=\"" + num(sy - 6) + "\" font-size=\"14\">" + m.label + "</text>\n";
  }
  for (const auto& m : marks) {
    double sx, sy;
    to_screen(m.point, sx, sy);
    svg += "<path d=\"M" + num(sx - 5) + " " + num(sy - 5) + " L" + num(sx + 5) + " " + num(sy + 5) + " M" +
           num(sx - 5) + " " + num(sy + 5) + " L" + num(sx + 5) + " " + num(sy - 5) +
           "\" stroke=\"#c00000\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(sx + 6) + "\" y=\"" + num(sy + 14) + "\" font-size=\"12\" fill=\"#c00000\">" +
           m.label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace tdel
