#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdel/sampling.hpp"

namespace tdel {

enum class SlicePlane { XZ, XY, YZ };

SlicePlane parse_plane(const std::string& name);
std::string to_string(SlicePlane plane);

/// Nearest-sample labels on a square slice through the origin.
struct SliceLabels {
  SlicePlane plane = SlicePlane::XZ;
  int resolution = 0;
  double half_width = 0.0;
  /// Row-major, row 0 at the top (largest second coordinate).
  std::vector<int> labels;
  std::size_t exact_pixels = 0;

  int at(int row, int col) const { return labels[static_cast<std::size_t>(row) * resolution + col]; }
  /// Chart point at the centre of a pixel.
  ChartPoint pixel_centre(int row, int col) const;
  /// Pixel containing the in-plane coordinates (s, t).
  std::pair<int, int> pixel_of(double s, double t) const;
};

/// Labels each pixel with the index of its metric-nearest net point. The
/// straight-segment and ellipsoid bounds settle most pixels; the rest are
/// resolved with the shooting solver.
SliceLabels label_slice(const MetricField& field, const PointSet& net, SlicePlane plane, double half_width,
                        int resolution, Execution execution = Execution::Parallel);

struct FigureMark {
  ChartPoint point{};
  std::string label;
};

/// SVG 1.1 document: Voronoi regions of the slice, net points near the
/// plane, labelled fixed points and marks (circumcentres).
std::string render_slice_svg(const PointSet& net, const SliceLabels& slice,
                             const std::vector<FigureMark>& named_points, const std::vector<FigureMark>& marks);

}  // namespace tdel
