#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tdel/chart.hpp"
#include "tdel/geodesic.hpp"

namespace tdel {

/// Uniform bucket grid over the torus. Queries report min-image
/// displacements, so callers work in the lift around the query point.
class PeriodicGrid {
 public:
  PeriodicGrid(const TorusChart& chart, double cell_size)
      : chart_(chart),
        cells_(std::max(1, static_cast<int>(std::floor(chart.period() / cell_size)))),
        width_(chart.period() / cells_),
        buckets_(static_cast<std::size_t>(cells_) * cells_ * cells_) {}

  int cells_per_axis() const noexcept { return cells_; }
  double cell_width() const noexcept { return width_; }

  int axis_cell(double c) const noexcept {
    const double w = chart_.wrap(c) + chart_.period() / 2.0;
    return std::clamp(static_cast<int>(std::floor(w / width_)), 0, cells_ - 1);
  }
  std::size_t cell_of(const ChartPoint& q) const noexcept {
    return flat(axis_cell(q.x), axis_cell(q.y), axis_cell(q.z));
  }

  void insert(std::uint32_t id, const ChartPoint& q) {
    buckets_[cell_of(q)].push_back(id);
  }
  void erase(std::uint32_t id, const ChartPoint& q) {
    auto& b = buckets_[cell_of(q)];
    b.erase(std::remove(b.begin(), b.end(), id), b.end());
  }
  const std::vector<std::uint32_t>& bucket(std::size_t cell) const { return buckets_[cell]; }

  /// Calls visit(id) for every id stored in a cell that can contain points
  /// within chart-Euclidean `radius` of q. Each id is visited once.
  template <class Visit>
  void for_each_near(const ChartPoint& q, double radius, Visit&& visit) const {
    const int reach = static_cast<int>(std::ceil(radius / width_));
    const int cx = axis_cell(q.x), cy = axis_cell(q.y), cz = axis_cell(q.z);
    int lo = -reach, hi = reach;
    if (2 * reach + 1 >= cells_) {
      lo = 0;
      hi = cells_ - 1;
    }
    const bool all = 2 * reach + 1 >= cells_;
    for (int i = lo; i <= hi; ++i)
      for (int j = lo; j <= hi; ++j)
        for (int k = lo; k <= hi; ++k) {
          const std::size_t c = all ? flat(i, j, k) : flat(mod(cx + i), mod(cy + j), mod(cz + k));
          for (std::uint32_t id : buckets_[c]) visit(id);
        }
  }

 private:
  int mod(int i) const noexcept { return ((i % cells_) + cells_) % cells_; }
  std::size_t flat(int i, int j, int k) const noexcept {
    return (static_cast<std::size_t>(i) * cells_ + j) * cells_ + k;
  }

  TorusChart chart_;
  int cells_;
  double width_;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

/// Straight-segment upper bound on the distance between two explicit
/// lifts, padded for the quadrature rule.
inline double segment_upper_bound(const MetricField& field, const ChartPoint& a, const ChartPoint& b) {
  return segment_length_fixed(field, a, b) * (1.0 + 1e-12);
}

/// Decides d(a, b) < threshold for two explicit lifts that are closer than
/// the injectivity floor. Uses the chart-Euclidean lower bound, the segment
/// upper bound and the ellipsoid lower bound before shooting. When the
/// solver runs, `*exact` receives the distance.
inline bool closer_than(const MetricField& field, const ChartPoint& a, const ChartPoint& b, double threshold,
                        double* exact = nullptr) {
  const double e = norm(b - a);
  if (e >= threshold) return false;
  const double ub = segment_upper_bound(field, a, b);
  if (ub < threshold) return true;
  if (distance_lower_bound(field, a, b, ub) >= threshold) return false;
  const double d = std::min(shoot(field, a, b).length, ub);
  if (exact) *exact = d;
  return d < threshold;
}

}  // namespace tdel
