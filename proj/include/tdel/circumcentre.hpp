#pragma once

#include <array>
#include <optional>

#include "tdel/geodesic.hpp"

namespace tdel {

/// Four vertices as explicit lifts in one chart neighbourhood. The last
/// vertex is the reference: h(q)_k = d(q, v_k) - d(q, v_3), k = 0..2.
using Tetra = std::array<ChartPoint, 4>;

struct CircumcentreRoot {
  ChartPoint centre{};
  double radius = 0.0;
  /// Euclidean norm of h at the centre.
  double residual = 0.0;
  int iterations = 0;
};

struct NewtonOptions {
  /// Length scale for the tolerances below (the sampling parameter).
  double scale = 0.1;
  double residual_tol = 1e-13;
  int max_iterations = 40;
  /// Give up once an iterate moves farther than this (times scale) from the seed.
  double max_excursion = 3.0;
  /// Give up once the mean vertex distance exceeds this (times scale);
  /// zero disables the check.
  double max_radius = 0.0;
  ShootingOptions shooting{};
};

/// h(q) with each distance evaluated on the given lifts.
Vec3 circumcentre_map(const MetricField& field, const Tetra& tet, const ChartPoint& q,
                      const ShootingOptions& shooting = {});

/// Damped Newton on h from `seed`, Jacobian from the geodesic endpoint
/// covectors. Empty when it diverges, stalls or meets a singular Jacobian.
std::optional<CircumcentreRoot> newton_circumcentre(const MetricField& field, const Tetra& tet,
                                                    const ChartPoint& seed, const NewtonOptions& options);

/// Circumcentre of the four lifts under the constant metric
/// diag(1, 1, zz) frozen at their mean y. Empty when they are coplanar to
/// working precision.
std::optional<ChartPoint> frozen_metric_circumcentre(const MetricField& field, const Tetra& tet);

}  // namespace tdel
