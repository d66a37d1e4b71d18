#pragma once

#include <vector>

#include "tdel/chart.hpp"

namespace tdel {

enum class SolverTag { PathEnergy, Shooting };

/// Discretized path through a specific lift of its endpoints.
struct GeodesicPath {
  std::vector<ChartPoint> vertices;
  /// Sum of straight_line_length over consecutive vertices.
  double length = 0.0;
  bool converged = false;
  SolverTag solver_tag = SolverTag::PathEnergy;
};

struct DistanceResult {
  double distance = 0.0;
  GeodesicPath path;
  /// Euclidean length of the best lift.
  double lower_bound = 0.0;
  /// Straight-line metric length of the best lift.
  double upper_bound = 0.0;
};

inline constexpr double default_distance_tol = 1e-8;

/// Discrete path-energy descent with segment doubling, minimized over the
/// candidate lifts of q2.
DistanceResult geodesic_distance(const MetricField& field, const ChartPoint& q1, const ChartPoint& q2,
                                 double tol = default_distance_tol);

/// Shooting on the reduced geodesic ODE (x and z are cyclic), minimized over
/// the candidate lifts of q2.
DistanceResult geodesic_distance_shooting(const MetricField& field, const ChartPoint& q1,
                                          const ChartPoint& q2, double tol = default_distance_tol);

/// Lattice translates of q2 worth trying from q1: every lift whose
/// chart-Euclidean distance is within stretch_bound() of the shortest one.
/// Throws BeyondInjectivityFloor when the shortest lift is beyond the floor.
std::vector<ChartPoint> candidate_lifts(const MetricField& field, const ChartPoint& q1,
                                        const ChartPoint& q2);

/// Boundary-value shot between two explicit lifts. Distances computed this
/// way are smooth in the endpoints (fixed step count, Newton converged to
/// roundoff), which is what finite differences and root finding need.
struct Shot {
  double length = 0.0;
  /// Gradient of the distance with respect to the start / end point.
  Vec3 grad_start{};
  Vec3 grad_end{};
  /// Initial y-velocity and conserved z-momentum; reusable as a warm start.
  double eta = 0.0;
  double momentum = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct ShootingOptions {
  int steps = 32;
  int max_iterations = 30;
};

/// Throws NotConverged when Newton on the shooting parameters fails.
Shot shoot(const MetricField& field, const ChartPoint& from, const ChartPoint& to,
           const ShootingOptions& options = {}, const Shot* warm_start = nullptr);

/// Same as shoot() but returns an unconverged Shot instead of throwing.
Shot try_shoot(const MetricField& field, const ChartPoint& from, const ChartPoint& to,
               const ShootingOptions& options = {}, const Shot* warm_start = nullptr) noexcept;

/// Samples of the shot geodesic at `samples + 1` equally spaced parameters.
std::vector<ChartPoint> trace_shot(const MetricField& field, const ChartPoint& from, const ChartPoint& to,
                                   const Shot& shot, int samples);

/// Shooting distance between the closest lifts of two points, no bounds or
/// path bookkeeping.
double metric_distance(const MetricField& field, const ChartPoint& a, const ChartPoint& b);

ShootingOptions shooting_options_for_tol(double tol);

}  // namespace tdel
