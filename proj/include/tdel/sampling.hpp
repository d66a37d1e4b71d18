#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tdel/counterexample.hpp"
#include "tdel/parallel.hpp"

namespace tdel {

struct PointSet {
  std::vector<ChartPoint> points;
  double epsilon = 0.0;
  std::vector<std::size_t> fixed_indices;
  std::uint64_t seed = 0;
  bool density_certified = false;
  bool separation_certified = false;
};

/// Open geodesic ball that must stay free of net points.
struct ExclusionZone {
  ChartPoint centre{};
  double radius = 0.0;
};

struct NetOptions {
  /// Candidate pool size is pool_factor * (L / eps)^3.
  double pool_factor = 64.0;
  /// Zones are enlarged by this fraction of eps while generating, so the
  /// circumballs stay empty with a little slack.
  double exclusion_margin = 1e-3;
  /// Certification grid spacing as a fraction of eps (at most 1/4).
  double grid_fraction = 0.25;
  int max_repair_rounds = 16;
  /// Candidates placed on each enlarged zone boundary.
  int shell_points = 2048;
  Execution execution = Execution::Parallel;
};

struct NetStats {
  std::size_t pool_size = 0;
  std::size_t shell_candidates = 0;
  std::size_t greedy_insertions = 0;
  std::size_t zone_covers = 0;
  std::size_t repair_insertions = 0;
  int repair_rounds = 0;
  /// Wall-clock split between the greedy pass and certification/repair.
  double greedy_seconds = 0.0;
  double certify_seconds = 0.0;
};

struct NetVerification {
  bool density = false;
  bool separation = false;
  bool zones_empty = true;
  /// Probes whose distance to the net is at least eps, or cells that could
  /// not be resolved at the finest subdivision level.
  std::vector<ChartPoint> density_witnesses;
  std::vector<std::pair<std::size_t, std::size_t>> separation_witnesses;
  std::vector<std::size_t> zone_witnesses;
  std::size_t probes = 0;
  std::size_t exact_solves = 0;
  int deepest_level = 0;
};

std::vector<ExclusionZone> exclusion_zones(const Configuration& conf);

/// Greedy farthest-point eps-net seeded with `fixed`, avoiding the zones.
/// Repairs against verify_net until it certifies. Throws CoverageImpossible
/// when a density witness cannot be covered.
PointSet generate_net(const MetricField& field, std::span<const ChartPoint> fixed,
                      std::span<const ExclusionZone> zones, double epsilon, std::uint64_t seed,
                      const NetOptions& options = {}, NetStats* stats = nullptr);

/// Net around the counterexample: u, v, w, p fixed, both circumballs excluded.
PointSet generate_net(const MetricField& field, const Configuration& conf, double epsilon,
                      std::uint64_t seed, const NetOptions& options = {}, NetStats* stats = nullptr);

/// Separation over all pairs within chart distance stretch_bound() * eps,
/// density on a grid of the given spacing refined adaptively with the
/// Lipschitz margin, and emptiness of the zones (fixed points may lie on
/// a zone boundary).
NetVerification verify_net(const MetricField& field, const PointSet& net, double grid_spacing,
                           std::span<const ExclusionZone> zones = {},
                           Execution execution = Execution::Parallel);

/// Index of the net point nearest to q (exact metric distance) among those
/// within chart distance `radius`, or -1.
std::ptrdiff_t nearest_point(const MetricField& field, const PointSet& net, const ChartPoint& q,
                             double radius, double* distance = nullptr);

}  // namespace tdel
