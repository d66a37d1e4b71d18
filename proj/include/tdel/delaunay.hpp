#pragma once

#include <map>
#include <optional>
#include <vector>

#include "tdel/sampling.hpp"

namespace tdel {

/// Sorted, distinct vertex indices into a PointSet.
using Simplex = std::vector<std::size_t>;

/// Sorts and validates; throws InvalidArgument on repeated or too many indices.
Simplex make_simplex(std::vector<std::size_t> vertices);

struct VoronoiCertificate {
  Simplex simplex;
  std::vector<ChartPoint> centres;
  std::vector<double> radii;
};

struct DelaunayOptions {
  /// Empty-ball tolerance during enumeration, times eps.
  double empty_tol = 1e-8;
  /// Tolerance of the post-hoc re-verification, times eps.
  double recheck_tol = 1e-10;
  /// Centres closer than this (times eps) are the same Voronoi vertex.
  double distinct_tol = 1e-6;
  /// Frozen-metric prefilter: a candidate is solved when its frozen
  /// circumball shrunk by this factor is empty.
  double prefilter_shrink = 0.85;
  NewtonOptions newton{};
  Execution execution = Execution::Parallel;
};

struct SimplicialComplex {
  /// simplices[d] holds the d-simplices, sorted.
  std::array<std::vector<Simplex>, 4> simplices;
  /// One per tetrahedron, in the order of simplices[3].
  std::vector<VoronoiCertificate> certificates;
  /// Triangle -> incident tetrahedra.
  std::map<Simplex, std::vector<Simplex>> cofaces;
  /// Vertices inside the extraction region; empty when there is no region.
  std::vector<std::size_t> core;
  /// Plausible candidates for which no seed produced a root.
  std::vector<Simplex> seed_exhausted;
  std::size_t candidates = 0;
  std::size_t solved_candidates = 0;
};

struct CensusEntry {
  Simplex triangle;
  int count = 0;
  /// False when part of the triangle lies outside the extraction region,
  /// so some cofaces may be missing.
  bool determinate = false;
};

struct GenericityViolation {
  ChartPoint centre{};
  double radius = 0.0;
  std::vector<std::size_t> on_sphere;
};

struct GenericityReport {
  bool generic = true;
  std::vector<GenericityViolation> violations;
};

struct DefectReport {
  /// Determinate triangles whose coface count is not 2.
  std::vector<std::pair<Simplex, int>> bad_triangles;
  std::optional<VoronoiCertificate> witness;
  bool generic = false;
  GenericityReport genericity;
  SimplicialComplex complex;
  std::vector<CensusEntry> census;
};

/// Delaunay tetrahedra with at least one vertex within chart distance
/// `region_radius` of `region_centre`, each with its distinct empty-ball
/// centres, and their downward closure.
SimplicialComplex local_delaunay(const MetricField& field, const PointSet& net, const ChartPoint& region_centre,
                                 double region_radius, const DelaunayOptions& options = {});

/// Downward closure and coface map of a set of certified tetrahedra.
SimplicialComplex assemble_complex(std::vector<VoronoiCertificate> tetrahedra, std::vector<std::size_t> core = {});

std::vector<CensusEntry> coface_census(const SimplicialComplex& complex);

GenericityReport check_genericity(const MetricField& field, const PointSet& net,
                                  const std::vector<VoronoiCertificate>& certificates, double tol);

/// Delaunay tetrahedra containing `triangle`, found among all fourth
/// vertices within chart distance 2 eps of the triangle.
std::vector<VoronoiCertificate> triangle_cofaces(const MetricField& field, const PointSet& net,
                                                 const Simplex& triangle, const DelaunayOptions& options = {});

/// Certified empty-ball centres of one tetrahedron (possibly none).
VoronoiCertificate certify_tetrahedron(const MetricField& field, const PointSet& net, const Simplex& tet,
                                       const DelaunayOptions& options = {}, bool* seed_exhausted = nullptr);

/// local_delaunay around the origin with radius 3 eps, census and
/// genericity at tol 1e-7. The witness is a tetrahedron with at least two
/// distinct centres (sigma when it is present).
DefectReport detect_defect(const MetricField& field, const PointSet& net, const DelaunayOptions& options = {},
                           double region_radius_factor = 3.0, double genericity_tol = 1e-7);

}  // namespace tdel
