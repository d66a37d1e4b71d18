#include "tdel/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tdel/error.hpp"
#include "tdel/spatial.hpp"

namespace tdel {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Lifts of the tetrahedron's vertices around its first vertex.
Tetra lift_tetra(const MetricField& field, const PointSet& net, const Simplex& tet) {
  const auto& chart = field.chart();
  const ChartPoint anchor = net.points[tet[0]];
  Tetra t{};
  for (int k = 0; k < 4; ++k) t[k] = chart.lift_near(anchor, net.points[tet[k]]);
  return t;
}

// Frozen-metric geometry used to seed Newton and to skip hopeless candidates.
struct SeedPlan {
  std::vector<ChartPoint> seeds;
  bool plausible = false;
  /// The frozen metric has a circumcentre with radius below eps, so a
  /// root is expected near the first seed.
  bool root_expected = false;
};

class SeedPlanner {
 public:
  SeedPlanner(const MetricField& field, const PointSet& net, const PeriodicGrid& grid,
              const DelaunayOptions& options)
      : field_(field), net_(net), grid_(grid), options_(options) {}

  SeedPlan plan(const Simplex& tet, const Tetra& lifts) const {
    const double eps = net_.epsilon;
    const double ybar = 0.25 * (lifts[0].y + lifts[1].y + lifts[2].y + lifts[3].y);
    const double s = std::sqrt(field_.zz(ybar));
    auto scaled = [s](const Vec3& p) { return Vec3{p.x, p.y, p.z * s}; };
    auto unscaled = [s](const Vec3& p) { return Vec3{p.x, p.y, p.z / s}; };

    SeedPlan out;
    std::vector<std::pair<ChartPoint, double>> guesses;
    bool flat = true;
    if (auto c = frozen_metric_circumcentre(field_, lifts)) {
      const double r = norm(scaled(*c - lifts[0]));
      guesses.push_back({*c, r});
      flat = r > 0.8 * eps;
      out.root_expected = r < eps;
    }
    if (flat) {
      std::array<Vec3, 4> p{};
      for (int k = 0; k < 4; ++k) p[k] = scaled(lifts[k]);
      const std::array<std::array<int, 4>, 3> pairings{{{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}}};
      Vec3 n{};
      for (const auto& pr : pairings) {
        const Vec3 c = cross(p[pr[1]] - p[pr[0]], p[pr[3]] - p[pr[2]]);
        if (norm(c) > norm(n)) n = c;
      }
      if (norm(n) > 0.0) {
        n = n / norm(n);
        const Vec3 g = 0.25 * (p[0] + p[1] + p[2] + p[3]);
        Vec3 e1 = p[0] - g;
        e1 -= dot(e1, n) * n;
        if (norm(e1) > 0.0) {
          e1 = e1 / norm(e1);
          const Vec3 e2 = cross(n, e1);
          // Least-squares circle x^2 + y^2 = 2 a x + 2 b y + k in the plane.
          Mat3 m{};
          Vec3 rhs{};
          for (int k = 0; k < 4; ++k) {
            const double x = dot(p[k] - g, e1), y = dot(p[k] - g, e2);
            const double row[3] = {2 * x, 2 * y, 1.0};
            for (int a = 0; a < 3; ++a) {
              for (int b = 0; b < 3; ++b) m[a][b] += row[a] * row[b];
              rhs[a] += row[a] * (x * x + y * y);
            }
          }
          Vec3 sol;
          if (solve3(m, rhs, sol, 1e-14)) {
            const double rho2 = sol[2] + sol[0] * sol[0] + sol[1] * sol[1];
            if (rho2 > 0.0) {
              const double rho = std::sqrt(rho2);
              const Vec3 centre = g + sol[0] * e1 + sol[1] * e2;
              for (double h : {0.2, 0.5})
                for (double sign : {1.0, -1.0}) {
                  const Vec3 q = centre + sign * h * rho * n;
                  guesses.push_back({unscaled(q), rho * std::sqrt(1.0 + h * h)});
                }
            }
          }
        }
      }
    }

    for (const auto& [q, r] : guesses) {
      out.seeds.push_back(q);
      if (!out.plausible && r < 1.1 * eps && frozen_ball_empty(tet, q, options_.prefilter_shrink * r, s))
        out.plausible = true;
    }
    return out;
  }

 private:
  bool frozen_ball_empty(const Simplex& tet, const ChartPoint& q, double radius, double s) const {
    const auto& chart = field_.chart();
    bool empty = true;
    grid_.for_each_near(q, radius, [&](std::uint32_t id) {
      if (!empty || std::find(tet.begin(), tet.end(), id) != tet.end()) return;
      Vec3 d = chart.min_image(net_.points[id] - q);
      d.z *= s;
      if (norm(d) < radius) empty = false;
    });
    return empty;
  }

  const MetricField& field_;
  const PointSet& net_;
  const PeriodicGrid& grid_;
  const DelaunayOptions& options_;
};

PeriodicGrid build_grid(const MetricField& field, const PointSet& net) {
  PeriodicGrid grid(field.chart(), net.epsilon);
  for (std::size_t i = 0; i < net.points.size(); ++i)
    grid.insert(static_cast<std::uint32_t>(i), field.chart().canonicalize(net.points[i]));
  return grid;
}

// No net point other than the tetrahedron's own vertices is closer than
// `radius` to the centre.
bool ball_empty(const MetricField& field, const PointSet& net, const PeriodicGrid& grid, const Simplex& tet,
                const ChartPoint& centre, double radius, const ShootingOptions& shooting) {
  const auto& chart = field.chart();
  bool empty = true;
  grid.for_each_near(centre, radius, [&](std::uint32_t id) {
    if (!empty || std::binary_search(tet.begin(), tet.end(), static_cast<std::size_t>(id))) return;
    const ChartPoint lift = chart.lift_near(centre, net.points[id]);
    if (norm(lift - centre) >= radius) return;
    const double ub = segment_upper_bound(field, centre, lift);
    if (ub < radius) {
      empty = false;
      return;
    }
    if (distance_lower_bound(field, centre, lift, ub) >= radius) return;
    if (std::min(shoot(field, centre, lift, shooting).length, ub) < radius) empty = false;
  });
  return empty;
}

VoronoiCertificate certify_with(const MetricField& field, const PointSet& net, const PeriodicGrid& grid,
                                const SeedPlanner& planner, const Simplex& tet, const DelaunayOptions& options,
                                bool* plausible, bool* exhausted) {
  const double eps = net.epsilon;
  VoronoiCertificate cert;
  cert.simplex = tet;
  const Tetra lifts = lift_tetra(field, net, tet);
  const SeedPlan plan = planner.plan(tet, lifts);
  if (plausible) *plausible = plan.plausible;
  if (exhausted) *exhausted = false;
  if (!plan.plausible) return cert;

  NewtonOptions newton = options.newton;
  newton.scale = eps;
  if (newton.max_radius == 0.0) newton.max_radius = 1.5;
  ShootingOptions fine = newton.shooting;
  fine.steps = std::max(64, fine.steps);

  bool any_root = false;
  for (const auto& seed : plan.seeds) {
    const auto root = newton_circumcentre(field, lifts, seed, newton);
    if (!root) continue;
    any_root = true;
    if (!(root->radius < eps)) continue;
    const ChartPoint c = root->centre;
    bool duplicate = false;
    for (const auto& known : cert.centres)
      if (norm(field.chart().min_image(known - c)) <= options.distinct_tol * eps) duplicate = true;
    if (duplicate) continue;
    if (!ball_empty(field, net, grid, tet, c, root->radius - options.empty_tol * eps, newton.shooting)) continue;
    // Post-hoc check with the finer integrator.
    double rmin = inf, rmax = -inf;
    for (const auto& v : lifts) {
      const double d = shoot(field, c, v, fine).length;
      rmin = std::min(rmin, d);
      rmax = std::max(rmax, d);
    }
    if (rmax - rmin > options.empty_tol * eps) continue;
    const double r = 0.5 * (rmin + rmax);
    if (!ball_empty(field, net, grid, tet, c, r - options.recheck_tol * eps, fine)) continue;
    cert.centres.push_back(field.chart().canonicalize(c));
    cert.radii.push_back(r);
  }
  if (exhausted) *exhausted = !any_root && plan.root_expected;
  // Order centres by coordinates so certificates do not depend on seed order.
  std::vector<std::size_t> order(cert.centres.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& p = cert.centres[a];
    const auto& q = cert.centres[b];
    return std::tie(p.y, p.x, p.z) < std::tie(q.y, q.x, q.z);
  });
  VoronoiCertificate sorted{tet, {}, {}};
  for (std::size_t i : order) {
    sorted.centres.push_back(cert.centres[i]);
    sorted.radii.push_back(cert.radii[i]);
  }
  return sorted;
}

struct CandidateResult {
  VoronoiCertificate cert;
  bool plausible = false;
  bool exhausted = false;
};

std::vector<CandidateResult> solve_candidates(const MetricField& field, const PointSet& net,
                                              const PeriodicGrid& grid, const std::vector<Simplex>& candidates,
                                              const DelaunayOptions& options) {
  const SeedPlanner planner(field, net, grid, options);
  std::vector<CandidateResult> results(candidates.size());
  for_each_index(options.execution, static_cast<std::ptrdiff_t>(candidates.size()), [&](std::ptrdiff_t i) {
    auto& r = results[i];
    r.cert = certify_with(field, net, grid, planner, candidates[i], options, &r.plausible, &r.exhausted);
  });
  return results;
}

void require_net(const PointSet& net) {
  if (!(net.epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "net has no epsilon");
}

}  // namespace

Simplex make_simplex(std::vector<std::size_t> vertices) {
  std::sort(vertices.begin(), vertices.end());
  if (vertices.empty() || vertices.size() > 4)
    throw Error(ErrorKind::InvalidArgument, "a simplex has 1 to 4 vertices");
  if (std::adjacent_find(vertices.begin(), vertices.end()) != vertices.end())
    throw Error(ErrorKind::InvalidArgument, "simplex vertices must be distinct");
  return vertices;
}

SimplicialComplex assemble_complex(std::vector<VoronoiCertificate> tetrahedra, std::vector<std::size_t> core) {
  SimplicialComplex out;
  std::sort(tetrahedra.begin(), tetrahedra.end(),
            [](const auto& a, const auto& b) { return a.simplex < b.simplex; });
  std::array<std::set<Simplex>, 4> faces;
  for (const auto& cert : tetrahedra) {
    const Simplex& t = cert.simplex;
    faces[3].insert(t);
    for (int mask = 1; mask < 15; ++mask) {
      Simplex f;
      for (int k = 0; k < 4; ++k)
        if (mask & (1 << k)) f.push_back(t[k]);
      faces[f.size() - 1].insert(f);
    }
    for (int skip = 0; skip < 4; ++skip) {
      Simplex tri;
      for (int k = 0; k < 4; ++k)
        if (k != skip) tri.push_back(t[k]);
      out.cofaces[tri].push_back(t);
    }
  }
  // Every region vertex has a Voronoi cell, so it is a vertex of the nerve.
  for (std::size_t v : core) faces[0].insert(Simplex{v});
  for (int d = 0; d < 4; ++d) out.simplices[d].assign(faces[d].begin(), faces[d].end());
  out.certificates = std::move(tetrahedra);
  std::sort(core.begin(), core.end());
  out.core = std::move(core);
  return out;
}

SimplicialComplex local_delaunay(const MetricField& field, const PointSet& net, const ChartPoint& region_centre,
                                 double region_radius, const DelaunayOptions& options) {
  require_net(net);
  const double eps = net.epsilon;
  if (!(region_radius > 0.0) || region_radius > 4.0 * eps * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidArgument, "region radius must lie in (0, 4 eps]");
  const auto& chart = field.chart();
  const PeriodicGrid grid = build_grid(field, net);

  std::vector<std::size_t> core;
  grid.for_each_near(region_centre, region_radius, [&](std::uint32_t id) {
    if (norm(chart.min_image(net.points[id] - region_centre)) <= region_radius) core.push_back(id);
  });
  std::sort(core.begin(), core.end());
  std::vector<char> in_core(net.points.size(), 0);
  for (std::size_t i : core) in_core[i] = 1;

  // Delaunay balls have radius < eps (density), so edges are shorter than
  // 2 eps in the metric and hence in the chart.
  const double reach = 2.0 * eps;
  std::set<Simplex> unique;
  for (std::size_t i : core) {
    const ChartPoint pi = net.points[i];
    std::vector<std::pair<std::size_t, ChartPoint>> nb;
    grid.for_each_near(pi, reach, [&](std::uint32_t id) {
      if (id == i) return;
      const ChartPoint lift = chart.lift_near(pi, net.points[id]);
      if (norm(lift - pi) < reach) nb.push_back({id, lift});
    });
    std::sort(nb.begin(), nb.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    auto owned = [&](std::size_t j) { return !(in_core[j] && j < i); };
    for (std::size_t a = 0; a < nb.size(); ++a) {
      if (!owned(nb[a].first)) continue;
      for (std::size_t b = a + 1; b < nb.size(); ++b) {
        if (!owned(nb[b].first) || norm(nb[a].second - nb[b].second) >= reach) continue;
        for (std::size_t c = b + 1; c < nb.size(); ++c) {
          if (!owned(nb[c].first) || norm(nb[a].second - nb[c].second) >= reach ||
              norm(nb[b].second - nb[c].second) >= reach)
            continue;
          unique.insert(make_simplex({i, nb[a].first, nb[b].first, nb[c].first}));
        }
      }
    }
  }
  const std::vector<Simplex> candidates(unique.begin(), unique.end());
  const auto results = solve_candidates(field, net, grid, candidates, options);

  std::vector<VoronoiCertificate> accepted;
  std::vector<Simplex> exhausted;
  std::size_t solved = 0;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    if (r.plausible) ++solved;
    if (r.plausible && r.exhausted) exhausted.push_back(candidates[k]);
    if (!r.cert.centres.empty()) accepted.push_back(r.cert);
  }
  SimplicialComplex out = assemble_complex(std::move(accepted), core);
  out.seed_exhausted = std::move(exhausted);
  out.candidates = candidates.size();
  out.solved_candidates = solved;
  return out;
}

std::vector<CensusEntry> coface_census(const SimplicialComplex& complex) {
  std::vector<CensusEntry> out;
  for (const auto& tri : complex.simplices[2]) {
    CensusEntry e;
    e.triangle = tri;
    const auto it = complex.cofaces.find(tri);
    e.count = it == complex.cofaces.end() ? 0 : static_cast<int>(it->second.size());
    e.determinate = !complex.core.empty() && std::all_of(tri.begin(), tri.end(), [&](std::size_t v) {
      return std::binary_search(complex.core.begin(), complex.core.end(), v);
    });
    out.push_back(std::move(e));
  }
  return out;
}

GenericityReport check_genericity(const MetricField& field, const PointSet& net,
                                  const std::vector<VoronoiCertificate>& certificates, double tol) {
  GenericityReport out;
  if (certificates.empty()) return out;
  require_net(net);
  const auto& chart = field.chart();
  const PeriodicGrid grid = build_grid(field, net);
  const double band = tol * net.epsilon;
  ShootingOptions fine;
  fine.steps = 64;
  for (const auto& cert : certificates) {
    for (std::size_t k = 0; k < cert.centres.size(); ++k) {
      const ChartPoint c = cert.centres[k];
      const double r = cert.radii[k];
      std::vector<std::size_t> on;
      grid.for_each_near(c, r + band, [&](std::uint32_t id) {
        const ChartPoint lift = chart.lift_near(c, net.points[id]);
        if (norm(lift - c) >= r + band) return;
        const double ub = segment_upper_bound(field, c, lift);
        if (ub <= r - band) return;
        if (distance_lower_bound(field, c, lift, ub) >= r + band) return;
        const double d = std::min(shoot(field, c, lift, fine).length, ub);
        if (std::abs(d - r) < band) on.push_back(id);
      });
      if (on.size() >= 5) {
        std::sort(on.begin(), on.end());
        out.generic = false;
        out.violations.push_back({c, r, std::move(on)});
      }
    }
  }
  return out;
}

VoronoiCertificate certify_tetrahedron(const MetricField& field, const PointSet& net, const Simplex& tet,
                                       const DelaunayOptions& options, bool* seed_exhausted) {
  require_net(net);
  const Simplex t = make_simplex(tet);
  if (t.size() != 4) throw Error(ErrorKind::InvalidArgument, "expected a tetrahedron");
  const PeriodicGrid grid = build_grid(field, net);
  const SeedPlanner planner(field, net, grid, options);
  bool plausible = false, exhausted = false;
  auto cert = certify_with(field, net, grid, planner, t, options, &plausible, &exhausted);
  if (seed_exhausted) *seed_exhausted = plausible && exhausted;
  return cert;
}

std::vector<VoronoiCertificate> triangle_cofaces(const MetricField& field, const PointSet& net,
                                                 const Simplex& triangle, const DelaunayOptions& options) {
  require_net(net);
  const Simplex tri = make_simplex(triangle);
  if (tri.size() != 3) throw Error(ErrorKind::InvalidArgument, "expected a triangle");
  const auto& chart = field.chart();
  const double reach = 2.0 * net.epsilon;
  const PeriodicGrid grid = build_grid(field, net);
  const ChartPoint anchor = net.points[tri[0]];
  std::array<ChartPoint, 3> t{};
  for (int k = 0; k < 3; ++k) t[k] = chart.lift_near(anchor, net.points[tri[k]]);
  std::vector<Simplex> candidates;
  grid.for_each_near(anchor, reach, [&](std::uint32_t id) {
    if (std::binary_search(tri.begin(), tri.end(), static_cast<std::size_t>(id))) return;
    const ChartPoint lift = chart.lift_near(anchor, net.points[id]);
    for (const auto& v : t)
      if (norm(lift - v) >= reach) return;
    candidates.push_back(make_simplex({tri[0], tri[1], tri[2], id}));
  });
  std::sort(candidates.begin(), candidates.end());
  const auto results = solve_candidates(field, net, grid, candidates, options);
  std::vector<VoronoiCertificate> out;
  for (const auto& r : results)
    if (!r.cert.centres.empty()) out.push_back(r.cert);
  return out;
}

DefectReport detect_defect(const MetricField& field, const PointSet& net, const DelaunayOptions& options,
                           double region_radius_factor, double genericity_tol) {
  require_net(net);
  DefectReport out;
  out.complex = local_delaunay(field, net, ChartPoint{}, region_radius_factor * net.epsilon, options);
  out.census = coface_census(out.complex);
  for (const auto& e : out.census)
    if (e.determinate && e.count != 2) out.bad_triangles.push_back({e.triangle, e.count});
  out.genericity = check_genericity(field, net, out.complex.certificates, genericity_tol);
  out.generic = out.genericity.generic;

  Simplex sigma;
  if (net.fixed_indices.size() == 4) sigma = make_simplex(net.fixed_indices);
  for (const auto& cert : out.complex.certificates) {
    if (cert.centres.size() < 2) continue;
    if (!out.witness || cert.simplex == sigma) out.witness = cert;
    if (cert.simplex == sigma) break;
  }
  return out;
}

}  // namespace tdel
