#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tdel/error.hpp"
#include "tdel/geodesic.hpp"

namespace tdel {

namespace {

constexpr int initial_segments = 8;
constexpr int max_segments = 4096;
constexpr int max_iterations_per_level = 4000;

struct EnergyEval {
  double energy = 0.0;
  double length = 0.0;
  std::vector<Vec3> gradient;  // interior vertices only
};

// E = n * sum of squared segment lengths. Minimizers have equal metric
// segment lengths and minimal total length.
EnergyEval evaluate(const MetricField& field, const std::vector<ChartPoint>& v, bool with_gradient) {
  const int n = static_cast<int>(v.size()) - 1;
  EnergyEval out;
  if (with_gradient) out.gradient.assign(n - 1, Vec3{});
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec3 ga, gb;
    const double l = with_gradient ? segment_length_fixed(field, v[i], v[i + 1], ga, gb)
                                   : segment_length_fixed(field, v[i], v[i + 1]);
    sum_sq += l * l;
    out.length += l;
    if (with_gradient) {
      if (i > 0) out.gradient[i - 1] += (2.0 * n * l) * ga;
      if (i + 1 < n) out.gradient[i] += (2.0 * n * l) * gb;
    }
  }
  out.energy = n * sum_sq;
  return out;
}

// Solves (2n * tridiag(-1, 2, -1)) x = rhs per coordinate: the Hessian of
// the Euclidean path energy, used as a preconditioner.
std::vector<Vec3> precondition(const std::vector<Vec3>& rhs, int n) {
  const std::size_t m = rhs.size();
  std::vector<Vec3> x(m);
  if (m == 0) return x;
  std::vector<double> c(m);
  std::vector<Vec3> d(m);
  const double s = 2.0 * n;
  double b = 2.0 * s;
  c[0] = -s / b;
  d[0] = rhs[0] / b;
  for (std::size_t i = 1; i < m; ++i) {
    b = 2.0 * s + s * c[i - 1];
    c[i] = -s / b;
    d[i] = (rhs[i] + s * d[i - 1]) / b;
  }
  x[m - 1] = d[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

// Preconditioned descent with Armijo backtracking. Returns false on stall.
bool descend(const MetricField& field, std::vector<ChartPoint>& v, double tol) {
  const int n = static_cast<int>(v.size()) - 1;
  if (n < 2) return true;
  EnergyEval cur = evaluate(field, v, true);
  for (int it = 0; it < max_iterations_per_level; ++it) {
    const std::vector<Vec3> dir = precondition(cur.gradient, n);
    double gmg = 0.0;
    for (std::size_t i = 0; i < dir.size(); ++i) gmg += dot(cur.gradient[i], dir[i]);
    if (std::sqrt(std::max(gmg, 0.0)) <= tol * cur.energy) return true;
    std::vector<ChartPoint> trial = v;
    if (0.5 * gmg < 1e-13 * cur.energy) {
      // Below energy roundoff the line search cannot discriminate; the
      // preconditioner is within the metric's stretch of the true Hessian,
      // so the full step still contracts the gradient.
      for (int i = 1; i < n; ++i) trial[i] = v[i] - dir[i - 1];
    } else {
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 40 && !accepted; ++ls) {
        for (int i = 1; i < n; ++i) trial[i] = v[i] - alpha * dir[i - 1];
        accepted = evaluate(field, trial, false).energy <= cur.energy - 1e-4 * alpha * gmg;
        alpha *= 0.5;
      }
      if (!accepted) return std::sqrt(gmg) <= 1e3 * tol * cur.energy;
    }
    v.swap(trial);
    cur = evaluate(field, v, true);
  }
  return false;
}

double polyline_length(const MetricField& field, const std::vector<ChartPoint>& v) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) acc += straight_line_length(field, v[i], v[i + 1]);
  return acc;
}

GeodesicPath minimize_path(const MetricField& field, const ChartPoint& a, const ChartPoint& b, double tol) {
  GeodesicPath path;
  path.solver_tag = SolverTag::PathEnergy;
  std::vector<ChartPoint>& v = path.vertices;
  v.resize(initial_segments + 1);
  for (int i = 0; i <= initial_segments; ++i)
    v[i] = a + (b - a) * (static_cast<double>(i) / initial_segments);
  v.back() = b;

  double previous = std::numeric_limits<double>::quiet_NaN();
  while (true) {
    if (!descend(field, v, tol))
      throw Error(ErrorKind::NotConverged, "path-energy descent stalled");
    const double length = polyline_length(field, v);
    if (std::isfinite(previous) && std::abs(previous - length) <= tol * length) {
      path.length = length;
      path.converged = true;
      return path;
    }
    previous = length;
    const int n = static_cast<int>(v.size()) - 1;
    if (2 * n > max_segments)
      throw Error(ErrorKind::NotConverged, "path-energy refinement exceeded the segment budget");
    std::vector<ChartPoint> refined;
    refined.reserve(2 * n + 1);
    for (int i = 0; i < n; ++i) {
      refined.push_back(v[i]);
      refined.push_back(0.5 * (v[i] + v[i + 1]));
    }
    refined.push_back(v.back());
    v.swap(refined);
  }
}

}  // namespace

DistanceResult geodesic_distance(const MetricField& field, const ChartPoint& q1, const ChartPoint& q2,
                                 double tol) {
  if (!(tol >= 1e-12)) throw Error(ErrorKind::InvalidArgument, "distance tolerance must be >= 1e-12");
  DistanceResult best;
  best.distance = std::numeric_limits<double>::infinity();
  best.lower_bound = std::numeric_limits<double>::infinity();
  best.upper_bound = std::numeric_limits<double>::infinity();
  for (const ChartPoint& lift : candidate_lifts(field, q1, q2)) {
    best.lower_bound = std::min(best.lower_bound, norm(lift - q1));
    best.upper_bound = std::min(best.upper_bound, straight_line_length(field, q1, lift));
    // At roundoff-level separations the segment is the geodesic to working
    // precision and the descent has nothing to resolve.
    if (norm(lift - q1) <= 1e-12 * field.chart().period()) {
      const double len = straight_line_length(field, q1, lift);
      if (len < best.distance) {
        best.distance = len;
        best.path = GeodesicPath{{q1, lift}, len, true, SolverTag::PathEnergy};
      }
      continue;
    }
    GeodesicPath path = minimize_path(field, q1, lift, tol);
    if (path.length < best.distance) {
      best.distance = path.length;
      best.path = std::move(path);
    }
  }
  // The chart segment is admissible, so anything above it is quadrature roundoff.
  best.distance = std::min(best.distance, best.upper_bound);
  return best;
}

}  // namespace tdel
