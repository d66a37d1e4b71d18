#pragma once

// Independent reference computations shared by the tests. Nothing here calls
// into the solvers under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "tdel/vec3.hpp"

namespace oracle {

using tdel::Vec3;

inline double flat_torus_distance(const Vec3& a, const Vec3& b, double L) {
  // The lattice is orthogonal, so the shortest translate is chosen per axis.
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = -4; k <= 4; ++k) best = std::min(best, std::abs(b[c] - a[c] + k * L));
    sum += best * best;
  }
  return std::sqrt(sum);
}

/// Length of the straight segment a->b under diag(1, 1, 1 + A(1 + cos pi y))
/// by composite Simpson on many panels.
inline double simpson_segment_length(const Vec3& a, const Vec3& b, double A, int panels = 4000) {
  const Vec3 v = b - a;
  auto speed = [&](double t) {
    const double y = a.y + t * v.y;
    return std::sqrt(v.x * v.x + v.y * v.y + (1.0 + A * (1.0 + std::cos(M_PI * y))) * v.z * v.z);
  };
  const double h = 1.0 / panels;
  double s = speed(0.0) + speed(1.0);
  for (int i = 1; i < panels; ++i) s += speed(i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Closed-form length of the z-axis segment through y = 0, where 1 + f = 1 + 2A.
inline double z_axis_length(double dz, double A) { return std::abs(dz) * std::sqrt(1.0 + 2.0 * A); }

/// Euclidean circumcentre of four points (Cramer), or nullopt if flat.
inline std::optional<Vec3> euclidean_circumcentre(const std::array<Vec3, 4>& p) {
  double m[3][3], r[3];
  for (int k = 0; k < 3; ++k) {
    const Vec3 d = p[k + 1] - p[0];
    m[k][0] = 2.0 * d.x;
    m[k][1] = 2.0 * d.y;
    m[k][2] = 2.0 * d.z;
    r[k] = d.x * d.x + d.y * d.y + d.z * d.z;
  }
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  double scale = 0.0;
  for (auto& row : m)
    for (double e : row) scale = std::max(scale, std::abs(e));
  if (std::abs(det) < 1e-12 * scale * scale * scale) return std::nullopt;
  auto col = [&](int c) {
    double a[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a[i][j] = j == c ? r[i] : m[i][j];
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  return p[0] + Vec3{col(0) / det, col(1) / det, col(2) / det};
}

struct DelaunayOracle {
  /// Sorted index quadruples whose circumball is empty.
  std::vector<std::array<std::size_t, 4>> tetrahedra;
  std::size_t subnet = 0;
  /// Candidates with a fifth point within tol of the sphere.
  std::size_t degenerate = 0;
};

/// Brute-force Delaunay tetrahedra of a flat periodic point set having a
/// vertex within R of `centre`: every 4-subset of the points within R + 2 eps
/// of the centre, exact circumcentre, emptiness against all points.
inline DelaunayOracle periodic_delaunay_near(const std::vector<Vec3>& pts, double L, const Vec3& centre, double R,
                                             double eps, double tol = 1e-9) {
  DelaunayOracle out;
  auto lift = [&](const Vec3& q) {
    Vec3 d = q - centre;
    for (int c = 0; c < 3; ++c) d[c] -= L * std::round(d[c] / L);
    return centre + d;
  };
  std::vector<std::size_t> ids;
  std::vector<Vec3> lifted;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 q = lift(pts[i]);
    if (tdel::norm(q - centre) <= R + 2.0 * eps) {
      ids.push_back(i);
      lifted.push_back(q);
    }
  }
  out.subnet = ids.size();
  const std::size_t n = ids.size();
  auto close = [&](std::size_t a, std::size_t b) { return tdel::norm(lifted[a] - lifted[b]) < 2.0 * eps; };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      if (!close(a, b)) continue;
      for (std::size_t c = b + 1; c < n; ++c) {
        if (!close(a, c) || !close(b, c)) continue;
        for (std::size_t d = c + 1; d < n; ++d) {
          if (!close(a, d) || !close(b, d) || !close(c, d)) continue;
          const std::array<std::size_t, 4> q{a, b, c, d};
          bool near_core = false;
          for (std::size_t k : q) near_core = near_core || tdel::norm(lifted[k] - centre) <= R;
          if (!near_core) continue;
          const auto cc = euclidean_circumcentre({lifted[a], lifted[b], lifted[c], lifted[d]});
          if (!cc) continue;
          const double r = tdel::norm(lifted[a] - *cc);
          bool empty = true, on = false;
          auto test = [&](std::size_t idx, const Vec3& x) {
            if (idx == ids[a] || idx == ids[b] || idx == ids[c] || idx == ids[d]) return;
            const double dist = flat_torus_distance(x, *cc, L);
            if (dist < r - tol) empty = false;
            else if (dist < r + tol) on = true;
          };
          // A ball of radius below eps around a point within R + eps of
          // the centre lies inside the subnet region.
          if (r < eps)
            for (std::size_t k = 0; k < n && empty; ++k) test(ids[k], lifted[k]);
          else
            for (std::size_t k = 0; k < pts.size() && empty; ++k) test(k, pts[k]);
          if (!empty) continue;
          if (on) ++out.degenerate;
          std::array<std::size_t, 4> t{ids[a], ids[b], ids[c], ids[d]};
          std::sort(t.begin(), t.end());
          out.tetrahedra.push_back(t);
        }
      }
    }
  std::sort(out.tetrahedra.begin(), out.tetrahedra.end());
  return out;
}

inline Vec3 random_point(std::mt19937_64& rng, double L) {
  std::uniform_real_distribution<double> u(-L / 2.0, L / 2.0);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace oracle
