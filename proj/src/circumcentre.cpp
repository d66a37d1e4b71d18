#include "tdel/circumcentre.hpp"

#include <cmath>

namespace tdel {

namespace {

struct Evaluation {
  Vec3 value{};
  Mat3 jacobian{};
  double radius = 0.0;
  bool ok = false;
};

Evaluation evaluate(const MetricField& field, const Tetra& tet, const ChartPoint& q,
                    const ShootingOptions& shooting, std::array<Shot, 4>& warm) {
  Evaluation e;
  std::array<Shot, 4> shots;
  for (int k = 0; k < 4; ++k) {
    shots[k] = try_shoot(field, q, tet[k], shooting, warm[k].converged ? &warm[k] : nullptr);
    if (!shots[k].converged) shots[k] = try_shoot(field, q, tet[k], shooting, nullptr);
    if (!shots[k].converged) return e;
  }
  warm = shots;
  for (int k = 0; k < 3; ++k) {
    e.value[k] = shots[k].length - shots[3].length;
    for (int c = 0; c < 3; ++c) e.jacobian[k][c] = shots[k].grad_start[c] - shots[3].grad_start[c];
  }
  e.radius = 0.25 * (shots[0].length + shots[1].length + shots[2].length + shots[3].length);
  e.ok = true;
  return e;
}

}  // namespace

Vec3 circumcentre_map(const MetricField& field, const Tetra& tet, const ChartPoint& q,
                      const ShootingOptions& shooting) {
  const double ref = shoot(field, q, tet[3], shooting).length;
  return {shoot(field, q, tet[0], shooting).length - ref, shoot(field, q, tet[1], shooting).length - ref,
          shoot(field, q, tet[2], shooting).length - ref};
}

std::optional<CircumcentreRoot> newton_circumcentre(const MetricField& field, const Tetra& tet,
                                                    const ChartPoint& seed, const NewtonOptions& options) {
  std::array<Shot, 4> warm{};
  ChartPoint q = seed;
  Evaluation cur = evaluate(field, tet, q, options.shooting, warm);
  if (!cur.ok) return std::nullopt;
  const double tol = options.residual_tol * options.scale;
  bool polished = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    const double res = norm(cur.value);
    if (options.max_radius > 0.0 && cur.radius > options.max_radius * options.scale) return std::nullopt;
    if (res <= tol && polished) {
      return CircumcentreRoot{q, cur.radius, res, it};
    }
    Vec3 step;
    if (!solve3(cur.jacobian, -cur.value, step, 1e-12)) return std::nullopt;
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 10; ++ls) {
      const ChartPoint trial = q + alpha * step;
      if (norm(trial - seed) > options.max_excursion * options.scale) {
        alpha *= 0.5;
        continue;
      }
      std::array<Shot, 4> trial_warm = warm;
      Evaluation next = evaluate(field, tet, trial, options.shooting, trial_warm);
      if (next.ok && (norm(next.value) <= (1.0 - 1e-4 * alpha) * res || res <= tol)) {
        q = trial;
        cur = next;
        warm = trial_warm;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (res <= tol) return CircumcentreRoot{q, cur.radius, res, it};
      return std::nullopt;
    }
    if (res <= tol || norm(alpha * step) <= 1e-15 * options.scale) polished = true;
  }
  if (norm(cur.value) <= tol) return CircumcentreRoot{q, cur.radius, norm(cur.value), options.max_iterations};
  return std::nullopt;
}

std::optional<ChartPoint> frozen_metric_circumcentre(const MetricField& field, const Tetra& tet) {
  const double ybar = 0.25 * (tet[0].y + tet[1].y + tet[2].y + tet[3].y);
  const double s = std::sqrt(field.zz(ybar));
  // Scale z so the frozen metric is Euclidean, then the usual linear system.
  auto scaled = [s](const ChartPoint& p) { return Vec3{p.x, p.y, p.z * s}; };
  const Vec3 p0 = scaled(tet[0]);
  Mat3 m{};
  Vec3 rhs{};
  double edge2 = 0.0;
  for (int k = 1; k < 4; ++k) {
    const Vec3 d = scaled(tet[k]) - p0;
    for (int c = 0; c < 3; ++c) m[k - 1][c] = 2.0 * d[c];
    rhs[k - 1] = dot(d, d);
    edge2 = std::max(edge2, dot(d, d));
  }
  Vec3 rel;
  if (!solve3(m, rhs, rel, 1e-9 * std::sqrt(edge2))) return std::nullopt;
  const Vec3 c = p0 + rel;
  return ChartPoint{c.x, c.y, c.z / s};
}

}  // namespace tdel
