#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "tdel/error.hpp"
#include "tdel/geodesic.hpp"

namespace tdel {

namespace {

struct Coefficients {
  double F;   // f' / (2 (1+f)^2): y'' = P^2 F
  double dF;  // dF/dy
  double G;   // 1 / (1+f):         z' = P G
  double dG;  // dG/dy
};

Coefficients coefficients(const BumpFunction& bump, double y) {
  const double a = bump.amplitude();
  const double arg = std::numbers::pi * y;
  const double c = std::cos(arg);
  const double s = std::sin(arg);
  const double zz = 1.0 + a * (1.0 + c);
  const double fp = -a * std::numbers::pi * s;
  const double fpp = -a * std::numbers::pi * std::numbers::pi * c;
  const double inv = 1.0 / zz;
  const double inv2 = inv * inv;
  return {0.5 * fp * inv2, 0.5 * (fpp * inv2 - 2.0 * fp * fp * inv2 * inv), inv, -fp * inv2};
}

// y, w = y', z and their sensitivities to (eta, P).
using State = std::array<double, 9>;

State rhs(const BumpFunction& bump, double p, const State& s) {
  const Coefficients k = coefficients(bump, s[0]);
  const double p2 = p * p;
  return {s[1],
          p2 * k.F,
          p * k.G,
          s[4],
          p2 * k.dF * s[3],
          p * k.dG * s[3],
          s[7],
          p2 * k.dF * s[6] + 2.0 * p * k.F,
          p * k.dG * s[6] + k.G};
}

State integrate(const BumpFunction& bump, double y0, double eta, double p, int steps) {
  State s{y0, eta, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    const State k1 = rhs(bump, p, s);
    State t;
    for (int j = 0; j < 9; ++j) t[j] = s[j] + 0.5 * h * k1[j];
    const State k2 = rhs(bump, p, t);
    for (int j = 0; j < 9; ++j) t[j] = s[j] + 0.5 * h * k2[j];
    const State k3 = rhs(bump, p, t);
    for (int j = 0; j < 9; ++j) t[j] = s[j] + h * k3[j];
    const State k4 = rhs(bump, p, t);
    for (int j = 0; j < 9; ++j) s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return s;
}

Shot straight_shot(const Vec3& d) {
  Shot shot;
  shot.length = norm(d);
  shot.eta = d.y;
  shot.momentum = d.z;
  shot.converged = true;
  if (shot.length > 0.0) {
    shot.grad_end = d / shot.length;
    shot.grad_start = -shot.grad_end;
  }
  return shot;
}

}  // namespace

ShootingOptions shooting_options_for_tol(double tol) {
  ShootingOptions o;
  o.steps = tol >= 1e-6 ? 16 : (tol >= 1e-10 ? 32 : 64);
  return o;
}

Shot try_shoot(const MetricField& field, const ChartPoint& from, const ChartPoint& to,
               const ShootingOptions& options, const Shot* warm_start) noexcept {
  const Vec3 d = to - from;
  const BumpFunction& bump = field.bump();
  if (field.amplitude() == 0.0) return straight_shot(d);
  if (d.z == 0.0) {
    // P = 0 keeps y'' = 0: the chart segment is the geodesic.
    Shot shot = straight_shot(d);
    shot.momentum = 0.0;
    return shot;
  }

  double eta = d.y;
  double p = 0.0;
  if (warm_start != nullptr && warm_start->converged) {
    eta = warm_start->eta;
    p = warm_start->momentum;
  } else {
    // Momentum of the chart segment: dz = P * integral of 1/(1+f).
    constexpr std::array<double, 4> nodes = {0.069431844202973713, 0.33000947820757187,
                                             0.66999052179242813, 0.93056815579702629};
    constexpr std::array<double, 4> weights = {0.17392742256872693, 0.32607257743127307,
                                               0.32607257743127307, 0.17392742256872693};
    double inv = 0.0;
    for (int i = 0; i < 4; ++i) inv += weights[i] / field.zz(from.y + nodes[i] * d.y);
    p = d.z / inv;
  }

  const double scale = std::max(norm(d), 1e-300);
  Shot shot;
  bool close = false;
  double prev_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < options.max_iterations; ++it) {
    const State s = integrate(bump, from.y, eta, p, options.steps);
    const double ry = s[0] - to.y;
    const double rz = s[2] - d.z;
    const double res = std::hypot(ry, rz);
    shot.iterations = it + 1;
    if (!std::isfinite(res)) break;
    // One more step after the residual is small lands on roundoff.
    if (close && (res >= prev_res || res <= 1e-16 * scale)) {
      shot.converged = true;
      break;
    }
    if (res <= 1e-9 * scale) close = true;
    prev_res = res;
    const double j00 = s[3], j01 = s[6], j10 = s[5], j11 = s[8];
    const double det = j00 * j11 - j01 * j10;
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) break;
    const double de = -(j11 * ry - j01 * rz) / det;
    const double dp = -(-j10 * ry + j00 * rz) / det;
    double step = 1.0;
    if (!close) {
      // Damping far from the solution keeps the shot inside the chart.
      const double max_move = 0.5 * scale + std::abs(eta) + std::abs(p);
      const double move = std::abs(de) + std::abs(dp);
      if (move > max_move) step = max_move / move;
    }
    eta += step * de;
    p += step * dp;
    if (close && std::abs(de) + std::abs(dp) <= 1e-17 * (std::abs(eta) + std::abs(p) + scale)) {
      shot.converged = true;
      break;
    }
  }
  if (!shot.converged) return shot;

  const double zz0 = field.zz(from.y);
  const State s = integrate(bump, from.y, eta, p, options.steps);
  const double speed2 = d.x * d.x + eta * eta + p * p / zz0;
  shot.length = std::sqrt(speed2);
  shot.eta = eta;
  shot.momentum = p;
  if (shot.length > 0.0) {
    shot.grad_start = Vec3{-d.x, -eta, -p} / shot.length;
    shot.grad_end = Vec3{d.x, s[1], p} / shot.length;
  }
  return shot;
}

Shot shoot(const MetricField& field, const ChartPoint& from, const ChartPoint& to,
           const ShootingOptions& options, const Shot* warm_start) {
  Shot shot = try_shoot(field, from, to, options, warm_start);
  if (!shot.converged && warm_start != nullptr) shot = try_shoot(field, from, to, options, nullptr);
  if (!shot.converged) throw Error(ErrorKind::NotConverged, "geodesic shooting did not converge");
  return shot;
}

std::vector<ChartPoint> trace_shot(const MetricField& field, const ChartPoint& from, const ChartPoint& to,
                                   const Shot& shot, int samples) {
  samples = std::max(samples, 1);
  const Vec3 d = to - from;
  std::vector<ChartPoint> out;
  out.reserve(samples + 1);
  out.push_back(from);
  if (field.amplitude() == 0.0 || d.z == 0.0) {
    for (int i = 1; i <= samples; ++i) out.push_back(from + d * (static_cast<double>(i) / samples));
    out.back() = to;
    return out;
  }
  State s{from.y, shot.eta, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  const double h = 1.0 / samples;
  for (int i = 1; i <= samples; ++i) {
    s = [&] {
      State t = s;
      const State k1 = rhs(field.bump(), shot.momentum, t);
      State u;
      for (int j = 0; j < 9; ++j) u[j] = t[j] + 0.5 * h * k1[j];
      const State k2 = rhs(field.bump(), shot.momentum, u);
      for (int j = 0; j < 9; ++j) u[j] = t[j] + 0.5 * h * k2[j];
      const State k3 = rhs(field.bump(), shot.momentum, u);
      for (int j = 0; j < 9; ++j) u[j] = t[j] + h * k3[j];
      const State k4 = rhs(field.bump(), shot.momentum, u);
      for (int j = 0; j < 9; ++j) t[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      return t;
    }();
    out.push_back({from.x + d.x * (static_cast<double>(i) / samples), s[0], from.z + s[2]});
  }
  out.back() = to;
  return out;
}

std::vector<ChartPoint> candidate_lifts(const MetricField& field, const ChartPoint& q1,
                                        const ChartPoint& q2) {
  const TorusChart& chart = field.chart();
  const ChartPoint base = chart.lift_near(q1, q2);
  const double best = norm(base - q1);
  if (best > chart.injectivity_floor())
    throw Error(ErrorKind::BeyondInjectivityFloor,
                "points are farther apart than the injectivity floor");
  const double cutoff = field.stretch_bound() * best * (1.0 + 1e-12);
  const double L = chart.period();
  std::vector<ChartPoint> lifts{base};
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        const ChartPoint c = base + Vec3{i * L, j * L, k * L};
        if (norm(c - q1) <= cutoff) lifts.push_back(c);
      }
  return lifts;
}

DistanceResult geodesic_distance_shooting(const MetricField& field, const ChartPoint& q1,
                                          const ChartPoint& q2, double tol) {
  if (!(tol >= 1e-12)) throw Error(ErrorKind::InvalidArgument, "distance tolerance must be >= 1e-12");
  const ShootingOptions options = shooting_options_for_tol(tol);
  DistanceResult best;
  best.distance = std::numeric_limits<double>::infinity();
  best.lower_bound = std::numeric_limits<double>::infinity();
  best.upper_bound = std::numeric_limits<double>::infinity();
  ChartPoint best_lift{};
  Shot best_shot;
  for (const ChartPoint& lift : candidate_lifts(field, q1, q2)) {
    const Shot s = shoot(field, q1, lift, options);
    best.lower_bound = std::min(best.lower_bound, norm(lift - q1));
    best.upper_bound = std::min(best.upper_bound, straight_line_length(field, q1, lift));
    if (s.length < best.distance) {
      best.distance = s.length;
      best_lift = lift;
      best_shot = s;
    }
  }
  // The chart segment is admissible, so anything above it is quadrature roundoff.
  best.distance = std::min(best.distance, best.upper_bound);
  best.path.solver_tag = SolverTag::Shooting;
  best.path.converged = true;
  best.path.vertices = trace_shot(field, q1, best_lift, best_shot, options.steps);
  for (std::size_t i = 0; i + 1 < best.path.vertices.size(); ++i)
    best.path.length += straight_line_length(field, best.path.vertices[i], best.path.vertices[i + 1]);
  return best;
}

double metric_distance(const MetricField& field, const ChartPoint& a, const ChartPoint& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const ChartPoint& lift : candidate_lifts(field, a, b))
    best = std::min(best, shoot(field, a, lift).length);
  return best;
}

}  // namespace tdel
