#pragma once

#include "tdel/vec3.hpp"

namespace tdel {

/// Cubic torus R^3 / (L Z)^3 with a single chart. The fundamental domain is
/// [-L/2, L/2) on every axis.
class TorusChart {
 public:
  static constexpr int dimension = 3;

  /// `injectivity_floor` defaults to L/4 when not positive.
  explicit TorusChart(double period = 2.0, double injectivity_floor = 0.0);

  double period() const noexcept { return period_; }
  double injectivity_floor() const noexcept { return injectivity_floor_; }

  double wrap(double c) const noexcept;
  ChartPoint canonicalize(const ChartPoint& q) const noexcept;
  /// Shortest lattice representative of a displacement.
  Vec3 min_image(const Vec3& d) const noexcept;
  /// Lift of `target` closest (chart-Euclidean) to `anchor`.
  ChartPoint lift_near(const ChartPoint& anchor, const ChartPoint& target) const noexcept {
    return anchor + min_image(target - anchor);
  }
  /// Equality modulo the period lattice, up to `tol` per axis.
  bool same_point(const ChartPoint& a, const ChartPoint& b, double tol = 0.0) const noexcept;

 private:
  double period_;
  double injectivity_floor_;
};

/// f(y) = A (1 + cos(pi y)); even, period 2, unique maximum 2A at y = 0.
class BumpFunction {
 public:
  static constexpr double max_amplitude = 0.375;

  explicit BumpFunction(double amplitude = 0.0);

  double amplitude() const noexcept { return amplitude_; }
  double value(double y) const noexcept;
  double derivative(double y) const noexcept;
  double second_derivative(double y) const noexcept;
  /// Min and max of f over [lo, hi].
  double min_on(double lo, double hi) const noexcept;
  double max_on(double lo, double hi) const noexcept;

 private:
  double amplitude_;
};

/// g(q) = diag(1, 1, 1 + f(y(q))).
class MetricField {
 public:
  MetricField() = default;
  MetricField(TorusChart chart, BumpFunction bump);
  MetricField(double period, double amplitude)
      : MetricField(TorusChart(period), BumpFunction(amplitude)) {}

  const TorusChart& chart() const noexcept { return chart_; }
  const BumpFunction& bump() const noexcept { return bump_; }
  double amplitude() const noexcept { return bump_.amplitude(); }

  /// The zz entry 1 + f(y).
  double zz(double y) const noexcept { return 1.0 + bump_.value(y); }
  /// sqrt(1 + 2A): bound on the ratio of metric to chart-Euclidean length.
  double stretch_bound() const noexcept;

 private:
  TorusChart chart_{};
  BumpFunction bump_{};
};

Mat3 metric_at(const MetricField& field, const ChartPoint& q);

/// Metric length of the chart segment q1 -> q2 (the given lift, no
/// wraparound), adaptive Gauss-Kronrod to relative tolerance 1e-10.
double straight_line_length(const MetricField& field, const ChartPoint& q1, const ChartPoint& q2);

/// Same integral with a fixed 8-point Gauss-Legendre rule; smooth in the
/// endpoints and accurate to roundoff for segments shorter than ~0.3.
double segment_length_fixed(const MetricField& field, const ChartPoint& q1, const ChartPoint& q2);

/// Fixed-rule length plus its gradients with respect to both endpoints.
double segment_length_fixed(const MetricField& field, const ChartPoint& q1, const ChartPoint& q2,
                            Vec3& grad_q1, Vec3& grad_q2);

/// Certified lower bound on the geodesic distance between two lifts given a
/// known upper bound: the minimizer stays inside the ellipsoid with foci
/// q1, q2 and major axis `upper`, so the zz entry is bounded below by the
/// minimum of 1 + f over its y-extent.
double distance_lower_bound(const MetricField& field, const ChartPoint& q1, const ChartPoint& q2,
                            double upper);

}  // namespace tdel
