#include "tdel/chart.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tdel/error.hpp"

namespace tdel {

namespace {

constexpr double pi = std::numbers::pi;

// 8-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 8> gl_nodes = {
    0.019855071751231856, 0.10166676129318664, 0.23723379504183550, 0.40828267875217510,
    0.59171732124782490,  0.76276620495816450, 0.89833323870681336, 0.98014492824876814};
constexpr std::array<double, 8> gl_weights = {
    0.050614268145188130, 0.11119051722668724, 0.15685332293894364, 0.18134189168918100,
    0.18134189168918100,  0.15685332293894364, 0.11119051722668724, 0.050614268145188130};

}  // namespace

TorusChart::TorusChart(double period, double injectivity_floor)
    : period_(period), injectivity_floor_(injectivity_floor > 0.0 ? injectivity_floor : period / 4.0) {
  if (!(period_ > 0.0) || !std::isfinite(period_))
    throw Error(ErrorKind::InvalidArgument, "torus period must be positive");
  if (injectivity_floor_ > period_ / 2.0)
    throw Error(ErrorKind::InvalidArgument, "injectivity floor exceeds L/2");
}

double TorusChart::wrap(double c) const noexcept {
  const double half = period_ / 2.0;
  double r = c - period_ * std::floor((c + half) / period_);
  if (r >= half) r -= period_;
  if (r < -half) r += period_;
  return r;
}

ChartPoint TorusChart::canonicalize(const ChartPoint& q) const noexcept {
  return {wrap(q.x), wrap(q.y), wrap(q.z)};
}

Vec3 TorusChart::min_image(const Vec3& d) const noexcept { return canonicalize(d); }

bool TorusChart::same_point(const ChartPoint& a, const ChartPoint& b, double tol) const noexcept {
  const Vec3 d = min_image(b - a);
  return std::abs(d.x) <= tol && std::abs(d.y) <= tol && std::abs(d.z) <= tol;
}

BumpFunction::BumpFunction(double amplitude) : amplitude_(amplitude) {
  if (!(amplitude_ >= 0.0) || amplitude_ > max_amplitude)
    throw Error(ErrorKind::InvalidArgument,
                "bump amplitude must lie in [0, 3/8], got " + std::to_string(amplitude));
}

double BumpFunction::value(double y) const noexcept { return amplitude_ * (1.0 + std::cos(pi * y)); }

double BumpFunction::derivative(double y) const noexcept { return -amplitude_ * pi * std::sin(pi * y); }

double BumpFunction::second_derivative(double y) const noexcept {
  return -amplitude_ * pi * pi * std::cos(pi * y);
}

double BumpFunction::min_on(double lo, double hi) const noexcept {
  // cos(pi y) reaches -1 at odd integers.
  const double k = std::ceil((lo - 1.0) / 2.0);
  if (2.0 * k + 1.0 <= hi) return 0.0;
  return std::min(value(lo), value(hi));
}

double BumpFunction::max_on(double lo, double hi) const noexcept {
  const double k = std::ceil(lo / 2.0);
  if (2.0 * k <= hi) return 2.0 * amplitude_;
  return std::max(value(lo), value(hi));
}

MetricField::MetricField(TorusChart chart, BumpFunction bump) : chart_(chart), bump_(bump) {
  // f has period 2; the torus must be a whole number of periods.
  const double periods = chart_.period() / 2.0;
  if (std::abs(periods - std::round(periods)) > 1e-12 || periods < 1.0 - 1e-12)
    throw Error(ErrorKind::InvalidArgument, "torus period must be a positive multiple of 2");
}

double MetricField::stretch_bound() const noexcept { return std::sqrt(1.0 + 2.0 * amplitude()); }

Mat3 metric_at(const MetricField& field, const ChartPoint& q) {
  Mat3 g{};
  g[0][0] = 1.0;
  g[1][1] = 1.0;
  g[2][2] = field.zz(q.y);
  return g;
}

double straight_line_length(const MetricField& field, const ChartPoint& q1, const ChartPoint& q2) {
  const Vec3 v = q2 - q1;
  const double planar = v.x * v.x + v.y * v.y;
  const double vz2 = v.z * v.z;
  if (vz2 == 0.0 || field.amplitude() == 0.0) return norm(v);
  auto integrand = [&](double t) { return std::sqrt(planar + field.zz(q1.y + t * v.y) * vz2); };
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 15>::integrate(integrand, 0.0, 1.0, 15, 1e-10);
}

double segment_length_fixed(const MetricField& field, const ChartPoint& q1, const ChartPoint& q2) {
  const Vec3 v = q2 - q1;
  const double planar = v.x * v.x + v.y * v.y;
  const double vz2 = v.z * v.z;
  if (vz2 == 0.0 || field.amplitude() == 0.0) return norm(v);
  double acc = 0.0;
  for (std::size_t i = 0; i < gl_nodes.size(); ++i)
    acc += gl_weights[i] * std::sqrt(planar + field.zz(q1.y + gl_nodes[i] * v.y) * vz2);
  return acc;
}

double segment_length_fixed(const MetricField& field, const ChartPoint& q1, const ChartPoint& q2,
                            Vec3& grad_q1, Vec3& grad_q2) {
  const Vec3 v = q2 - q1;
  const double planar = v.x * v.x + v.y * v.y;
  const double vz2 = v.z * v.z;
  grad_q1 = {};
  grad_q2 = {};
  double acc = 0.0;
  for (std::size_t i = 0; i < gl_nodes.size(); ++i) {
    const double t = gl_nodes[i];
    const double y = q1.y + t * v.y;
    const double g = field.zz(y);
    const double phi = std::sqrt(planar + g * vz2);
    acc += gl_weights[i] * phi;
    if (phi == 0.0) continue;
    const double w = gl_weights[i] / phi;
    const double fp = field.bump().derivative(y) * vz2;
    // d(phi^2)/2 with respect to the end and start points.
    grad_q2 += w * Vec3{v.x, v.y + 0.5 * t * fp, g * v.z};
    grad_q1 += w * Vec3{-v.x, -v.y + 0.5 * (1.0 - t) * fp, -g * v.z};
  }
  return acc;
}

double distance_lower_bound(const MetricField& field, const ChartPoint& q1, const ChartPoint& q2,
                            double upper) {
  const Vec3 v = q2 - q1;
  const double e = norm(v);
  if (field.amplitude() == 0.0 || v.z == 0.0) return e;
  const double alpha = 0.5 * std::max(upper, e);
  const double beta2 = std::max(alpha * alpha - 0.25 * e * e, 0.0);
  const double ny2 = e > 0.0 ? (v.y * v.y) / (e * e) : 1.0;
  const double half = std::sqrt(alpha * alpha * ny2 + beta2 * (1.0 - ny2));
  const double yc = 0.5 * (q1.y + q2.y);
  const double fmin = field.bump().min_on(yc - half, yc + half);
  return std::sqrt(v.x * v.x + v.y * v.y + (1.0 + fmin) * v.z * v.z);
}

}  // namespace tdel
