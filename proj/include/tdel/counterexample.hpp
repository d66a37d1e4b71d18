#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tdel/circumcentre.hpp"

namespace tdel {

/// Scalar parameters of the two-circumcentre tetrahedron.
struct CounterexampleConfig {
  MetricField field;
  double epsilon = 0.1;
  double a = 0.70710678118654752;  // a^2 = 1/2
  double xi0 = 0.0;
  double b_max = 0.0;
  /// Filled in once a b has been selected.
  double b = 0.0;
  double xi = 0.0;
  ShootingOptions shooting{};

  /// Validates epsilon against the chart and fills xi0, b_max.
  static CounterexampleConfig make(const MetricField& field, double epsilon);
};

/// u, v on the z axis at +-a eps; w, p on the x axis at +-a eps (1 + xi).
struct Configuration {
  ChartPoint u{}, v{}, w{}, p{};
  double xi = 0.0;
  std::optional<ChartPoint> c_plus;
  std::optional<ChartPoint> c_minus;
  double circumradius = 0.0;

  /// Vertex order (u, v, w, p); p is the reference vertex of h.
  Tetra sigma() const { return {u, v, w, p}; }
  bool solved() const { return c_plus.has_value() && c_minus.has_value(); }
};

struct XiScanRow {
  double b = 0.0;
  double xi_tilde = 0.0;
  double xi_tilde_prime = 0.0;
};

struct XiScan {
  std::vector<XiScanRow> rows;
  std::size_t star_index = 0;
  double b_star = 0.0;
  double xi_selected = 0.0;
  double slope_at_star = 0.0;
};

struct JacobianReport {
  /// Dh at c_plus in eps-scaled coordinates (q / eps), where the b-derivative
  /// formula for H_y applies directly. Chart-unit entries are these / eps.
  Mat3 dh{};
  double determinant = 0.0;
  double hy_analytic = 0.0;
  double hy_relative_error = 0.0;
  /// max of |row0 - mirrored row1| and |W_y|, |W_z| over scaled entries.
  double structure_error = 0.0;
  int sign_hz = 0;
  int sign_wx = 0;
  int sign_hy = 0;
};

struct StabilityReport {
  double rho = 0.0;
  int trials = 0;
  int successes = 0;
  std::vector<std::uint64_t> failures;
};

double critical_xi(const MetricField& field);

/// xi~(b) from the geodesic distance between u and (0, b eps, 0).
double xi_tilde(const CounterexampleConfig& cfg, double b);

/// `points` equally spaced values i * b_max / points, i = 1..points.
std::vector<double> uniform_b_grid(const CounterexampleConfig& cfg, int points);

/// xi~ and its three-point finite-difference slope on the grid.
std::vector<XiScanRow> tabulate_xi(const CounterexampleConfig& cfg, std::span<const double> grid);

/// Tabulates xi~ and its finite-difference slope and picks b_star, the
/// interior grid point with the most negative slope that passes the
/// degeneracy guard.
XiScan scan_xi(const CounterexampleConfig& cfg, std::span<const double> grid);

/// Quadratic extrapolation of xi~ to b = 0 from the first three rows.
double extrapolate_xi_at_zero(const XiScan& scan);

/// Configuration with xi = scan.xi_selected; cfg.b and cfg.xi are updated.
Configuration build_configuration(CounterexampleConfig& cfg, const XiScan& scan);

Configuration make_configuration(const CounterexampleConfig& cfg, double xi);

/// (d(q,u) - d(q,p), d(q,v) - d(q,p), d(q,w) - d(q,p)).
Vec3 circumcentre_residual(const CounterexampleConfig& cfg, const Configuration& conf, const ChartPoint& q);

/// Newton from +-(0, b eps, 0); fills c_plus, c_minus and circumradius.
Configuration solve_circumcentres(const Configuration& conf, const CounterexampleConfig& cfg);

JacobianReport jacobian_analysis(const Configuration& conf, const CounterexampleConfig& cfg, const XiScan& scan);

/// Extra per-trial check supplied by the caller, e.g. Delaunay emptiness of
/// the perturbed balls in a net. Receives the perturbed, solved configuration.
using StabilityAudit = std::function<bool(const Configuration& perturbed)>;

/// Displaces u, v, w, p independently and uniformly inside chart balls of
/// radius rho and re-solves from the unperturbed roots.
StabilityReport stability_probe(const Configuration& conf, const CounterexampleConfig& cfg, double rho,
                                int trials, std::uint64_t seed, const StabilityAudit& audit = {});

/// Reference single-threaded version of stability_probe.
StabilityReport stability_probe_serial(const Configuration& conf, const CounterexampleConfig& cfg,
                                       double rho, int trials, std::uint64_t seed,
                                       const StabilityAudit& audit = {});

struct RhoCertificate {
  double rho = 0.0;
  StabilityReport report;
  std::vector<std::pair<double, int>> sweep;  // (rho, successes) evaluated
};

/// Bisection (in log scale) for the largest rho in [lo, hi] at which every
/// trial succeeds, to one significant figure.
RhoCertificate certify_rho(const Configuration& conf, const CounterexampleConfig& cfg, int trials,
                           std::uint64_t seed, double lo, double hi, const StabilityAudit& audit = {});

/// Per-trial seed derived from the run seed, independent of evaluation order.
std::uint64_t trial_seed(std::uint64_t seed, int trial);

}  // namespace tdel
