#include "tdel/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "tdel/error.hpp"
#include "tdel/parallel.hpp"

namespace tdel {

namespace {

constexpr double xi_slope_floor = 1e-8;

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

ChartPoint random_in_ball(std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vec3 d{normal(rng), normal(rng), normal(rng)};
  const double n = norm(d);
  if (n == 0.0) return {};
  return d * (radius * std::cbrt(uniform(rng)) / n);
}

bool run_trial(const Configuration& conf, const CounterexampleConfig& cfg, double rho, std::uint64_t seed,
               const StabilityAudit& audit) {
  Configuration moved = conf;
  std::mt19937_64 rng(seed);
  moved.u += random_in_ball(rng, rho);
  moved.v += random_in_ball(rng, rho);
  moved.w += random_in_ball(rng, rho);
  moved.p += random_in_ball(rng, rho);
  NewtonOptions options;
  options.scale = cfg.epsilon;
  options.shooting = cfg.shooting;
  const auto plus = newton_circumcentre(cfg.field, moved.sigma(), *conf.c_plus, options);
  const auto minus = newton_circumcentre(cfg.field, moved.sigma(), *conf.c_minus, options);
  if (!plus || !minus) return false;
  if (norm(plus->centre - minus->centre) <= cfg.epsilon * cfg.b) return false;
  if (!(plus->radius < cfg.epsilon) || !(minus->radius < cfg.epsilon)) return false;
  moved.c_plus = plus->centre;
  moved.c_minus = minus->centre;
  moved.circumradius = plus->radius;
  return !audit || audit(moved);
}

StabilityReport collect(double rho, const std::vector<char>& ok, std::uint64_t seed) {
  StabilityReport report;
  report.rho = rho;
  report.trials = static_cast<int>(ok.size());
  for (int t = 0; t < report.trials; ++t) {
    if (ok[t]) {
      ++report.successes;
    } else {
      report.failures.push_back(trial_seed(seed, t));
    }
  }
  return report;
}

double floor_one_sig_fig(double v) {
  const double mag = std::pow(10.0, std::floor(std::log10(v)));
  return std::floor(v / mag) * mag;
}

}  // namespace

CounterexampleConfig CounterexampleConfig::make(const MetricField& field, double epsilon) {
  const TorusChart& chart = field.chart();
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  if (!(epsilon < chart.injectivity_floor() / 2.0))
    throw Error(ErrorKind::InvalidArgument, "epsilon must be below half the injectivity floor");
  if (epsilon > chart.period() / 20.0 * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidArgument, "epsilon must not exceed L/20");
  CounterexampleConfig cfg;
  cfg.field = field;
  cfg.epsilon = epsilon;
  cfg.xi0 = critical_xi(field);
  cfg.b_max = cfg.a / 2.0;
  return cfg;
}

double critical_xi(const MetricField& field) { return std::sqrt(1.0 + field.bump().value(0.0)) - 1.0; }

double xi_tilde(const CounterexampleConfig& cfg, double b) {
  if (!(b > 0.0) || b > cfg.b_max * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidArgument, "b must lie in (0, b_max]");
  const double eps = cfg.epsilon;
  const ChartPoint u{0.0, 0.0, cfg.a * eps};
  const ChartPoint c{0.0, b * eps, 0.0};
  Shot shot;
  try {
    shot = shoot(cfg.field, c, u, cfg.shooting);
  } catch (const Error& e) {
    throw Error(ErrorKind::SolverFailure, std::string("xi_tilde: ") + e.what());
  }
  const double d = shot.length;
  const double by = b * eps;
  return std::sqrt(std::max(d * d - by * by, 0.0)) / (cfg.a * eps) - 1.0;
}

std::vector<double> uniform_b_grid(const CounterexampleConfig& cfg, int points) {
  if (points < 3) throw Error(ErrorKind::InvalidArgument, "b grid needs at least 3 points");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = cfg.b_max * (i + 1) / points;
  grid.back() = cfg.b_max;
  return grid;
}

std::vector<XiScanRow> tabulate_xi(const CounterexampleConfig& cfg, std::span<const double> grid) {
  const std::size_t n = grid.size();
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "b grid needs at least 3 points");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(grid[i] > 0.0) || grid[i] > cfg.b_max * (1.0 + 1e-12) || (i > 0 && !(grid[i] > grid[i - 1])))
      throw Error(ErrorKind::InvalidArgument, "b grid must be strictly increasing in (0, b_max]");
  }
  std::vector<XiScanRow> rows(n);
  std::vector<double> values(n);
  parallel_for(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t i) { values[i] = xi_tilde(cfg, grid[i]); });

  // Three-point derivative; central at interior points, one-sided at the ends.
  auto three_point = [&](std::size_t i0, double at) {
    const double x0 = grid[i0], x1 = grid[i0 + 1], x2 = grid[i0 + 2];
    const double y0 = values[i0], y1 = values[i0 + 1], y2 = values[i0 + 2];
    return y0 * (2 * at - x1 - x2) / ((x0 - x1) * (x0 - x2)) + y1 * (2 * at - x0 - x2) / ((x1 - x0) * (x1 - x2)) +
           y2 * (2 * at - x0 - x1) / ((x2 - x0) * (x2 - x1));
  };
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t i0 = i == 0 ? 0 : (i == n - 1 ? n - 3 : i - 1);
    rows[i] = {grid[i], values[i], three_point(i0, grid[i])};
  }
  return rows;
}

XiScan scan_xi(const CounterexampleConfig& cfg, std::span<const double> grid) {
  XiScan scan;
  scan.rows = tabulate_xi(cfg, grid);
  const std::size_t n = scan.rows.size();

  // The degeneracy guard rejects points where xi~ sits on xi0 (unique,
  // fragile circumcentre at the origin).
  double best = 0.0;
  bool found = false;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const XiScanRow& r = scan.rows[i];
    // Slopes within solver noise of zero (the flat control) do not count.
    if (!(r.xi_tilde_prime < -xi_slope_floor)) continue;
    if (std::abs(r.xi_tilde - cfg.xi0) < 1e-4 * cfg.xi0) continue;
    if (!found || r.xi_tilde_prime < best) {
      best = r.xi_tilde_prime;
      scan.star_index = i;
      found = true;
    }
  }
  if (!found) throw Error(ErrorKind::NoNegativeSlope, "xi~ has no admissible negative slope on the grid");
  scan.b_star = scan.rows[scan.star_index].b;
  scan.xi_selected = scan.rows[scan.star_index].xi_tilde;
  scan.slope_at_star = best;
  return scan;
}

double extrapolate_xi_at_zero(const XiScan& scan) {
  if (scan.rows.size() < 3) throw Error(ErrorKind::InvalidArgument, "need three rows to extrapolate");
  const double x0 = scan.rows[0].b, x1 = scan.rows[1].b, x2 = scan.rows[2].b;
  const double y0 = scan.rows[0].xi_tilde, y1 = scan.rows[1].xi_tilde, y2 = scan.rows[2].xi_tilde;
  return y0 * (x1 * x2) / ((x0 - x1) * (x0 - x2)) + y1 * (x0 * x2) / ((x1 - x0) * (x1 - x2)) +
         y2 * (x0 * x1) / ((x2 - x0) * (x2 - x1));
}

Configuration make_configuration(const CounterexampleConfig& cfg, double xi) {
  const double ae = cfg.a * cfg.epsilon;
  Configuration conf;
  conf.xi = xi;
  conf.u = {0.0, 0.0, ae};
  conf.v = {0.0, 0.0, -ae};
  conf.w = {ae * (1.0 + xi), 0.0, 0.0};
  conf.p = {-ae * (1.0 + xi), 0.0, 0.0};
  return conf;
}

Configuration build_configuration(CounterexampleConfig& cfg, const XiScan& scan) {
  if (!(scan.xi_selected > 0.0) || !(scan.xi_selected < cfg.xi0))
    throw Error(ErrorKind::InvalidArgument, "selected xi must lie in (0, xi0)");
  cfg.b = scan.b_star;
  cfg.xi = scan.xi_selected;
  Configuration conf = make_configuration(cfg, cfg.xi);
  const Tetra t = conf.sigma();
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const double d = shoot(cfg.field, t[i], t[j], cfg.shooting).length;
      if (!(d > cfg.epsilon))
        throw Error(ErrorKind::SeparationViolated, "configuration vertices closer than epsilon");
    }
  return conf;
}

Vec3 circumcentre_residual(const CounterexampleConfig& cfg, const Configuration& conf, const ChartPoint& q) {
  return circumcentre_map(cfg.field, conf.sigma(), q, cfg.shooting);
}

Configuration solve_circumcentres(const Configuration& conf, const CounterexampleConfig& cfg) {
  NewtonOptions options;
  options.scale = cfg.epsilon;
  options.shooting = cfg.shooting;
  const double by = cfg.b * cfg.epsilon;
  const auto plus = newton_circumcentre(cfg.field, conf.sigma(), {0.0, by, 0.0}, options);
  const auto minus = newton_circumcentre(cfg.field, conf.sigma(), {0.0, -by, 0.0}, options);
  if (!plus || !minus) throw Error(ErrorKind::NewtonDiverged, "circumcentre Newton did not converge");
  if (norm(plus->centre - minus->centre) <= cfg.epsilon * cfg.b)
    throw Error(ErrorKind::RootsCoincide, "both seeds converged to the same circumcentre");
  if (!(plus->radius < cfg.epsilon) || !(minus->radius < cfg.epsilon))
    throw Error(ErrorKind::SolverFailure, "circumradius is not below epsilon");
  Configuration out = conf;
  out.c_plus = plus->centre;
  out.c_minus = minus->centre;
  out.circumradius = plus->radius;
  return out;
}

JacobianReport jacobian_analysis(const Configuration& conf, const CounterexampleConfig& cfg, const XiScan& scan) {
  if (!conf.solved()) throw Error(ErrorKind::InvalidArgument, "configuration has no circumcentres");
  const double eps = cfg.epsilon;
  const double step = 1e-5 * eps;
  const ChartPoint c = *conf.c_plus;
  JacobianReport rep;
  for (int col = 0; col < 3; ++col) {
    Vec3 e{};
    e[col] = step;
    const Vec3 hp = circumcentre_residual(cfg, conf, c + e);
    const Vec3 hm = circumcentre_residual(cfg, conf, c - e);
    for (int row = 0; row < 3; ++row) rep.dh[row][col] = eps * (hp[row] - hm[row]) / (2.0 * step);
  }
  const Mat3& d = rep.dh;
  rep.determinant = det(d);
  rep.structure_error = std::max({std::abs(d[0][0] - d[1][0]), std::abs(d[0][1] - d[1][1]),
                                  std::abs(d[0][2] + d[1][2]), std::abs(d[2][1]), std::abs(d[2][2])});
  const double xi = conf.xi;
  const double a = cfg.a;
  const double b = scan.b_star;
  rep.hy_analytic = a * a * (1.0 + xi) * scan.slope_at_star * eps /
                    std::sqrt((1.0 + xi) * (1.0 + xi) * a * a + b * b);
  rep.hy_relative_error = std::abs(rep.hy_analytic - d[0][1]) / std::abs(rep.hy_analytic);
  rep.sign_hz = static_cast<int>(sign_of(d[0][2]));
  rep.sign_wx = static_cast<int>(sign_of(d[2][0]));
  rep.sign_hy = static_cast<int>(sign_of(d[0][1]));
  double row_norms = 1.0;
  for (int r = 0; r < 3; ++r) row_norms *= std::sqrt(d[r][0] * d[r][0] + d[r][1] * d[r][1] + d[r][2] * d[r][2]);
  if (!(std::abs(rep.determinant) > 1e-8 * row_norms))
    throw Error(ErrorKind::SingularJacobian, "Jacobian of h is numerically singular at c_plus");
  return rep;
}

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  // splitmix64 of (seed, trial)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

StabilityReport stability_probe_serial(const Configuration& conf, const CounterexampleConfig& cfg, double rho,
                                       int trials, std::uint64_t seed, const StabilityAudit& audit) {
  if (!conf.solved()) throw Error(ErrorKind::InvalidArgument, "configuration has no circumcentres");
  std::vector<char> ok(trials, 0);
  for (int t = 0; t < trials; ++t) ok[t] = run_trial(conf, cfg, rho, trial_seed(seed, t), audit);
  return collect(rho, ok, seed);
}

StabilityReport stability_probe(const Configuration& conf, const CounterexampleConfig& cfg, double rho,
                                int trials, std::uint64_t seed, const StabilityAudit& audit) {
  if (!conf.solved()) throw Error(ErrorKind::InvalidArgument, "configuration has no circumcentres");
  if (!(rho >= 0.0) || !(rho < 1e-2 * cfg.epsilon))
    throw Error(ErrorKind::InvalidArgument, "rho must lie in [0, 1e-2 eps)");
  std::vector<char> ok(trials, 0);
  parallel_for(trials, [&](std::ptrdiff_t t) {
    ok[t] = run_trial(conf, cfg, rho, trial_seed(seed, static_cast<int>(t)), audit);
  });
  return collect(rho, ok, seed);
}

RhoCertificate certify_rho(const Configuration& conf, const CounterexampleConfig& cfg, int trials,
                           std::uint64_t seed, double lo, double hi, const StabilityAudit& audit) {
  RhoCertificate cert;
  auto run = [&](double rho) {
    StabilityReport r = stability_probe(conf, cfg, rho, trials, seed, audit);
    cert.sweep.emplace_back(rho, r.successes);
    return r;
  };
  StabilityReport top = run(hi);
  if (top.successes == trials) {
    cert.rho = hi;
    cert.report = top;
    return cert;
  }
  StabilityReport bottom = run(lo);
  if (bottom.successes < trials) {
    cert.rho = 0.0;
    cert.report = bottom;
    return cert;
  }
  while (hi / lo > 1.05) {
    const double mid = std::sqrt(lo * hi);
    if (run(mid).successes == trials) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double rho = floor_one_sig_fig(lo);
  StabilityReport report = run(rho);
  // Non-monotone trial outcomes are possible; walk down until certified.
  while (report.successes < trials && rho > 1e-3 * lo) {
    rho = floor_one_sig_fig(rho * 0.95);
    report = run(rho);
  }
  cert.rho = report.successes == trials ? rho : 0.0;
  cert.report = report;
  return cert;
}

}  // namespace tdel
