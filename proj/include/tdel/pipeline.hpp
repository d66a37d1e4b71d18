#pragma once

#include <optional>
#include <string>

#include "tdel/delaunay.hpp"
#include "tdel/error.hpp"
#include "tdel/figure.hpp"
#include "tdel/io.hpp"

namespace tdel {

struct RunConfig {
  double L = 2.0;
  double A = 0.375;
  double epsilon = 0.1;
  int b_grid = 32;
  std::uint64_t seed = 42;
  double distance_tol = default_distance_tol;
  double newton_tol = 1e-13;
  double genericity_tol = 1e-7;
  /// Perturbation radius for the stability stage; 0 means certify it by
  /// bisection.
  double rho = 0.0;
  int trials = 20;
  std::string out_dir = "tdel-out";
  int threads = 0;
  int figure_resolution = 512;
  /// Endpoints for `distance`; u and v of the configuration when unset.
  std::optional<ChartPoint> q1;
  std::optional<ChartPoint> q2;
  std::string plane = "xz";
};

/// Reads the keys present in `j` on top of `base`; unknown keys are errors.
RunConfig run_config_from_json(const Json& j, RunConfig base = {});
Json to_json(const RunConfig& config);
/// Enforces the counterexample constraints; throws InvalidArgument.
void validate(const RunConfig& config);

/// Error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

Json error_json(const Error& error, const std::string& stage);

/// scan_xi -> build_configuration -> solve_circumcentres -> jacobian_analysis.
struct PreparedConfiguration {
  MetricField field;
  CounterexampleConfig cfg;
  XiScan scan;
  Configuration conf;
  JacobianReport jacobian;
};

PreparedConfiguration prepare_configuration(const RunConfig& config, Json* timings = nullptr);

/// Stability audit against a net: the perturbed vertices replace u, v, w, p
/// and the trial passes when sigma keeps two empty balls and is the only
/// coface of {u, p, w} and {v, p, w}.
StabilityAudit make_net_audit(const MetricField& field, const PointSet& net, const DelaunayOptions& options = {});

struct StabilityOutcome {
  double rho = 0.0;
  bool bisected = false;
  /// Bisection on the root-persistence test alone.
  RhoCertificate bisection;
  /// Final run at rho with the net audit.
  StabilityReport audited;
};

StabilityOutcome run_stability(const PreparedConfiguration& prepared, const RunConfig& config,
                               const PointSet* net);

Json stability_json(const StabilityOutcome& outcome);
Json defect_json(const DefectReport& defect, const PointSet& net);
Json net_summary_json(const PointSet& net, const NetVerification& verification, const NetStats* stats);

/// Indices of the two triangles that must have a single coface.
std::array<Simplex, 2> defect_triangles(const PointSet& net);
/// Coface count of a triangle in the census, or -1 when absent.
int census_count(const std::vector<CensusEntry>& census, const Simplex& triangle);
/// The defect claim: sigma has two centres, both defect triangles have one
/// coface, the complex is generic and no candidate was seed-exhausted.
bool defect_certified(const DefectReport& defect, const PointSet& net);

struct RunOutcome {
  Json report;
  Json timings;
  int exit_code = 2;
};

/// Full pipeline; writes report.json, timings.json, net.json, complex.json,
/// xi_scan.csv and three SVG slices to config.out_dir. Stage failures are
/// thrown as StageError.
RunOutcome cmd_reproduce(const RunConfig& config);

/// Both solvers and the bound sandwich between config.q1 and config.q2.
Json cmd_distance(const RunConfig& config);

/// CSV (b, xi_tilde, xi_tilde_prime) on the uniform grid; no b_star
/// selection, so it also works for the flat control.
std::string cmd_xi_scan(const RunConfig& config);

/// Generates and verifies the net; writes net.json. Exit 0 iff certified.
RunOutcome cmd_net(const RunConfig& config);

/// Local Delaunay complex of out_dir/net.json under the configured metric;
/// writes complex.json. Exit 0 iff the defect is certified.
RunOutcome cmd_complex(const RunConfig& config);

/// Re-derives the claims of a completed run from net.json and the config:
/// net verification, the complex of complex.json and the defect.
RunOutcome cmd_audit(const RunConfig& config);

/// Stability stage alone; audited against out_dir/net.json when present.
RunOutcome cmd_stability(const RunConfig& config);

/// Figures from the artifacts of a completed run in `out_dir`.
std::string cmd_figure(const std::string& out_dir, SlicePlane plane, int resolution);

}  // namespace tdel
