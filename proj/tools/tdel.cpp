// tdel: command-line front end for the torus Delaunay counterexample.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdel/pipeline.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::optional<double> period, amplitude, epsilon, rho, distance_tol, newton_tol, genericity_tol;
  std::optional<int> b_grid, trials, threads, figure_resolution;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir, plane;
  std::vector<double> q1, q2;
};

tdel::RunConfig resolve(const Flags& f) {
  tdel::RunConfig c;
  if (!f.config_path.empty()) {
    const std::string text = tdel::read_text_file(f.config_path);
    tdel::Json j;
    try {
      j = tdel::Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw tdel::Error(tdel::ErrorKind::InvalidArgument, f.config_path + ": " + e.what());
    }
    c = tdel::run_config_from_json(j, c);
  }
  // Flags override file values.
  if (f.period) c.L = *f.period;
  if (f.amplitude) c.A = *f.amplitude;
  if (f.epsilon) c.epsilon = *f.epsilon;
  if (f.rho) c.rho = *f.rho;
  if (f.distance_tol) c.distance_tol = *f.distance_tol;
  if (f.newton_tol) c.newton_tol = *f.newton_tol;
  if (f.genericity_tol) c.genericity_tol = *f.genericity_tol;
  if (f.b_grid) c.b_grid = *f.b_grid;
  if (f.trials) c.trials = *f.trials;
  if (f.threads) c.threads = *f.threads;
  if (f.figure_resolution) c.figure_resolution = *f.figure_resolution;
  if (f.seed) c.seed = *f.seed;
  if (f.out_dir) c.out_dir = *f.out_dir;
  if (f.plane) c.plane = *f.plane;
  if (!f.q1.empty()) c.q1 = tdel::ChartPoint{f.q1[0], f.q1[1], f.q1[2]};
  if (!f.q2.empty()) c.q2 = tdel::ChartPoint{f.q2[0], f.q2[1], f.q2[2]};
  return c;
}

int emit(const tdel::RunOutcome& out) {
  std::cout << out.report.dump(2) << '\n';
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geodesic Voronoi/Delaunay on a perturbed flat 3-torus"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config_path, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  app.add_option("--period", f.period, "torus period L");
  app.add_option("--amplitude", f.amplitude, "bump amplitude A");
  app.add_option("--epsilon", f.epsilon, "net parameter eps");
  app.add_option("--seed", f.seed, "net and perturbation seed");
  app.add_option("--rho", f.rho, "perturbation radius; 0 certifies it by bisection");
  app.add_option("--trials", f.trials, "perturbation trials");
  app.add_option("--out-dir", f.out_dir, "artifact directory");
  app.add_option("--threads", f.threads, "worker threads (0 = runtime default)");
  app.add_option("--b-grid", f.b_grid, "xi scan grid size");
  app.add_option("--distance-tol", f.distance_tol, "geodesic distance tolerance");
  app.add_option("--newton-tol", f.newton_tol, "circumcentre residual tolerance");
  app.add_option("--genericity-tol", f.genericity_tol, "cosphericity tolerance, times eps");
  app.add_option("--figure-resolution", f.figure_resolution, "slice grid size");

  auto* reproduce = app.add_subcommand("reproduce", "full pipeline with artifacts");
  auto* distance = app.add_subcommand("distance", "geodesic distance between two points");
  distance->add_option("--q1", f.q1, "first point (default u)")->expected(3);
  distance->add_option("--q2", f.q2, "second point (default v)")->expected(3);
  auto* xi_scan = app.add_subcommand("xi-scan", "xi~(b) table as CSV");
  auto* net = app.add_subcommand("net", "generate and certify the net");
  auto* complex = app.add_subcommand("complex", "local Delaunay complex of out-dir/net.json");
  auto* audit = app.add_subcommand("audit", "re-derive a completed run from its artifacts");
  auto* stability = app.add_subcommand("stability", "perturbation stability of the two centres");
  auto* figure = app.add_subcommand("figure", "SVG slice from a completed run");
  figure->add_option("--plane", f.plane, "xz, xy or yz");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  std::string stage = "config";
  try {
    const tdel::RunConfig config = resolve(f);
    tdel::validate(config);
    stage = "run";
    if (reproduce->parsed()) return emit(tdel::cmd_reproduce(config));
    if (distance->parsed()) {
      std::cout << tdel::cmd_distance(config).dump(2) << '\n';
      return 0;
    }
    if (xi_scan->parsed()) {
      std::cout << tdel::cmd_xi_scan(config);
      return 0;
    }
    if (net->parsed()) return emit(tdel::cmd_net(config));
    if (complex->parsed()) return emit(tdel::cmd_complex(config));
    if (audit->parsed()) return emit(tdel::cmd_audit(config));
    if (stability->parsed()) return emit(tdel::cmd_stability(config));
    if (figure->parsed()) {
      std::cout << tdel::cmd_figure(config.out_dir, tdel::parse_plane(config.plane), config.figure_resolution)
                << '\n';
      return 0;
    }
  } catch (const tdel::StageError& e) {
    std::cerr << tdel::error_json(e, e.stage()).dump(2) << '\n';
    return 1;
  } catch (const tdel::Error& e) {
    std::cerr << tdel::error_json(e, stage).dump(2) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << tdel::error_json(tdel::Error(tdel::ErrorKind::SolverFailure, e.what()), stage).dump(2) << '\n';
    return 1;
  }
  return 1;
}
