#include "tdel/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <filesystem>

#include "tdel/error.hpp"

namespace tdel {

namespace {

using clock_type = std::chrono::steady_clock;

template <class F>
auto run_stage(const std::string& name, Json* timings, F&& body) {
  const auto start = clock_type::now();
  auto record = [&] {
    if (timings) (*timings)[name] = std::chrono::duration<double>(clock_type::now() - start).count();
  };
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      record();
    } else {
      auto result = body();
      record();
      return result;
    }
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  } catch (const std::exception& e) {
    throw StageError(name, Error(ErrorKind::SolverFailure, e.what()));
  }
}

Json matrix_json(const Mat3& m) {
  Json j = Json::array();
  for (const auto& row : m) j.push_back(Json::array({row[0], row[1], row[2]}));
  return j;
}

template <class T>
void read_key(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::vector<FigureMark> fixed_marks(const PointSet& net) {
  static const char* names[] = {"u", "v", "w", "p"};
  std::vector<FigureMark> out;
  for (std::size_t k = 0; k < net.fixed_indices.size() && k < 4; ++k)
    out.push_back({net.points[net.fixed_indices[k]], names[k]});
  return out;
}

bool fixed_points_match(const MetricField& field, const PointSet& net, const Configuration& conf) {
  if (net.fixed_indices.size() != 4) return false;
  const std::array<ChartPoint, 4> expected{conf.u, conf.v, conf.w, conf.p};
  for (int k = 0; k < 4; ++k)
    if (!field.chart().same_point(net.points[net.fixed_indices[k]], expected[k], 1e-12)) return false;
  return true;
}

Json parse_artifact(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, path.string() + ": " + e.what());
  }
}

/// out_dir/net.json under the configured metric. The period and eps must
/// agree with the config; the amplitude may differ (flat control).
PointSet load_net(const RunConfig& config, MetricField& field) {
  const auto path = std::filesystem::path(config.out_dir) / "net.json";
  if (!std::filesystem::exists(path))
    throw Error(ErrorKind::MissingArtifacts, path.string() + " not found; run `net` or `reproduce` first");
  MetricField stored;
  PointSet net = net_from_json(parse_artifact(path), &stored);
  if (stored.chart().period() != config.L || net.epsilon != config.epsilon)
    throw Error(ErrorKind::InvalidArgument, "net.json was built with a different period or epsilon");
  field = MetricField(config.L, config.A);
  return net;
}

bool complex_matches(const Json& stored, const SimplicialComplex& complex, double eps) {
  const Json fresh = complex_to_json(complex, {}, "");
  if (stored.at("simplices") != fresh.at("simplices")) return false;
  const Json& a = stored.at("certificates");
  const Json& b = fresh.at("certificates");
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].at("simplex") != b[i].at("simplex") || a[i].at("centres").size() != b[i].at("centres").size())
      return false;
    for (std::size_t k = 0; k < a[i].at("centres").size(); ++k)
      if (norm(point_from_json(a[i]["centres"][k]) - point_from_json(b[i]["centres"][k])) > 1e-9 * eps)
        return false;
  }
  return true;
}

}  // namespace

RunConfig run_config_from_json(const Json& j, RunConfig c) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "config must be a JSON object");
  static const char* known[] = {"L",    "A",      "epsilon", "b_grid",  "seed",    "distance_tol",     "newton_tol",
                                "genericity_tol", "rho",     "trials",  "out_dir", "threads", "figure_resolution",
                                "q1",     "q2",     "plane"};
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
        std::end(known))
      throw Error(ErrorKind::InvalidArgument, "unknown config key: " + key);
  }
  try {
    read_key(j, "L", c.L);
    read_key(j, "A", c.A);
    read_key(j, "epsilon", c.epsilon);
    read_key(j, "b_grid", c.b_grid);
    read_key(j, "seed", c.seed);
    read_key(j, "distance_tol", c.distance_tol);
    read_key(j, "newton_tol", c.newton_tol);
    read_key(j, "genericity_tol", c.genericity_tol);
    read_key(j, "rho", c.rho);
    read_key(j, "trials", c.trials);
    read_key(j, "out_dir", c.out_dir);
    read_key(j, "threads", c.threads);
    read_key(j, "figure_resolution", c.figure_resolution);
    read_key(j, "plane", c.plane);
    for (const char* key : {"q1", "q2"}) {
      if (!j.contains(key)) continue;
      const Json& q = j.at(key);
      if (!q.is_array() || q.size() != 3 || !q[0].is_number() || !q[1].is_number() || !q[2].is_number())
        throw Error(ErrorKind::InvalidArgument, std::string(key) + " must be an array of three numbers");
      (key[1] == '1' ? c.q1 : c.q2) = point_from_json(q);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("bad config value: ") + e.what());
  }
  return c;
}

Json to_json(const RunConfig& c) {
  Json j;
  j["L"] = c.L;
  j["A"] = c.A;
  j["epsilon"] = c.epsilon;
  j["b_grid"] = c.b_grid;
  j["seed"] = c.seed;
  j["distance_tol"] = c.distance_tol;
  j["newton_tol"] = c.newton_tol;
  j["genericity_tol"] = c.genericity_tol;
  j["rho"] = c.rho;
  j["trials"] = c.trials;
  j["figure_resolution"] = c.figure_resolution;
  return j;
}

void validate(const RunConfig& c) {
  if (c.b_grid < 3) throw Error(ErrorKind::InvalidArgument, "b_grid needs at least 3 points");
  if (c.trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be positive");
  if (!(c.rho >= 0.0) || c.rho >= 1e-2 * c.epsilon)
    throw Error(ErrorKind::InvalidArgument, "rho must lie in [0, 1e-2 eps)");
  if (!(c.distance_tol > 0.0) || !(c.newton_tol > 0.0) || !(c.genericity_tol > 0.0))
    throw Error(ErrorKind::InvalidArgument, "tolerances must be positive");
  if (c.figure_resolution < 8 || c.figure_resolution > 4096)
    throw Error(ErrorKind::InvalidArgument, "figure_resolution must lie in [8, 4096]");
  if (c.threads < 0) throw Error(ErrorKind::InvalidArgument, "threads must be non-negative");
  parse_plane(c.plane);
  // Constructing the field and config enforces the remaining constraints.
  CounterexampleConfig::make(MetricField(c.L, c.A), c.epsilon);
}

Json error_json(const Error& error, const std::string& stage) {
  Json j;
  j["error"]["kind"] = std::string(to_string(error.kind()));
  j["error"]["stage"] = stage;
  j["error"]["message"] = error.what();
  return j;
}

PreparedConfiguration prepare_configuration(const RunConfig& config, Json* timings) {
  run_stage("config", timings, [&] { validate(config); });
  PreparedConfiguration out;
  out.field = MetricField(config.L, config.A);
  out.cfg = CounterexampleConfig::make(out.field, config.epsilon);
  out.cfg.shooting = shooting_options_for_tol(config.distance_tol);
  out.scan = run_stage("scan_xi", timings, [&] {
    const auto grid = uniform_b_grid(out.cfg, config.b_grid);
    return scan_xi(out.cfg, grid);
  });
  out.conf = run_stage("build_configuration", timings, [&] { return build_configuration(out.cfg, out.scan); });
  out.conf = run_stage("solve_circumcentres", timings, [&] { return solve_circumcentres(out.conf, out.cfg); });
  out.jacobian =
      run_stage("jacobian_analysis", timings, [&] { return jacobian_analysis(out.conf, out.cfg, out.scan); });
  return out;
}

std::array<Simplex, 2> defect_triangles(const PointSet& net) {
  if (net.fixed_indices.size() != 4) throw Error(ErrorKind::InvalidArgument, "net has no fixed u, v, w, p");
  const auto& f = net.fixed_indices;  // u, v, w, p
  return {make_simplex({f[0], f[3], f[2]}), make_simplex({f[1], f[3], f[2]})};
}

int census_count(const std::vector<CensusEntry>& census, const Simplex& triangle) {
  for (const auto& e : census)
    if (e.triangle == triangle) return e.count;
  return -1;
}

bool defect_certified(const DefectReport& defect, const PointSet& net) {
  if (net.fixed_indices.size() != 4 || !defect.witness) return false;
  if (defect.witness->simplex != make_simplex(net.fixed_indices) || defect.witness->centres.size() < 2)
    return false;
  for (const auto& t : defect_triangles(net))
    if (census_count(defect.census, t) != 1) return false;
  return defect.generic && defect.complex.seed_exhausted.empty();
}

StabilityAudit make_net_audit(const MetricField& field, const PointSet& net, const DelaunayOptions& options) {
  const auto triangles = defect_triangles(net);
  const Simplex sigma = make_simplex(net.fixed_indices);
  DelaunayOptions serial = options;
  serial.execution = Execution::Serial;  // trials already run in parallel
  return [field, net, triangles, sigma, serial](const Configuration& moved) {
    PointSet perturbed = net;
    const std::array<ChartPoint, 4> pts{moved.u, moved.v, moved.w, moved.p};
    for (int k = 0; k < 4; ++k)
      perturbed.points[perturbed.fixed_indices[k]] = field.chart().canonicalize(pts[k]);
    for (const auto& t : triangles) {
      const auto cofaces = triangle_cofaces(field, perturbed, t, serial);
      if (cofaces.size() != 1 || cofaces[0].simplex != sigma || cofaces[0].centres.size() < 2) return false;
    }
    return true;
  };
}

StabilityOutcome run_stability(const PreparedConfiguration& prepared, const RunConfig& config,
                               const PointSet* net) {
  StabilityOutcome out;
  const double eps = config.epsilon;
  const StabilityAudit audit = net ? make_net_audit(prepared.field, *net) : StabilityAudit{};
  if (config.rho > 0.0) {
    out.rho = config.rho;
  } else {
    out.bisected = true;
    out.bisection = certify_rho(prepared.conf, prepared.cfg, config.trials, config.seed, 1e-8 * eps, 1e-3 * eps);
    out.rho = out.bisection.rho;
  }
  if (out.rho <= 0.0) {
    out.audited = out.bisection.report;
    return out;
  }
  out.audited = stability_probe(prepared.conf, prepared.cfg, out.rho, config.trials, config.seed, audit);
  // The net audit is stricter than root persistence; step down if needed.
  for (int k = 0; out.bisected && out.audited.successes < config.trials && k < 8; ++k) {
    out.rho /= 2.0;
    out.audited = stability_probe(prepared.conf, prepared.cfg, out.rho, config.trials, config.seed, audit);
  }
  return out;
}

Json stability_json(const StabilityOutcome& s) {
  Json j;
  j["rho"] = s.rho;
  j["bisected"] = s.bisected;
  j["trials"] = s.audited.trials;
  j["successes"] = s.audited.successes;
  j["failed_trial_seeds"] = s.audited.failures;
  Json sweep = Json::array();
  for (const auto& [rho, ok] : s.bisection.sweep) sweep.push_back(Json::array({rho, ok}));
  j["bisection_sweep"] = std::move(sweep);
  return j;
}

Json defect_json(const DefectReport& d, const PointSet& net) {
  Json j;
  Json bad = Json::array();
  for (const auto& [t, c] : d.bad_triangles) bad.push_back({{"triangle", to_json(t)}, {"count", c}});
  j["bad_triangles"] = std::move(bad);
  if (d.witness) {
    Json w;
    w["simplex"] = to_json(d.witness->simplex);
    Json centres = Json::array();
    for (const auto& c : d.witness->centres) centres.push_back(to_json(c));
    w["centres"] = std::move(centres);
    w["radii"] = d.witness->radii;
    j["witness"] = std::move(w);
  } else {
    j["witness"] = nullptr;
  }
  j["generic"] = d.generic;
  j["genericity_violations"] = d.genericity.violations.size();
  j["tetrahedra"] = d.complex.simplices[3].size();
  j["triangles"] = d.complex.simplices[2].size();
  j["core_vertices"] = d.complex.core.size();
  j["candidates"] = d.complex.candidates;
  j["solved_candidates"] = d.complex.solved_candidates;
  j["seed_exhausted"] = d.complex.seed_exhausted.size();
  std::size_t determinate = 0;
  for (const auto& e : d.census) determinate += e.determinate;
  j["determinate_triangles"] = determinate;
  if (net.fixed_indices.size() == 4) {
    const auto tris = defect_triangles(net);
    j["cofaces_upw"] = census_count(d.census, tris[0]);
    j["cofaces_vpw"] = census_count(d.census, tris[1]);
  }
  return j;
}

Json net_summary_json(const PointSet& net, const NetVerification& v, const NetStats* stats) {
  Json j;
  j["points"] = net.points.size();
  j["epsilon"] = net.epsilon;
  j["seed"] = net.seed;
  j["fixed_indices"] = net.fixed_indices;
  j["density_certified"] = v.density;
  j["separation_certified"] = v.separation;
  j["zones_empty"] = v.zones_empty;
  j["density_witnesses"] = v.density_witnesses.size();
  j["separation_witnesses"] = v.separation_witnesses.size();
  j["probes"] = v.probes;
  j["deepest_refinement"] = v.deepest_level;
  if (stats) {
    j["pool_size"] = stats->pool_size;
    j["greedy_insertions"] = stats->greedy_insertions;
    j["zone_covers"] = stats->zone_covers;
    j["repair_insertions"] = stats->repair_insertions;
    j["repair_rounds"] = stats->repair_rounds;
  }
  return j;
}

RunOutcome cmd_reproduce(const RunConfig& config) {
  set_threads(config.threads);
  RunOutcome out;
  Json& t = out.timings;
  const auto started = clock_type::now();
  const std::filesystem::path dir(config.out_dir);

  PreparedConfiguration prep = prepare_configuration(config, &t);
  const MetricField& field = prep.field;
  const double eps = config.epsilon;

  NetStats stats;
  PointSet net = run_stage("generate_net", &t, [&] { return generate_net(field, prep.conf, eps, config.seed, {}, &stats); });
  const auto zones = exclusion_zones(prep.conf);
  const NetVerification verification =
      run_stage("verify_net", &t, [&] { return verify_net(field, net, eps / 4.0, zones); });
  const DefectReport defect = run_stage("detect_defect", &t, [&] {
    return detect_defect(field, net, {}, 3.0, config.genericity_tol);
  });
  const DefectReport control = run_stage("control", &t, [&] {
    return detect_defect(MetricField(config.L, 0.0), net, {}, 3.0, config.genericity_tol);
  });
  const StabilityOutcome stability = run_stage("stability_probe", &t, [&] { return run_stability(prep, config, &net); });

  Json& r = out.report;
  r["config"] = to_json(config);
  Json cj;
  cj["xi0"] = prep.cfg.xi0;
  cj["a"] = prep.cfg.a;
  cj["b_max"] = prep.cfg.b_max;
  cj["b_star"] = prep.scan.b_star;
  cj["b_star_index"] = prep.scan.star_index;
  cj["xi_selected"] = prep.scan.xi_selected;
  cj["slope_at_star"] = prep.scan.slope_at_star;
  cj["xi_extrapolated_at_zero"] = extrapolate_xi_at_zero(prep.scan);
  double xi_max = 0.0;
  for (const auto& row : prep.scan.rows) xi_max = std::max(xi_max, row.xi_tilde);
  cj["xi_tilde_max"] = xi_max;
  cj["u"] = to_json(prep.conf.u);
  cj["v"] = to_json(prep.conf.v);
  cj["w"] = to_json(prep.conf.w);
  cj["p"] = to_json(prep.conf.p);
  cj["c_plus"] = to_json(*prep.conf.c_plus);
  cj["c_minus"] = to_json(*prep.conf.c_minus);
  cj["circumradius"] = prep.conf.circumradius;
  cj["residual_plus"] = norm(circumcentre_residual(prep.cfg, prep.conf, *prep.conf.c_plus));
  cj["residual_minus"] = norm(circumcentre_residual(prep.cfg, prep.conf, *prep.conf.c_minus));
  r["configuration"] = std::move(cj);
  Json jj;
  jj["dh_scaled"] = matrix_json(prep.jacobian.dh);
  jj["determinant"] = prep.jacobian.determinant;
  jj["hy_analytic"] = prep.jacobian.hy_analytic;
  jj["hy_relative_error"] = prep.jacobian.hy_relative_error;
  jj["structure_error"] = prep.jacobian.structure_error;
  jj["sign_hz"] = prep.jacobian.sign_hz;
  jj["sign_wx"] = prep.jacobian.sign_wx;
  jj["sign_hy"] = prep.jacobian.sign_hy;
  r["jacobian"] = std::move(jj);
  r["net"] = net_summary_json(net, verification, &stats);
  r["defect"] = defect_json(defect, net);
  Json ctl = defect_json(control, net);
  ctl["A"] = 0.0;
  r["control"] = std::move(ctl);
  Json sj = stability_json(stability);
  sj["rho_over_epsilon"] = stability.rho / eps;
  r["stability"] = std::move(sj);

  const bool net_ok = verification.density && verification.separation && verification.zones_empty;
  const bool defect_ok = defect_certified(defect, net);
  const bool stable = stability.rho > 0.0 && stability.audited.successes == stability.audited.trials;
  r["certified"] = {{"net", net_ok}, {"defect", defect_ok}, {"stability", stable},
                    {"counterexample", net_ok && defect_ok && stable}};
  out.exit_code = net_ok && defect_ok && stable ? 0 : 2;

  run_stage("write", &t, [&] {
    write_text_file(dir / "net.json", net_to_json(field, net).dump(1) + "\n");
    write_text_file(dir / "complex.json", complex_to_json(defect.complex, defect.census, "net.json").dump(1) + "\n");
    write_text_file(dir / "xi_scan.csv", xi_scan_csv(prep.scan));
    write_text_file(dir / "report.json", r.dump(2) + "\n");
  });
  run_stage("figures", &t, [&] {
    for (SlicePlane plane : {SlicePlane::XZ, SlicePlane::XY, SlicePlane::YZ}) {
      const auto slice = label_slice(field, net, plane, 2.0 * eps, config.figure_resolution);
      const std::vector<FigureMark> marks{{*prep.conf.c_plus, "c+"}, {*prep.conf.c_minus, "c-"}};
      write_text_file(dir / ("figure_" + to_string(plane) + ".svg"),
                      render_slice_svg(net, slice, fixed_marks(net), marks));
    }
  });
  t["total"] = std::chrono::duration<double>(clock_type::now() - started).count();
  write_text_file(dir / "timings.json", t.dump(2) + "\n");
  return out;
}

std::string cmd_figure(const std::string& out_dir, SlicePlane plane, int resolution) {
  const std::filesystem::path dir(out_dir);
  if (!std::filesystem::exists(dir / "net.json") || !std::filesystem::exists(dir / "report.json"))
    throw Error(ErrorKind::MissingArtifacts, "run `reproduce` first: net.json and report.json are required");
  MetricField field;
  const PointSet net = net_from_json(Json::parse(read_text_file(dir / "net.json")), &field);
  const Json report = Json::parse(read_text_file(dir / "report.json"));
  std::vector<FigureMark> marks;
  if (report.contains("configuration")) {
    marks.push_back({point_from_json(report["configuration"]["c_plus"]), "c+"});
    marks.push_back({point_from_json(report["configuration"]["c_minus"]), "c-"});
  }
  const auto slice = label_slice(field, net, plane, 2.0 * net.epsilon, resolution);
  const auto path = dir / ("figure_" + to_string(plane) + ".svg");
  write_text_file(path, render_slice_svg(net, slice, fixed_marks(net), marks));
  return path.string();
}

Json cmd_distance(const RunConfig& config) {
  validate(config);
  const MetricField field(config.L, config.A);
  const Configuration conf = make_configuration(CounterexampleConfig::make(field, config.epsilon), 0.0);
  const ChartPoint q1 = config.q1.value_or(conf.u);
  const ChartPoint q2 = config.q2.value_or(conf.v);
  const DistanceResult path = geodesic_distance(field, q1, q2, config.distance_tol);
  const DistanceResult shot = geodesic_distance_shooting(field, q1, q2, config.distance_tol);
  Json j;
  j["q1"] = to_json(q1);
  j["q2"] = to_json(q2);
  j["distance"] = path.distance;
  j["distance_shooting"] = shot.distance;
  j["lower_bound"] = path.lower_bound;
  j["upper_bound"] = path.upper_bound;
  const double scale = std::max(path.distance, shot.distance);
  j["solver_relative_difference"] = scale > 0.0 ? std::abs(path.distance - shot.distance) / scale : 0.0;
  return j;
}

std::string cmd_xi_scan(const RunConfig& config) {
  validate(config);
  set_threads(config.threads);
  CounterexampleConfig cfg = CounterexampleConfig::make(MetricField(config.L, config.A), config.epsilon);
  cfg.shooting = shooting_options_for_tol(config.distance_tol);
  XiScan scan;
  scan.rows = tabulate_xi(cfg, uniform_b_grid(cfg, config.b_grid));
  return xi_scan_csv(scan);
}

RunOutcome cmd_net(const RunConfig& config) {
  set_threads(config.threads);
  RunOutcome out;
  Json& t = out.timings;
  const PreparedConfiguration prep = prepare_configuration(config, &t);
  NetStats stats;
  const PointSet net = run_stage("generate_net", &t, [&] {
    return generate_net(prep.field, prep.conf, config.epsilon, config.seed, {}, &stats);
  });
  const auto zones = exclusion_zones(prep.conf);
  const NetVerification v =
      run_stage("verify_net", &t, [&] { return verify_net(prep.field, net, config.epsilon / 4.0, zones); });
  out.report["config"] = to_json(config);
  out.report["net"] = net_summary_json(net, v, &stats);
  out.exit_code = v.density && v.separation && v.zones_empty ? 0 : 2;
  run_stage("write", &t, [&] {
    write_text_file(std::filesystem::path(config.out_dir) / "net.json", net_to_json(prep.field, net).dump(1) + "\n");
  });
  return out;
}

RunOutcome cmd_complex(const RunConfig& config) {
  set_threads(config.threads);
  RunOutcome out;
  Json& t = out.timings;
  run_stage("config", &t, [&] { validate(config); });
  MetricField field;
  const PointSet net = run_stage("load", &t, [&] { return load_net(config, field); });
  const DefectReport defect =
      run_stage("detect_defect", &t, [&] { return detect_defect(field, net, {}, 3.0, config.genericity_tol); });
  out.report["config"] = to_json(config);
  out.report["defect"] = defect_json(defect, net);
  out.exit_code = defect_certified(defect, net) ? 0 : 2;
  run_stage("write", &t, [&] {
    write_text_file(std::filesystem::path(config.out_dir) / "complex.json",
                    complex_to_json(defect.complex, defect.census, "net.json").dump(1) + "\n");
  });
  return out;
}

RunOutcome cmd_audit(const RunConfig& config) {
  set_threads(config.threads);
  RunOutcome out;
  Json& t = out.timings;
  const std::filesystem::path dir(config.out_dir);
  const PreparedConfiguration prep = prepare_configuration(config, &t);
  MetricField field;
  const PointSet net = run_stage("load", &t, [&] { return load_net(config, field); });
  const auto zones = exclusion_zones(prep.conf);
  const NetVerification v =
      run_stage("verify_net", &t, [&] { return verify_net(field, net, config.epsilon / 4.0, zones); });
  const DefectReport defect =
      run_stage("detect_defect", &t, [&] { return detect_defect(field, net, {}, 3.0, config.genericity_tol); });

  Json checks;
  checks["net_certified"] = v.density && v.separation && v.zones_empty;
  checks["fixed_points_match"] = fixed_points_match(field, net, prep.conf);
  checks["defect_certified"] = defect_certified(defect, net);
  // Stored artifacts are optional; absent ones are reported as null.
  checks["complex_matches"] = nullptr;
  checks["report_matches"] = nullptr;
  run_stage("compare", &t, [&] {
    if (std::filesystem::exists(dir / "complex.json"))
      checks["complex_matches"] = complex_matches(parse_artifact(dir / "complex.json"), defect.complex, config.epsilon);
    if (std::filesystem::exists(dir / "report.json")) {
      const Json report = parse_artifact(dir / "report.json");
      const Json fresh = net_summary_json(net, v, nullptr);
      bool same = report.contains("defect") && report["defect"] == defect_json(defect, net) &&
                  report.contains("net");
      for (const char* key : {"points", "density_certified", "separation_certified", "zones_empty"})
        same = same && report["net"].value(key, Json()) == fresh[key];
      checks["report_matches"] = same;
    }
  });
  bool ok = true;
  for (const auto& [key, value] : checks.items()) ok = ok && (value.is_null() || value.get<bool>());
  out.report["config"] = to_json(config);
  out.report["net"] = net_summary_json(net, v, nullptr);
  out.report["defect"] = defect_json(defect, net);
  out.report["checks"] = std::move(checks);
  out.exit_code = ok ? 0 : 2;
  return out;
}

RunOutcome cmd_stability(const RunConfig& config) {
  set_threads(config.threads);
  RunOutcome out;
  Json& t = out.timings;
  const PreparedConfiguration prep = prepare_configuration(config, &t);
  std::optional<PointSet> net;
  if (std::filesystem::exists(std::filesystem::path(config.out_dir) / "net.json")) {
    MetricField field;
    net = run_stage("load", &t, [&] { return load_net(config, field); });
    if (!fixed_points_match(prep.field, *net, prep.conf))
      throw StageError("load", Error(ErrorKind::InvalidArgument, "net.json does not contain this configuration"));
  }
  const StabilityOutcome s =
      run_stage("stability_probe", &t, [&] { return run_stability(prep, config, net ? &*net : nullptr); });
  Json sj = stability_json(s);
  sj["rho_over_epsilon"] = s.rho / config.epsilon;
  sj["net_audit"] = net.has_value();
  out.report["config"] = to_json(config);
  out.report["stability"] = std::move(sj);
  out.exit_code = s.rho > 0.0 && s.audited.successes == s.audited.trials ? 0 : 2;
  return out;
}

}  // namespace tdel
