// Serial reference vs OpenMP kernels on the default configuration.
// Argument 0 runs the serial path, 1 the parallel one.

#include <benchmark/benchmark.h>

#include "tdel/pipeline.hpp"

using namespace tdel;

namespace {

struct Setup {
  PreparedConfiguration prep;
  PointSet net;

  Setup() {
    RunConfig config;
    prep = prepare_configuration(config);
    net = generate_net(prep.field, prep.conf, config.epsilon, config.seed);
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

Execution mode(const benchmark::State& state) {
  return state.range(0) ? Execution::Parallel : Execution::Serial;
}

void BM_verify_net(benchmark::State& state) {
  const Setup& s = setup();
  const auto zones = exclusion_zones(s.prep.conf);
  for (auto _ : state) {
    auto v = verify_net(s.prep.field, s.net, s.net.epsilon / 4, zones, mode(state));
    benchmark::DoNotOptimize(v.probes);
  }
  state.counters["threads"] = state.range(0) ? max_threads() : 1;
}

void BM_stability_probe(benchmark::State& state) {
  const Setup& s = setup();
  const double rho = 5e-7 * s.net.epsilon;
  for (auto _ : state) {
    auto r = state.range(0) ? stability_probe(s.prep.conf, s.prep.cfg, rho, 20, 42)
                            : stability_probe_serial(s.prep.conf, s.prep.cfg, rho, 20, 42);
    benchmark::DoNotOptimize(r.successes);
  }
}

void BM_label_slice(benchmark::State& state) {
  const Setup& s = setup();
  for (auto _ : state) {
    auto l = label_slice(s.prep.field, s.net, SlicePlane::XZ, 2.0 * s.net.epsilon, 128, mode(state));
    benchmark::DoNotOptimize(l.labels.data());
  }
}

void BM_local_delaunay(benchmark::State& state) {
  const Setup& s = setup();
  DelaunayOptions options;
  options.execution = mode(state);
  for (auto _ : state) {
    auto c = local_delaunay(s.prep.field, s.net, ChartPoint{}, s.net.epsilon, options);
    benchmark::DoNotOptimize(c.certificates.size());
  }
}

}  // namespace

BENCHMARK(BM_verify_net)->Arg(0)->Arg(1)->Unit(benchmark::kSecond)->Iterations(1)->UseRealTime();
BENCHMARK(BM_stability_probe)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_label_slice)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_local_delaunay)->Arg(0)->Arg(1)->Unit(benchmark::kSecond)->Iterations(1)->UseRealTime();

BENCHMARK_MAIN();
