#include "tdel/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "tdel/error.hpp"
#include "tdel/spatial.hpp"

namespace tdel {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr int max_refinement = 36;
// Below this cell size the verifier also resolves covered probes exactly.
constexpr int exact_from_level = 6;

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_double(std::uint64_t& state) {
  return static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53;
}

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

// Max-heap over pool indices with decrease-key. Ties go to the lower index
// so the greedy order is fully determined by the keys.
class IndexedMaxHeap {
 public:
  explicit IndexedMaxHeap(std::vector<double>& keys) : keys_(keys), pos_(keys.size(), -1) {
    heap_.reserve(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
      pos_[i] = static_cast<std::ptrdiff_t>(heap_.size());
      heap_.push_back(static_cast<std::uint32_t>(i));
    }
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(heap_.size()) / 2 - 1; i >= 0; --i) sift_down(i);
  }

  bool empty() const noexcept { return heap_.empty(); }
  std::uint32_t top() const noexcept { return heap_.front(); }
  double top_key() const noexcept { return heap_.empty() ? 0.0 : keys_[heap_.front()]; }
  bool contains(std::uint32_t id) const noexcept { return pos_[id] >= 0; }

  void pop() { remove_at(0); }

  void decrease(std::uint32_t id, double key) {
    keys_[id] = key;
    sift_down(pos_[id]);
  }

 private:
  bool above(std::uint32_t a, std::uint32_t b) const noexcept {
    return keys_[a] > keys_[b] || (keys_[a] == keys_[b] && a < b);
  }
  void place(std::ptrdiff_t i, std::uint32_t id) {
    heap_[i] = id;
    pos_[id] = i;
  }
  void sift_down(std::ptrdiff_t i) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(heap_.size());
    const std::uint32_t id = heap_[i];
    while (true) {
      std::ptrdiff_t c = 2 * i + 1;
      if (c >= n) break;
      if (c + 1 < n && above(heap_[c + 1], heap_[c])) ++c;
      if (!above(heap_[c], id)) break;
      place(i, heap_[c]);
      i = c;
    }
    place(i, id);
  }
  void sift_up(std::ptrdiff_t i) {
    const std::uint32_t id = heap_[i];
    while (i > 0) {
      const std::ptrdiff_t parent = (i - 1) / 2;
      if (!above(id, heap_[parent])) break;
      place(i, heap_[parent]);
      i = parent;
    }
    place(i, id);
  }
  void remove_at(std::ptrdiff_t i) {
    const std::uint32_t gone = heap_[i];
    const std::uint32_t last = heap_.back();
    heap_.pop_back();
    pos_[gone] = -1;
    if (i < static_cast<std::ptrdiff_t>(heap_.size())) {
      place(i, last);
      sift_down(i);
      sift_up(pos_[last]);
    }
  }

  std::vector<double>& keys_;
  std::vector<std::ptrdiff_t> pos_;
  std::vector<std::uint32_t> heap_;
};

bool inside_zone(const MetricField& field, const ExclusionZone& zone, const ChartPoint& q, double radius) {
  const ChartPoint lift = field.chart().lift_near(zone.centre, q);
  return closer_than(field, zone.centre, lift, radius);
}

// Net under construction plus the queries the generator needs.
class NetBuilder {
 public:
  NetBuilder(const MetricField& field, std::span<const ExclusionZone> zones, double epsilon, double margin)
      : field_(field), chart_(field.chart()), eps_(epsilon), grid_(chart_, epsilon) {
    for (const auto& z : zones) zones_.push_back({z.centre, z.radius + margin * epsilon});
  }

  const std::vector<ChartPoint>& points() const noexcept { return points_; }
  const std::vector<ExclusionZone>& zones() const noexcept { return zones_; }

  std::size_t insert(const ChartPoint& q) {
    const ChartPoint c = chart_.canonicalize(q);
    points_.push_back(c);
    alive_.push_back(1);
    grid_.insert(static_cast<std::uint32_t>(points_.size() - 1), c);
    return points_.size() - 1;
  }

  /// Points that have not been removed, in insertion order.
  std::vector<ChartPoint> live_points() const {
    std::vector<ChartPoint> out;
    out.reserve(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (alive_[i]) out.push_back(points_[i]);
    return out;
  }

  /// True when some net point is at metric distance < eps from q.
  bool covered(const ChartPoint& q) const {
    bool hit = false;
    grid_.for_each_near(q, eps_, [&](std::uint32_t id) {
      if (hit) return;
      if (closer_than(field_, q, chart_.lift_near(q, points_[id]), eps_)) hit = true;
    });
    return hit;
  }

  bool admissible(const ChartPoint& q) const {
    for (const auto& z : zones_)
      if (inside_zone(field_, z, q, z.radius)) return false;
    return true;
  }

  /// Boundary points of the enlarged zones that lie outside every zone.
  std::vector<ChartPoint> shell_candidates(int per_zone) const {
    std::vector<ChartPoint> out;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (const auto& z : zones_) {
      const double target = z.radius * (1.0 + 1e-9);
      for (int k = 0; k < per_zone; ++k) {
        const double nz = 1.0 - (2.0 * k + 1.0) / per_zone;
        const double rad = std::sqrt(std::max(0.0, 1.0 - nz * nz));
        const Vec3 n{rad * std::cos(golden * k), rad * std::sin(golden * k), nz};
        const ChartPoint s = radial_point(z, n, target);
        if (admissible(s)) out.push_back(chart_.canonicalize(s));
      }
    }
    return out;
  }

  /// Inserts an admissible point within eps of q (q itself inside a zone)
  /// that keeps the net separated. Returns false when no candidate works.
  bool cover_from_outside(const ChartPoint& q, const std::vector<ChartPoint>& shell) {
    for (const auto& s : cover_options(q, shell)) {
      if (covered(s)) continue;
      insert(s);
      return true;
    }
    return false;
  }

  /// Last resort for a zone probe: inserts the nearest admissible cover and
  /// removes the points (none of the first `pinned`) that were blocking it.
  /// The holes this opens are outside the zones and get repaired normally.
  bool relocate_cover(const ChartPoint& q, const std::vector<ChartPoint>& shell, std::size_t pinned) {
    for (const auto& s : cover_options(q, shell)) {
      std::vector<std::uint32_t> blockers;
      bool blocked_by_pinned = false;
      grid_.for_each_near(s, eps_, [&](std::uint32_t id) {
        if (!closer_than(field_, s, chart_.lift_near(s, points_[id]), eps_)) return;
        blockers.push_back(id);
        if (id < pinned) blocked_by_pinned = true;
      });
      if (blocked_by_pinned) continue;
      for (std::uint32_t id : blockers) {
        grid_.erase(id, points_[id]);
        alive_[id] = 0;
      }
      insert(s);
      return true;
    }
    return false;
  }

 private:
  /// Admissible points within eps of q, nearest first.
  std::vector<ChartPoint> cover_options(const ChartPoint& q, const std::vector<ChartPoint>& shell) const {
    std::vector<std::pair<double, ChartPoint>> options;
    for (const auto& z : zones_) {
      const Vec3 dir = chart_.min_image(q - z.centre);
      const double len = norm(dir);
      if (len > 0.0) {
        const ChartPoint s = radial_point(z, dir / len, z.radius * (1.0 + 1e-9));
        if (admissible(s)) options.push_back({0.0, chart_.canonicalize(s)});
      }
    }
    for (const auto& s : shell)
      if (norm(chart_.min_image(s - q)) < eps_) options.push_back({0.0, s});
    for (auto& [key, s] : options) key = segment_upper_bound(field_, q, chart_.lift_near(q, s));
    std::stable_sort(options.begin(), options.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<ChartPoint> out;
    for (const auto& [key, s] : options)
      if (closer_than(field_, q, chart_.lift_near(q, s), eps_)) out.push_back(s);
    return out;
  }

  ChartPoint radial_point(const ExclusionZone& z, const Vec3& n, double target) const {
    double t = target / std::sqrt(n.x * n.x + n.y * n.y + field_.zz(z.centre.y) * n.z * n.z);
    for (int it = 0; it < 3; ++it) {
      const double d = shoot(field_, z.centre, z.centre + t * n).length;
      t *= target / d;
    }
    while (shoot(field_, z.centre, z.centre + t * n).length < target) t *= 1.0 + 1e-9;
    return z.centre + t * n;
  }

  const MetricField& field_;
  TorusChart chart_;
  double eps_;
  std::vector<ExclusionZone> zones_;
  std::vector<ChartPoint> points_;
  std::vector<char> alive_;
  PeriodicGrid grid_;
};

struct ProbeTally {
  std::vector<ChartPoint> witnesses;
  std::size_t probes = 0;
  std::size_t exact = 0;
  int deepest = 0;
};

enum class CellVerdict { Covered, Refine, Witness };

// Adaptive density certification of one base cell: breadth-first
// refinement, stopping at the first uncovered probe.
class DensityChecker {
 public:
  DensityChecker(const MetricField& field, const std::vector<ChartPoint>& points, const PeriodicGrid& grid,
                 double epsilon)
      : field_(field), chart_(field.chart()), points_(points), grid_(grid), eps_(epsilon) {}

  void check_base_cell(const ChartPoint& centre, double side, ProbeTally& tally) const {
    std::vector<ChartPoint> frontier{centre}, next;
    for (int level = 0; !frontier.empty(); ++level) {
      tally.deepest = std::max(tally.deepest, level);
      next.clear();
      for (const auto& x : frontier) {
        switch (judge(x, side, level, tally)) {
          case CellVerdict::Covered:
            break;
          case CellVerdict::Witness:
            tally.witnesses.push_back(x);
            return;
          case CellVerdict::Refine: {
            const double h = side / 4.0;
            for (int c = 0; c < 8; ++c)
              next.push_back(x + Vec3{(c & 1) ? h : -h, (c & 2) ? h : -h, (c & 4) ? h : -h});
          }
        }
      }
      if (!next.empty() && (level + 1 > max_refinement || next.size() > max_frontier)) {
        // Unresolved: report the probe closest to being uncovered.
        tally.witnesses.push_back(next.front());
        return;
      }
      frontier.swap(next);
      side /= 2.0;
    }
  }

 private:
  static constexpr std::size_t max_frontier = 1u << 16;

  CellVerdict judge(const ChartPoint& x, double side, int level, ProbeTally& tally) const {
    ++tally.probes;
    const double kappa = std::sqrt(1.0 + field_.bump().max_on(x.y - side / 2, x.y + side / 2));
    const double margin = kappa * (std::sqrt(3.0) / 2.0) * side;

    double best = inf;
    near_.clear();
    grid_.for_each_near(x, eps_, [&](std::uint32_t id) {
      const ChartPoint lift = chart_.lift_near(x, points_[id]);
      if (norm(lift - x) >= eps_) return;
      near_.push_back(lift);
      best = std::min(best, segment_upper_bound(field_, x, lift));
    });
    if (best + margin < eps_) return CellVerdict::Covered;

    if (best >= eps_ || level >= exact_from_level) {
      for (const auto& lift : near_) {
        double d = inf;
        ++tally.exact;
        if (closer_than(field_, x, lift, std::min(best, eps_), &d)) best = std::min(best, d);
      }
      if (best >= eps_) return CellVerdict::Witness;
      if (best + margin < eps_) return CellVerdict::Covered;
    }
    return CellVerdict::Refine;
  }

  const MetricField& field_;
  TorusChart chart_;
  const std::vector<ChartPoint>& points_;
  const PeriodicGrid& grid_;
  double eps_;
  static thread_local std::vector<ChartPoint> near_;
};

thread_local std::vector<ChartPoint> DensityChecker::near_;

void require_epsilon(const MetricField& field, double epsilon) {
  if (!(epsilon > 0.0) || epsilon > field.chart().period() / 20.0)
    throw Error(ErrorKind::InvalidArgument, "epsilon must lie in (0, L/20]");
}

}  // namespace

std::vector<ExclusionZone> exclusion_zones(const Configuration& conf) {
  if (!conf.solved()) throw Error(ErrorKind::InvalidArgument, "configuration has no circumcentres");
  return {{*conf.c_plus, conf.circumradius}, {*conf.c_minus, conf.circumradius}};
}

std::ptrdiff_t nearest_point(const MetricField& field, const PointSet& net, const ChartPoint& q, double radius,
                             double* distance) {
  std::ptrdiff_t best = -1;
  double best_d = inf;
  const auto& chart = field.chart();
  for (std::size_t i = 0; i < net.points.size(); ++i) {
    const ChartPoint lift = chart.lift_near(q, net.points[i]);
    if (norm(lift - q) >= std::min(radius, best_d)) continue;
    const double ub = segment_upper_bound(field, q, lift);
    if (distance_lower_bound(field, q, lift, ub) >= best_d) continue;
    const double d = std::min(shoot(field, q, lift).length, ub);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::ptrdiff_t>(i);
    }
  }
  if (distance) *distance = best_d;
  return best;
}

NetVerification verify_net(const MetricField& field, const PointSet& net, double grid_spacing,
                           std::span<const ExclusionZone> zones, Execution execution) {
  require_epsilon(field, net.epsilon);
  const double eps = net.epsilon;
  if (!(grid_spacing > 0.0) || grid_spacing > eps / 4.0 * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidArgument, "grid spacing must lie in (0, eps/4]");
  const TorusChart& chart = field.chart();
  const double period = chart.period();

  PeriodicGrid grid(chart, eps);
  for (std::size_t i = 0; i < net.points.size(); ++i)
    grid.insert(static_cast<std::uint32_t>(i), chart.canonicalize(net.points[i]));

  NetVerification out;

  // Separation: only pairs closer than eps in the chart can violate it, the
  // wider stretch_bound() * eps window is kept as a cross-check.
  const double window = field.stretch_bound() * eps;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> sep(net.points.size());
  for_each_index(execution, static_cast<std::ptrdiff_t>(net.points.size()), [&](std::ptrdiff_t i) {
    const ChartPoint& a = net.points[i];
    grid.for_each_near(a, window, [&](std::uint32_t j) {
      if (j <= static_cast<std::size_t>(i)) return;
      const ChartPoint lift = chart.lift_near(a, net.points[j]);
      if (norm(lift - a) > window) return;
      if (closer_than(field, a, lift, eps)) sep[i].push_back({static_cast<std::size_t>(i), j});
    });
    std::sort(sep[i].begin(), sep[i].end());
  });
  for (auto& v : sep) out.separation_witnesses.insert(out.separation_witnesses.end(), v.begin(), v.end());
  out.separation = out.separation_witnesses.empty();

  // Density: base grid refined where the Lipschitz margin is inconclusive.
  const int m = static_cast<int>(std::ceil(period / grid_spacing - 1e-9));
  const double side = period / m;
  DensityChecker checker(field, net.points, grid, eps);
  std::vector<ProbeTally> slabs(m);
  for_each_index(execution, m, [&](std::ptrdiff_t i) {
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const ChartPoint x{-period / 2 + (i + 0.5) * side, -period / 2 + (j + 0.5) * side,
                           -period / 2 + (k + 0.5) * side};
        checker.check_base_cell(x, side, slabs[i]);
      }
  });
  for (const auto& t : slabs) {
    out.density_witnesses.insert(out.density_witnesses.end(), t.witnesses.begin(), t.witnesses.end());
    out.probes += t.probes;
    out.exact_solves += t.exact;
    out.deepest_level = std::max(out.deepest_level, t.deepest);
  }
  out.density = out.density_witnesses.empty();

  std::vector<bool> fixed(net.points.size(), false);
  for (std::size_t f : net.fixed_indices)
    if (f < fixed.size()) fixed[f] = true;
  for (const auto& z : zones) {
    for (std::size_t i = 0; i < net.points.size(); ++i) {
      const double r = fixed[i] ? z.radius * (1.0 - 1e-10) : z.radius;
      if (inside_zone(field, z, net.points[i], r)) out.zone_witnesses.push_back(i);
    }
  }
  std::sort(out.zone_witnesses.begin(), out.zone_witnesses.end());
  out.zone_witnesses.erase(std::unique(out.zone_witnesses.begin(), out.zone_witnesses.end()),
                           out.zone_witnesses.end());
  out.zones_empty = out.zone_witnesses.empty();
  return out;
}

PointSet generate_net(const MetricField& field, std::span<const ChartPoint> fixed,
                      std::span<const ExclusionZone> zones, double epsilon, std::uint64_t seed,
                      const NetOptions& options, NetStats* stats) {
  require_epsilon(field, epsilon);
  if (!(options.grid_fraction > 0.0) || options.grid_fraction > 0.25)
    throw Error(ErrorKind::InvalidArgument, "grid_fraction must lie in (0, 1/4]");
  for (const auto& z : zones)
    if (!(z.radius + options.exclusion_margin * epsilon < epsilon))
      throw Error(ErrorKind::CoverageImpossible, "exclusion zone radius plus margin reaches eps");

  const TorusChart& chart = field.chart();
  const double period = chart.period();
  const double kappa = field.stretch_bound();
  NetStats st;

  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  NetBuilder builder(field, zones, epsilon, options.exclusion_margin);
  PointSet net;
  net.epsilon = epsilon;
  net.seed = seed;
  for (std::size_t i = 0; i < fixed.size(); ++i)
    for (std::size_t j = i + 1; j < fixed.size(); ++j)
      if (closer_than(field, fixed[i], chart.lift_near(fixed[i], fixed[j]), epsilon))
        throw Error(ErrorKind::InvalidArgument, "fixed points are closer than eps");
  for (const auto& q : fixed) net.fixed_indices.push_back(builder.insert(q));

  // Candidate pool: Cranley-Patterson rotated Halton points plus zone shells.
  std::uint64_t state = seed;
  const Vec3 shift{unit_double(state), unit_double(state), unit_double(state)};
  const double ratio = period / epsilon;
  const auto count = static_cast<std::size_t>(std::llround(options.pool_factor * ratio * ratio * ratio));
  std::vector<ChartPoint> pool;
  pool.reserve(count + 2 * static_cast<std::size_t>(options.shell_points));
  for (std::size_t i = 1; i <= count; ++i) {
    Vec3 h{radical_inverse(i, 2), radical_inverse(i, 3), radical_inverse(i, 5)};
    for (int a = 0; a < 3; ++a) h[a] = std::fmod(h[a] + shift[a], 1.0);
    pool.push_back(chart.canonicalize(h * period - Vec3{period / 2, period / 2, period / 2}));
  }
  const std::vector<ChartPoint> shell = builder.shell_candidates(options.shell_points);
  pool.insert(pool.end(), shell.begin(), shell.end());
  st.pool_size = pool.size();
  st.shell_candidates = shell.size();

  // Zone interiors stay in the pool as demand points that must be covered
  // but cannot be inserted.
  std::vector<char> supply(pool.size(), 1);
  if (!builder.zones().empty()) {
    PeriodicGrid probe(chart, epsilon);
    for (std::size_t i = 0; i < pool.size(); ++i) probe.insert(static_cast<std::uint32_t>(i), pool[i]);
    for (const auto& z : builder.zones())
      probe.for_each_near(z.centre, z.radius, [&](std::uint32_t i) {
        if (supply[i] && inside_zone(field, z, pool[i], z.radius)) supply[i] = 0;
      });
  }

  PeriodicGrid pool_grid(chart, epsilon);
  for (std::size_t i = 0; i < pool.size(); ++i) pool_grid.insert(static_cast<std::uint32_t>(i), pool[i]);

  std::vector<double> keys(pool.size(), inf);
  auto key_from = [&](const ChartPoint& s, const ChartPoint& q) {
    const Vec3 d = chart.min_image(q - s);
    const double e = norm(d);
    return e <= 2.0 * epsilon ? segment_upper_bound(field, s, s + d) : kappa * e;
  };
  if (!builder.points().empty()) {
    for (std::size_t i = 0; i < pool.size(); ++i) {
      double k = inf;
      for (const auto& s : builder.points()) k = std::min(k, key_from(s, pool[i]));
      keys[i] = k;
    }
  }
  IndexedMaxHeap heap(keys);

  auto relax_around = [&](const ChartPoint& s) {
    const double radius = heap.top_key();
    if (radius == inf) {
      for (std::size_t i = 0; i < pool.size(); ++i)
        if (heap.contains(static_cast<std::uint32_t>(i))) {
          const double k = key_from(s, pool[i]);
          if (k < keys[i]) heap.decrease(static_cast<std::uint32_t>(i), k);
        }
      return;
    }
    pool_grid.for_each_near(s, radius, [&](std::uint32_t i) {
      if (!heap.contains(i)) return;
      const Vec3 d = chart.min_image(pool[i] - s);
      if (norm(d) >= keys[i]) return;
      const double k = key_from(s, pool[i]);
      if (k < keys[i]) heap.decrease(i, k);
    });
  };

  while (!heap.empty() && heap.top_key() >= epsilon) {
    const std::uint32_t i = heap.top();
    heap.pop();
    const ChartPoint x = pool[i];
    if (builder.covered(x)) continue;
    const std::size_t before = builder.points().size();
    if (supply[i]) {
      builder.insert(x);
      ++st.greedy_insertions;
    } else if (builder.cover_from_outside(x, shell)) {
      ++st.zone_covers;
    } else {
      continue;
    }
    for (std::size_t n = before; n < builder.points().size(); ++n) relax_around(builder.points()[n]);
  }

  const auto greedy_done = clock::now();
  st.greedy_seconds = std::chrono::duration<double>(greedy_done - started).count();

  // Repair rounds against the certifier.
  const double spacing = options.grid_fraction * epsilon;
  NetVerification v;
  for (int round = 0;; ++round) {
    net.points = builder.live_points();
    v = verify_net(field, net, spacing, zones, options.execution);
    if ((v.density && v.separation && v.zones_empty) || round >= options.max_repair_rounds) break;
    if (!v.separation || !v.zones_empty) break;
    st.repair_rounds = round + 1;
    bool progress = false;
    for (const auto& x : v.density_witnesses) {
      if (builder.covered(x)) continue;
      if (builder.admissible(x)) {
        builder.insert(x);
      } else if (!builder.cover_from_outside(x, shell) &&
                 !builder.relocate_cover(x, shell, net.fixed_indices.size())) {
        throw Error(ErrorKind::CoverageImpossible, "a probe inside an exclusion zone cannot be covered");
      }
      ++st.repair_insertions;
      progress = true;
    }
    if (!progress) break;
  }
  net.density_certified = v.density;
  net.separation_certified = v.separation && v.zones_empty;
  st.certify_seconds = std::chrono::duration<double>(clock::now() - greedy_done).count();
  if (stats) *stats = st;
  return net;
}

PointSet generate_net(const MetricField& field, const Configuration& conf, double epsilon, std::uint64_t seed,
                      const NetOptions& options, NetStats* stats) {
  const auto zones = exclusion_zones(conf);
  const std::array<ChartPoint, 4> fixed{conf.u, conf.v, conf.w, conf.p};
  return generate_net(field, fixed, zones, epsilon, seed, options, stats);
}

}  // namespace tdel
