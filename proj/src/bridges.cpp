#include "qsx/bridges.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "qsx/error.hpp"
#include "qsx/kernels.hpp"
#include "qsx/rng.hpp"

namespace qsx {

namespace {

constexpr double kHalfSqrt3 = 0.86602540378443864676;

double interval_rel(const Interval& a, const Interval& b) {
  const double gap = a.hi < b.lo ? b.lo - a.hi : (b.hi < a.lo ? a.lo - b.hi : 0.0);
  const double len = std::min(a.length(), b.length());
  if (len <= 0.0) return gap > 0.0 ? kInf : 0.0;
  return gap / len;
}

bool same_point(ConstPointView a, ConstPointView b) { return std::equal(a.begin(), a.end(), b.begin()); }

bool share_endpoint(const Bridge& a, const Bridge& b) {
  return same_point(a.p, b.p) || same_point(a.p, b.q) || same_point(a.q, b.p) || same_point(a.q, b.q);
}

double endpoint_pair_distance(const Bridge& a, const Bridge& b) {
  return std::min({distance(a.p, b.p), distance(a.p, b.q), distance(a.q, b.p), distance(a.q, b.q)});
}

Point random_unit(Rng& rng, std::size_t n) {
  Point u(n);
  double s = 0.0;
  do {
    s = 0.0;
    for (auto& c : u) {
      c = rng.uniform(-1.0, 1.0);
      s += c * c;
    }
  } while (s > 1.0 || s < 1e-6);
  s = std::sqrt(s);
  for (auto& c : u) c /= s;
  return u;
}

}  // namespace

Bridge make_bridge(ConstPointView p, ConstPointView q, std::size_t k, std::size_t n) {
  const std::size_t dim = p.size();
  if (q.size() != dim) throw InvalidArgument("make_bridge: endpoint dimensions differ");
  if (k <= n || k > dim) {
    throw InvalidArgument("make_bridge: dimension index " + std::to_string(k) + " outside (" +
                          std::to_string(n) + ", " + std::to_string(dim) + "]");
  }
  if (p[k - 1] != 0.0 || q[k - 1] != 0.0) {
    throw InvalidArgument("make_bridge: endpoints must have zero coordinate " + std::to_string(k));
  }
  const double len = distance(p, q);
  if (!(len > 0.0)) throw InvalidArgument("degenerate bridge");
  Bridge b{Point(p.begin(), p.end()), Point(q.begin(), q.end()), Point(dim), k};
  for (std::size_t i = 0; i < dim; ++i) b.apex[i] = 0.5 * (p[i] + q[i]);
  b.apex[k - 1] = kHalfSqrt3 * len;
  return b;
}

Point bridge_point(const Bridge& b, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("bridge_point: s must lie in [0, 1]");
  if (s == 1.0) return b.q;
  if (s == 0.5) return b.apex;
  Point out(b.p.size());
  if (s < 0.5) {
    const double t = 2.0 * s;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = b.p[i] + t * (b.apex[i] - b.p[i]);
  } else {
    const double t = 2.0 * s - 1.0;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = b.apex[i] + t * (b.q[i] - b.apex[i]);
  }
  return out;
}

double bridge_distance(const Bridge& a, const Bridge& b) {
  return std::min({segment_distance(a.p, a.apex, b.p, b.apex), segment_distance(a.p, a.apex, b.apex, b.q),
                   segment_distance(a.apex, a.q, b.p, b.apex), segment_distance(a.apex, a.q, b.apex, b.q)});
}

double bridge_chart_bilipschitz(const Bridge& b, std::size_t grid) {
  if (grid < 2) throw InvalidArgument("bridge_chart_bilipschitz: grid needs two points");
  const double len = b.chord();
  std::vector<Point> pts(grid);
  std::vector<double> ts(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    const double s = double(i) / double(grid - 1);
    ts[i] = s * len;
    pts[i] = bridge_point(b, s);
  }
  return kernels::pair_max(grid, [&](std::size_t i, std::size_t j) {
    const double dt = ts[j] - ts[i];
    const double dx = distance(pts[i], pts[j]);
    return std::max(dx / dt, dt / dx);
  });
}

// ---------------------------------------------------------------------------

CrowdingResult crowding_bound_check(const std::vector<Interval>& intervals, double d) {
  if (!(d > 0.0)) throw InvalidArgument("crowding_bound_check: d must be positive");
  std::vector<Interval> iv = intervals;
  std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i < iv.size(); ++i) {
    if (iv[i].hi < iv[i].lo) throw InvalidArgument("crowding_bound_check: malformed interval");
    if (i > 0 && !(iv[i - 1].hi < iv[i].lo)) throw InvalidArgument("crowding_bound_check: overlapping intervals");
  }
  CrowdingResult res;
  res.bound = 2.0 * d + 3.0;
  const std::size_t k = iv.size();
  if (k == 0) return res;
  std::vector<std::vector<bool>> adj(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) adj[i][j] = adj[j][i] = interval_rel(iv[i], iv[j]) <= d;

  if (k <= 20) {
    std::vector<std::uint32_t> nbr(k, 0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (adj[i][j]) nbr[i] |= 1u << j;
    std::size_t best = 0;
    // Bron-Kerbosch with pivoting on bitmasks.
    auto bk = [&](auto&& self, std::uint32_t r, std::uint32_t p, std::uint32_t x) -> void {
      if (p == 0 && x == 0) {
        best = std::max<std::size_t>(best, std::popcount(r));
        return;
      }
      if (std::popcount(r) + std::popcount(p) <= static_cast<int>(best)) return;
      const std::uint32_t px = p | x;
      const int u = std::countr_zero(px);
      std::uint32_t cand = p & ~nbr[u];
      while (cand) {
        const int v = std::countr_zero(cand);
        cand &= cand - 1;
        const std::uint32_t bit = 1u << v;
        self(self, r | bit, p & nbr[v], x & nbr[v]);
        p &= ~bit;
        x |= bit;
      }
    };
    bk(bk, 0u, k == 32 ? ~0u : ((1u << k) - 1u), 0u);
    res.count = best;
    res.exact = true;
  } else {
    std::size_t best = 1;
    for (std::size_t s = 0; s < k; ++s) {
      std::vector<std::size_t> clique{s};
      for (std::size_t v = 0; v < k; ++v) {
        if (v == s) continue;
        if (std::all_of(clique.begin(), clique.end(), [&](std::size_t u) { return adj[u][v]; })) clique.push_back(v);
      }
      best = std::max(best, clique.size());
    }
    res.count = best;
    res.exact = false;
  }
  res.ok = static_cast<double>(res.count) <= res.bound;
  return res;
}

// ---------------------------------------------------------------------------

const BridgeCalibration& calibrate_bridges(std::uint64_t seed, std::size_t samples) {
  static std::mutex mu;
  static std::map<std::pair<std::uint64_t, std::size_t>, BridgeCalibration> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({seed, samples});
  if (it != cache.end()) return it->second;

  struct Outcome {
    double pair_rel = 0.0;
    double bridge_rel = 0.0;
  };
  std::vector<Outcome> out(samples);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(samples); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    Rng rng(derive_seed(seed, i));
    const std::size_t n = 1 + i % 3;
    const std::size_t dim = n + 1;
    Point p1(dim, 0.0), q1(dim, 0.0);
    q1[0] = 1.0;
    const double l2 = std::pow(10.0, rng.uniform(-2.5, 0.0));
    const Point u = random_unit(rng, n);
    const Point w = random_unit(rng, n);
    Point mid(n, 0.0);
    const double tau = rng.uniform(0.0, 6.0);
    switch (i % 4) {
      case 0:
      case 1:  // near an endpoint of the long chord
        mid[0] = rng.coin() ? 1.0 : 0.0;
        for (std::size_t c = 0; c < n; ++c) mid[c] += (0.5 + tau) * l2 * w[c];
        break;
      case 2:  // near the interior of the long chord
        mid[0] = rng.uniform();
        for (std::size_t c = 0; c < n; ++c) mid[c] += (0.5 + tau) * l2 * w[c];
        break;
      default:  // anywhere nearby
        for (std::size_t c = 0; c < n; ++c) mid[c] = rng.uniform(-2.0, 3.0);
        break;
    }
    Point p2(dim, 0.0), q2(dim, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
      p2[c] = mid[c] - 0.5 * l2 * u[c];
      q2[c] = mid[c] + 0.5 * l2 * u[c];
    }
    const Bridge b1 = make_bridge(p1, q1, dim, n);
    const Bridge b2 = make_bridge(p2, q2, dim, n);
    const double minlen = std::min(1.0, l2);
    out[i] = {endpoint_pair_distance(b1, b2) / minlen, bridge_distance(b1, b2) / minlen};
  }
  BridgeCalibration cal;
  cal.seed = seed;
  cal.samples = samples;
  cal.threshold = 1.0;
  cal.worst_bridge_ratio = 1.0;
  for (const auto& o : out) {
    if (o.bridge_rel < 1.0 && o.pair_rel > cal.threshold) {
      cal.threshold = o.pair_rel;
      cal.worst_bridge_ratio = o.bridge_rel;
    }
  }
  return cache.emplace(std::make_pair(seed, samples), cal).first->second;
}

double bridge_threshold_c0(const PowerModulus& modulus, const BridgeCalibration& cal) {
  return std::max(1.0, 1.0 / modulus_invert(modulus, 1.0 / (2.0 * cal.threshold)));
}

bool conflicting(const Interval& a, const Interval& b, double c0) { return interval_rel(a, b) < c0; }

DimensionAssignment assign_dimensions_with_threshold(const std::vector<GapEndpoints>& gaps, std::size_t n,
                                                     double c0) {
  if (!(c0 > 0.0)) throw InvalidArgument("assign_dimensions: C0 must be positive");
  DimensionAssignment a;
  a.c0 = c0;
  a.n = n;
  const std::size_t g = gaps.size();
  a.palette_bound = std::ceil(2.0 * c0 + 3.0);
  // greedy colouring never needs more colours than there are gaps
  a.palette_capped = a.palette_bound > static_cast<double>(std::max<std::size_t>(g, 1));
  a.n0 = a.palette_capped ? std::max<std::size_t>(g, 1) : static_cast<std::size_t>(a.palette_bound);
  a.total_dim = n + a.n0 + 1;
  for (std::size_t i = 0; i < g; ++i) {
    if (!(gaps[i].gap.length() > 0.0)) throw InvalidArgument("assign_dimensions: gap of zero length");
    if (same_point(gaps[i].image_lo, gaps[i].image_hi)) {
      throw InvalidArgument("assign_dimensions: gap endpoints share an image");
    }
  }
  a.order.resize(g);
  for (std::size_t i = 0; i < g; ++i) a.order[i] = i;
  std::sort(a.order.begin(), a.order.end(), [&](std::size_t x, std::size_t y) {
    const double lx = gaps[x].gap.length(), ly = gaps[y].gap.length();
    if (lx != ly) return lx > ly;
    return gaps[x].gap.lo < gaps[y].gap.lo;
  });
  a.gap_dims.assign(g, 0);
  const std::size_t palette = a.n0 + 1;
  std::vector<char> used(palette);
  std::vector<std::size_t> conflicts_of(g, 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(g); ++ii) {
    const auto r = static_cast<std::size_t>(ii);
    std::size_t c = 0;
    for (std::size_t s = 0; s < r; ++s) c += conflicting(gaps[a.order[r]].gap, gaps[a.order[s]].gap, c0) ? 1 : 0;
    conflicts_of[r] = c;
  }
  for (std::size_t r = 0; r < g; ++r) {
    const std::size_t gi = a.order[r];
    std::fill(used.begin(), used.end(), 0);
    for (std::size_t s = 0; s < r; ++s) {
      const std::size_t gj = a.order[s];
      if (conflicting(gaps[gi].gap, gaps[gj].gap, c0)) used[a.gap_dims[gj] - n - 1] = 1;
    }
    a.conflict_edges += conflicts_of[r];
    a.max_conflicts = std::max(a.max_conflicts, conflicts_of[r]);
    auto free = std::find(used.begin(), used.end(), 0);
    if (free == used.end()) {
      throw InvariantViolation("assign_dimensions: gap " + std::to_string(gi) + " has conflicts in all " +
                               std::to_string(palette) + " dimensions");
    }
    a.gap_dims[gi] = n + 1 + static_cast<std::size_t>(free - used.begin());
  }
  std::vector<char> seen(palette, 0);
  for (auto k : a.gap_dims) seen[k - n - 1] = 1;
  a.dims_used = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 1));
  return a;
}

DimensionAssignment assign_dimensions(const std::vector<GapEndpoints>& gaps, std::size_t n,
                                      const PowerModulus& modulus, double c, std::uint64_t calibration_seed) {
  if (!(c >= 1.0)) throw InvalidArgument("assign_dimensions: uniform perfectness constant must be >= 1");
  const auto& cal = calibrate_bridges(calibration_seed);
  auto a = assign_dimensions_with_threshold(gaps, n, bridge_threshold_c0(modulus, cal));
  a.pair_threshold = cal.threshold;
  return a;
}

// ---------------------------------------------------------------------------

BridgeSeparation bridge_separation_report(const std::vector<Bridge>& bridges) {
  const std::size_t b = bridges.size();
  struct Row {
    std::size_t pairs = 0, sampled = 0;
    double min_d = kInf, min_s = kInf, up = 0.0, lo = 0.0, min_rel = kInf;
    std::vector<std::string> bad;
  };
  std::vector<Row> rows(b);
  std::vector<std::vector<Point>> samples(b);
  for (std::size_t i = 0; i < b; ++i) {
    samples[i].reserve(64);
    for (int t = 0; t < 64; ++t) samples[i].push_back(bridge_point(bridges[i], t / 63.0));
  }
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(b); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    Row& row = rows[i];
    for (std::size_t j = i + 1; j < b; ++j) {
      const Bridge& x = bridges[i];
      const Bridge& y = bridges[j];
      ++row.pairs;
      const double d = bridge_distance(x, y);
      const double dp = endpoint_pair_distance(x, y);
      const double minlen = std::min(x.chord(), y.chord());
      const bool contact = share_endpoint(x, y);
      if (!contact) {
        row.min_d = std::min(row.min_d, d);
        if (d <= 1e-12) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "bridges " << i << " and " << j << " (dims " << x.dim_index << ", " << y.dim_index
              << ") intersect: distance " << d;
          row.bad.push_back(msg.str());
        }
      }
      if (dp > 0.0 && d > 0.0) {
        row.up = std::max(row.up, d / dp);
        row.lo = std::max(row.lo, dp / d);
      }
      if (x.dim_index != y.dim_index) row.min_rel = std::min(row.min_rel, d / minlen);
      if (d < 2.0 * minlen) {
        ++row.sampled;
        double s = kInf;
        for (const auto& u : samples[i])
          for (const auto& v : samples[j]) s = std::min(s, distance(u, v));
        row.min_s = std::min(row.min_s, s);
      }
    }
  }
  BridgeSeparation rep;
  for (auto& r : rows) {
    rep.pairs += r.pairs;
    rep.sampled_pairs += r.sampled;
    rep.min_distance = std::min(rep.min_distance, r.min_d);
    rep.min_sampled_distance = std::min(rep.min_sampled_distance, r.min_s);
    rep.upper_constant = std::max(rep.upper_constant, r.up);
    rep.lower_constant = std::max(rep.lower_constant, r.lo);
    rep.min_relative_distance = std::min(rep.min_relative_distance, r.min_rel);
    rep.intersections.insert(rep.intersections.end(), r.bad.begin(), r.bad.end());
  }
  return rep;
}

double bridge_distance_lower_constant(std::uint64_t seed, std::size_t trials, std::size_t n) {
  if (n == 0) throw InvalidArgument("bridge_distance_lower_constant: n must be positive");
  std::vector<double> best(trials, kInf);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(trials); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    Rng rng(derive_seed(seed, i));
    Point a(n + 1, 0.0), b(n + 1, 0.0), z(n + 1, 0.0);
    for (;;) {
      for (std::size_t c = 0; c < n; ++c) {
        a[c] = rng.uniform(-1.0, 1.0);
        b[c] = rng.uniform(-1.0, 1.0);
        z[c] = rng.uniform(-1.0, 1.0);
      }
      if (i % 2 == 0) {  // z on the line through a and b
        const double t = rng.uniform(-2.0, 3.0);
        for (std::size_t c = 0; c < n; ++c) z[c] = a[c] + t * (b[c] - a[c]);
      }
      const double za = distance(z, a), zb = distance(z, b);
      if (za > 0.0 && za <= zb && distance(a, b) > 1e-9) break;
    }
    const Bridge br = make_bridge(a, b, n + 1, n);
    const double za = distance(z, a);
    double m = kInf;
    for (int t = 0; t <= 256; ++t) {
      const Point x = bridge_point(br, t / 256.0);
      m = std::min(m, distance(z, x) / (za + distance(x, a)));
    }
    best[i] = m;
  }
  return *std::min_element(best.begin(), best.end());
}

}  // namespace qsx
