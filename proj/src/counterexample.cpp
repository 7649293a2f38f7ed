#include "qsx/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "qsx/error.hpp"
#include "qsx/kernels.hpp"
#include "qsx/rng.hpp"

namespace qsx {

namespace {

double pow4(int e) { return std::ldexp(1.0, 2 * e); }

// Half-width of Q_k in the v directions and its t range.
double half_width(int k) { return k == 0 ? 1.0 : pow4(-k); }
double t_lo(int k) { return k == 0 ? -1.0 : std::ldexp(1.0, -k); }
double t_hi(int k) { return k == 0 ? 1.0 : std::ldexp(1.0, 1 - k); }

std::size_t next_pow2(double need) {
  std::size_t n = 1;
  while (static_cast<double>(n) < need) n <<= 1;
  return n;
}

// Lattice divisions along an axis of length `len` (unit coordinates):
// a power of two, at least 8 so the excluded squares fall on grid lines.
std::size_t divisions(double len, double unit_pitch, std::size_t points_per_face) {
  double need = std::max(8.0, std::ceil(len / unit_pitch));
  if (points_per_face >= 2) need = std::max(need, static_cast<double>(points_per_face - 1));
  if (need > 0x1p40) throw BudgetExceeded("face lattice too fine");
  return next_pow2(need);
}

double unit_pitch(std::size_t n, int m, int k) { return lattice_pitch_bound(n, m, k) / zeta(n, m).scale; }

// Visit every lattice point of one face of `b`; `fixed` is the normal axis.
template <class F>
void for_face_lattice(const Box& b, std::size_t fixed, double value, const std::vector<std::size_t>& div, F&& visit) {
  const std::size_t n = b.lo.size();
  std::vector<std::size_t> idx(n, 0);
  Point x(n);
  for (;;) {
    for (std::size_t a = 0; a < n; ++a) {
      if (a == fixed) x[a] = value;
      else x[a] = b.lo[a] + (b.hi[a] - b.lo[a]) / static_cast<double>(div[a]) * static_cast<double>(idx[a]);
    }
    if (idx[fixed] == 0) visit(static_cast<const Point&>(x));
    std::size_t a = 0;
    for (; a < n; ++a) {
      if (a == fixed) continue;
      if (++idx[a] <= div[a]) break;
      idx[a] = 0;
    }
    if (a == n) break;
  }
}

std::vector<std::size_t> face_divisions(const Box& b, double pitch, std::size_t ppf, std::size_t refine = 1) {
  std::vector<std::size_t> div(b.lo.size());
  for (std::size_t a = 0; a < div.size(); ++a) div[a] = divisions(b.hi[a] - b.lo[a], pitch, ppf) * refine;
  return div;
}

}  // namespace

// ---------------------------------------------------------------------------
// Boxes and similarities

bool Box::contains(ConstPointView x) const {
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

double Box::distance(ConstPointView x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    const double d = std::max({0.0, lo[i] - x[i], x[i] - hi[i]});
    s += d * d;
  }
  return std::sqrt(s);
}

double Box::diameter() const { return qsx::distance(lo, hi); }

Point Box::centre() const {
  Point c(lo.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

Point ScaleShift::apply(ConstPointView x) const {
  Point y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = scale * x[i] + shift[i];
  return y;
}

Point ScaleShift::invert(ConstPointView y) const {
  Point x(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (y[i] - shift[i]) / scale;
  return x;
}

Box ScaleShift::apply(const Box& b) const { return {apply(b.lo), apply(b.hi)}; }

ScaleShift zeta(std::size_t n, int m) {
  ScaleShift z;
  z.scale = pow4(-m) / 8.0;
  z.shift.assign(n, 0.0);
  z.shift[0] = 0.75 * pow4(-m);
  return z;
}

Point flip(ConstPointView x) {
  Point y(x.begin(), x.end());
  y.back() = 2.0 - y.back();
  return y;
}

Box BoxScene::unit_box(int k) const {
  Box b{Point(n), Point(n)};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    b.lo[i] = -half_width(k);
    b.hi[i] = half_width(k);
  }
  b.lo[n - 1] = t_lo(k);
  b.hi[n - 1] = t_hi(k);
  return b;
}

Box BoxScene::unit_flipped(int k) const {
  const Box b = unit_box(k);
  Box f{flip(b.lo), flip(b.hi)};
  std::swap(f.lo[n - 1], f.hi[n - 1]);
  return f;
}

Box BoxScene::box(int m, int k) const { return zetas.at(m).apply(unit_box(k)); }
Box BoxScene::flipped(int m, int k) const { return zetas.at(m).apply(unit_flipped(k)); }

bool BoxScene::in_domain(ConstPointView z) const {
  for (double c : z)
    if (!(std::abs(c) < 1.0)) return false;
  for (int k = 1; k <= k_max; ++k)
    if (unit_box(k).contains(z)) return false;
  return true;
}

double BoxScene::boundary_distance(ConstPointView z) const {
  double d = kInf;
  for (double c : z) d = std::min(d, 1.0 - std::abs(c));
  for (int k = 1; k <= k_max; ++k) d = std::min(d, unit_box(k).distance(z));
  return d;
}

bool BoxScene::on_frontier(int k, ConstPointView x) const {
  double vmax = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) vmax = std::max(vmax, std::abs(x[i]));
  const double t = x[n - 1];
  if (k == 0) return !(k_max >= 1 && t == 1.0 && vmax < 0.25);
  if (vmax == half_width(k)) return true;
  if (t == t_hi(k)) return false;  // covered by Q_{k-1}, or by the top of Q_0
  return k == k_max || vmax >= half_width(k + 1);
}

BoxScene make_box_scene(std::size_t n, int m_max, int k_max, std::size_t points_per_face) {
  if (n < 2) throw InvalidArgument("counterexample needs dimension n >= 2");
  if (m_max < 0 || k_max < 0 || m_max > 30 || k_max > 30) throw InvalidArgument("depth out of range");
  BoxScene s;
  s.n = n;
  s.m_max = m_max;
  s.k_max = k_max;
  s.points_per_face = points_per_face;
  for (int m = 0; m <= m_max; ++m) s.zetas.push_back(zeta(n, m));
  return s;
}

// ---------------------------------------------------------------------------
// Sites

double density_threshold(int m, int k) { return std::ldexp(1.0, -3 * (k + m)); }
double density_ratio(int m, int k) { return density_threshold(m, k) / (pow4(-m) * pow4(-k)); }
double lattice_pitch_bound(std::size_t n, int m, int k) {
  return density_threshold(m, k) / std::sqrt(static_cast<double>(n - 1));
}

const std::vector<std::size_t>& Scene::face_set(int m, int k) const {
  return sites.face_sets.at(static_cast<std::size_t>(m) * (boxes.k_max + 1) + k);
}

std::size_t estimate_site_count(std::size_t n, int m_max, int k_max, std::size_t points_per_face) {
  const BoxScene s = make_box_scene(n, m_max, k_max, points_per_face);
  double total = 1.0 + 2.0 * (m_max + 1);
  for (int m = 0; m <= m_max; ++m) {
    for (int k = 0; k <= k_max; ++k) {
      const Box b = s.unit_box(k);
      double pitch = unit_pitch(n, m, k);
      std::vector<double> pts(n);
      for (std::size_t a = 0; a < n; ++a) {
        double need = std::max(8.0, std::ceil((b.hi[a] - b.lo[a]) / pitch));
        if (points_per_face >= 2) need = std::max(need, static_cast<double>(points_per_face - 1));
        pts[a] = std::exp2(std::ceil(std::log2(need))) + 1.0;
      }
      for (std::size_t fixed = 0; fixed < n; ++fixed) {
        double face = 2.0;
        for (std::size_t a = 0; a < n; ++a)
          if (a != fixed) face *= pts[a];
        total += face;
      }
    }
  }
  return total > 1e18 ? static_cast<std::size_t>(1e18) : static_cast<std::size_t>(total);
}

Scene build_scene(std::size_t n, int m_max, int k_max, std::size_t points_per_face) {
  if (m_max < 1 || k_max < 1) throw InvalidArgument("build_scene needs m_max, k_max >= 1");
  Scene scene;
  scene.boxes = make_box_scene(n, m_max, k_max, points_per_face);
  const std::size_t estimate = estimate_site_count(n, m_max, k_max, points_per_face);
  if (estimate > kSiteBudget) {
    int m = m_max, k = k_max;
    while ((m > 1 || k > 1) && estimate_site_count(n, m, k, points_per_face) > kSiteBudget) {
      if (k >= m && k > 1) --k;
      else --m;
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "estimated %zu sites exceeds the budget of %zu; try m_max=%d k_max=%d", estimate,
                  kSiteBudget, m, k);
    throw BudgetExceeded(buf);
  }

  const BoxScene& bs = scene.boxes;
  SceneSites& out = scene.sites;
  out.points = PointSet(n);
  out.images = PointSet(n);
  out.face_sets.assign(static_cast<std::size_t>(m_max + 1) * (k_max + 1), {});
  out.face_pitch.assign(out.face_sets.size(), 0.0);
  std::map<Point, std::size_t> index;

  auto add = [&](const Point& p, const Point& img, SiteLabel label) {
    auto [it, fresh] = index.emplace(p, out.points.size());
    if (fresh) {
      out.points.push_back(p);
      out.images.push_back(img);
      out.labels.push_back(label);
    } else if (out.images.row(it->second) != img) {
      throw InvariantViolation("counterexample: shared site with two different images");
    }
    return it->second;
  };

  const Point origin(n, 0.0);
  add(origin, origin, {SiteKind::origin, 0, 0});
  for (int m = 0; m <= m_max; ++m) {
    const ScaleShift& z = bs.zetas[m];
    Point top(n, 0.0);
    top[n - 1] = 2.0;
    add(z.apply(origin), z.apply(top), {SiteKind::tip, m, 0});
    Point anchor(n, 0.0);
    anchor[n - 1] = -0.5;
    add(z.apply(anchor), z.apply(anchor), {SiteKind::anchor, m, 0});
    for (int k = 0; k <= k_max; ++k) {
      const Box b = bs.unit_box(k);
      const auto div = face_divisions(b, unit_pitch(n, m, k), points_per_face);
      auto& set = out.face_sets[static_cast<std::size_t>(m) * (k_max + 1) + k];
      double pitch = 0.0;
      for (std::size_t a = 0; a < n; ++a) pitch = std::max(pitch, (b.hi[a] - b.lo[a]) / div[a] * z.scale);
      out.face_pitch[static_cast<std::size_t>(m) * (k_max + 1) + k] = pitch;
      for (std::size_t fixed = 0; fixed < n; ++fixed) {
        for (double value : {b.lo[fixed], b.hi[fixed]}) {
          for_face_lattice(b, fixed, value, div, [&](const Point& u) {
            if (!bs.on_frontier(k, u)) return;
            const Point img = k == 0 ? z.apply(u) : z.apply(flip(u));
            set.push_back(add(z.apply(u), img, {SiteKind::face, m, k}));
          });
        }
      }
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
    }
  }
  return scene;
}

// ---------------------------------------------------------------------------
// Diagnostics

std::vector<DensityRow> density_check(const Scene& scene, int refinement) {
  if (refinement < 1) throw InvalidArgument("density probe refinement must be >= 1");
  const BoxScene& bs = scene.boxes;
  const auto& pts = scene.sites.points;
  std::vector<DensityRow> rows;
  for (int m = 0; m <= bs.m_max; ++m) {
    for (int k = 0; k <= bs.k_max; ++k) {
      const auto& set = scene.face_set(m, k);
      const Box b = bs.unit_box(k);
      const auto div = face_divisions(b, unit_pitch(bs.n, m, k), bs.points_per_face, refinement);
      PointSet probes(bs.n);
      for (std::size_t fixed = 0; fixed < bs.n; ++fixed) {
        for (double value : {b.lo[fixed], b.hi[fixed]}) {
          for_face_lattice(b, fixed, value, div, [&](const Point& u) {
            if (bs.on_frontier(k, u)) probes.push_back(bs.zetas[m].apply(u));
          });
        }
      }
      DensityRow row;
      row.m = m;
      row.k = k;
      row.threshold = density_threshold(m, k);
      row.probes = probes.size();
      row.sites = set.size();
      row.max_distance = set.empty() ? kInf : kernels::index_max(probes.size(), [&](std::size_t i) {
        double best = kInf;
        for (std::size_t j : set) best = std::min(best, distance(probes[i], pts[j]));
        return best;
      });
      rows.push_back(row);
    }
  }
  return rows;
}

double isometry_defect(const Scene& scene) {
  const auto& p = scene.sites.points;
  const auto& q = scene.sites.images;
  double worst = 0.0;
  for (const auto& set : scene.sites.face_sets) {
    const double d = kernels::pair_max(set.size(), [&](std::size_t i, std::size_t j) {
      const double a = distance(p[set[i]], p[set[j]]);
      return std::abs(distance(q[set[i]], q[set[j]]) - a) / a;
    });
    worst = std::max(worst, d);
  }
  return worst;
}

BilipschitzReport bilipschitz_constant(const SceneSites& sites, std::uint64_t seed, std::size_t pairs) {
  const std::size_t s = sites.points.size();
  if (s < 2) throw InvalidArgument("bi-Lipschitz constant needs at least two sites");
  BilipschitzReport rep;
  rep.exhaustive = s <= kExhaustiveSites;
  // candidate pairs, grouped into rows so the reduction order is fixed
  std::vector<std::vector<std::size_t>> partners(s);
  if (rep.exhaustive) {
    rep.pairs = s * (s - 1) / 2;
  } else {
    Rng rng(seed);
    for (std::size_t t = 0; t < pairs; ++t) {
      std::size_t i = rng.below(s), j = rng.below(s);
      if (i == j) continue;
      if (i > j) std::swap(i, j);
      partners[i].push_back(j);
      ++rep.pairs;
    }
  }
  std::vector<double> best(s, 0.0);
  std::vector<std::size_t> arg(s, 0);
  std::vector<char> collide(s, 0);
  const auto rows = static_cast<std::ptrdiff_t>(s);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto visit = [&](std::size_t j) {
      const double d = distance(sites.points[i], sites.points[j]);
      const double e = distance(sites.images[i], sites.images[j]);
      if (e == 0.0 || d == 0.0) {
        collide[i] = 1;
        return;
      }
      const double r = std::max(e / d, d / e);
      if (r > best[i]) {
        best[i] = r;
        arg[i] = j;
      }
    };
    if (rep.exhaustive) {
      for (std::size_t j = i + 1; j < s; ++j) visit(j);
    } else {
      for (std::size_t j : partners[i]) visit(j);
    }
  }
  for (std::size_t i = 0; i < s; ++i) {
    if (collide[i]) throw InvariantViolation("counterexample: coincident pair (injectivity violation)");
    if (best[i] > rep.constant) {
      rep.constant = best[i];
      rep.worst = {i, arg[i]};
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// John arcs

namespace {

// Follow the segment from z to b as a staircase; every step stays within a
// quarter of the current distance to the boundary.
void staircase_leg(const BoxScene& s, Point& z, const Point& b, std::vector<Point>& out) {
  const Point a = z;
  const double len = distance(a, b);
  if (len == 0.0) return;
  double u = 0.0;
  for (std::size_t guard = 0; u < 1.0; ++guard) {
    const double d = s.boundary_distance(z);
    if (!(d > 0.0) || guard > 1'000'000)
      throw InvariantViolation("john arc: pair not connectable by the staircase family");
    u = std::min(1.0, u + 0.25 * d / len);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double target = u == 1.0 ? b[i] : a[i] + u * (b[i] - a[i]);
      if (z[i] == target) continue;
      z[i] = target;
      if (!s.in_domain(z)) throw InvariantViolation("john arc: pair not connectable by the staircase family");
      out.push_back(z);
    }
  }
}

std::vector<Point> path_to_hub(const BoxScene& s, ConstPointView x) {
  const std::size_t n = s.n;
  if (!s.in_domain(x)) throw InvalidArgument("john arc endpoint outside the domain");
  Point hub(n, 0.0);
  hub[n - 1] = -0.5;
  std::vector<Point> out{Point(x.begin(), x.end())};
  Point z = out.front();
  if (s.k_max >= 1 && x[n - 1] > t_lo(s.k_max)) {
    std::size_t lat = 0;
    for (std::size_t i = 1; i + 1 < n; ++i)
      if (std::abs(x[i]) > std::abs(x[lat])) lat = i;
    // leave the column at 45 degrees before heading for the spine
    const double lambda = 0.5 * std::min(x[n - 1], 1.0 - std::abs(x[lat]));
    Point away = z;
    away[lat] += std::copysign(lambda, x[lat]);
    away[n - 1] -= lambda;
    staircase_leg(s, z, away, out);
    Point spine(n, 0.0);
    spine[lat] = std::copysign(0.6, x[lat]);
    staircase_leg(s, z, spine, out);
  }
  staircase_leg(s, z, hub, out);
  return out;
}

// Uniform in U, or pushed off a random frontier face by a log-uniform amount.
Point sample_domain_point(const BoxScene& s, Rng& rng) {
  const std::size_t n = s.n;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Point x(n);
    const double mode = rng.uniform();
    if (mode < 0.5) {
      for (auto& c : x) c = rng.uniform(-1.0, 1.0);
    } else {
      const int k = (mode < 0.75 || s.k_max == 0) ? 0 : 1 + static_cast<int>(rng.below(s.k_max));
      const Box b = s.unit_box(k);
      const std::size_t axis = rng.below(n);
      const bool high = rng.coin();
      for (std::size_t a = 0; a < n; ++a) x[a] = rng.uniform(b.lo[a], b.hi[a]);
      x[axis] = high ? b.hi[axis] : b.lo[axis];
      const double scale = k == 0 ? 1.0 : 2.0 * half_width(k);
      const double delta = scale * std::pow(10.0, rng.uniform(-4.0, -1.0));
      // into U: inward for the cube, outward for a removed box
      const double dir = (k == 0) == high ? -1.0 : 1.0;
      x[axis] += dir * delta;
    }
    if (s.in_domain(x)) return x;
  }
  throw InvariantViolation("john sampler: no domain point found");
}

}  // namespace

std::vector<Point> john_arc(const BoxScene& scene, ConstPointView x, ConstPointView y) {
  auto a = path_to_hub(scene, x);
  auto b = path_to_hub(scene, y);
  b.pop_back();  // the hub is already the last vertex of a
  a.insert(a.end(), b.rbegin(), b.rend());
  return a;
}

JohnReport john_constant(const BoxScene& scene, std::size_t pairs, std::uint64_t seed) {
  if (pairs == 0) throw InvalidArgument("john constant needs at least one pair");
  Rng rng(seed);
  std::vector<std::array<Point, 2>> sample(pairs);
  for (auto& p : sample) {
    p[0] = sample_domain_point(scene, rng);
    p[1] = sample_domain_point(scene, rng);
  }
  std::vector<double> best(pairs, 1.0);
  std::vector<Point> worst_z(pairs);
  std::vector<std::size_t> vertices(pairs, 0);
  const auto count = static_cast<std::ptrdiff_t>(pairs);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t ii = 0; ii < count; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto arc = john_arc(scene, sample[i][0], sample[i][1]);
    vertices[i] = arc.size();
    for (const auto& z : arc) {
      const double r = std::min(distance(z, sample[i][0]), distance(z, sample[i][1])) / scene.boundary_distance(z);
      if (r > best[i]) {
        best[i] = r;
        worst_z[i] = z;
      }
    }
  }
  JohnReport rep;
  rep.pairs = pairs;
  rep.x = sample[0][0];
  rep.y = sample[0][1];
  rep.z = sample[0][0];
  for (std::size_t i = 0; i < pairs; ++i) {
    rep.vertices += vertices[i];
    if (best[i] > rep.constant) {
      rep.constant = best[i];
      rep.x = sample[i][0];
      rep.y = sample[i][1];
      rep.z = worst_z[i];
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Obstruction certificate

namespace {

// Unit normal pointing from the face of Q_k through u into U; empty if u is
// not on a face that borders U from that side.
Point inward_normal(const BoxScene& s, int k, const Point& u) {
  const std::size_t n = s.n;
  Point nu(n, 0.0);
  if (k == 0) {
    for (std::size_t a = 0; a < n; ++a) {
      if (std::abs(u[a]) == 1.0) {
        nu[a] = -std::copysign(1.0, u[a]);
        return nu;
      }
    }
    return {};
  }
  for (std::size_t a = 0; a + 1 < n; ++a) {
    if (std::abs(u[a]) == half_width(k)) {
      nu[a] = std::copysign(1.0, u[a]);
      return nu;
    }
  }
  if (u[n - 1] == t_lo(k)) {
    nu[n - 1] = -1.0;
    return nu;
  }
  return {};
}

}  // namespace

ObstructionCertificate obstruction_certificate(const Scene& scene, const PowerModulus& eta, double john,
                                               std::uint64_t seed, std::size_t samples) {
  const BoxScene& bs = scene.boxes;
  const auto& pts = scene.sites.points;
  ObstructionCertificate cert;
  cert.john = john;
  cert.image_john = modulus_eval(eta, john);

  // Distortion of the distance to E_{m,k} at points pushed off a face into U.
  // With a the nearest site and b another site of E_{m,k} (where F is an
  // isometry), |x'-a'| <= eta(t) (|x'-a'| + |a-b|) for t = |x-a| / |x-b|, and
  // |x'-e'| >= (|a-b| - |x'-a'|) / eta(|x-b| / |x-e|) for every e.
  Rng rng(seed);
  double c1 = kInf, c2 = 0.0;
  for (std::size_t attempt = 0; cert.distortion_samples < samples && attempt < 64 * samples; ++attempt) {
    const int m = static_cast<int>(rng.below(bs.m_max + 1));
    const int k = static_cast<int>(rng.below(bs.k_max + 1));
    const auto& set = scene.face_set(m, k);
    if (set.size() < 3) continue;
    const ScaleShift& z = bs.zetas[m];
    const Point u = z.invert(pts[set[rng.below(set.size())]]);
    const Point nu = inward_normal(bs, k, u);
    if (nu.empty()) continue;
    Point xu = u;
    const double push = 0.5 * (k == 0 ? 0.25 : half_width(k));
    for (std::size_t a = 0; a < bs.n; ++a) xu[a] += push * nu[a];
    if (!bs.in_domain(xu)) continue;
    const Point x = z.apply(xu);

    std::size_t ia = set[0];
    double r = kInf;
    for (std::size_t j : set) {
      const double d = distance(x, pts[j]);
      if (d < r) {
        r = d;
        ia = j;
      }
    }
    double up = kInf;
    for (std::size_t j : set) {
      if (j == ia) continue;
      const double e = modulus_eval(eta, r / distance(x, pts[j]));
      if (e < 1.0) up = std::min(up, e * distance(pts[ia], pts[j]) / ((1.0 - e) * r));
    }
    if (!std::isfinite(up)) continue;
    std::vector<std::size_t> far;
    for (int t = 0; t < 32; ++t) {
      const std::size_t j = set[rng.below(set.size())];
      if (distance(pts[ia], pts[j]) > up * r) far.push_back(j);
    }
    if (far.empty()) continue;
    double low = kInf;
    for (std::size_t e : set) {
      const double de = distance(x, pts[e]);
      double lb = 0.0;
      for (std::size_t j : far)
        lb = std::max(lb, (distance(pts[ia], pts[j]) - up * r) / modulus_eval(eta, distance(x, pts[j]) / de));
      low = std::min(low, lb / r);
    }
    c1 = std::min(c1, low);
    c2 = std::max(c2, up);
    ++cert.distortion_samples;
  }
  if (cert.distortion_samples == 0) {
    cert.c1 = 0.0;
    cert.c2 = kInf;
  } else {
    cert.c1 = c1;
    cert.c2 = c2;
  }

  // Step 1: dist(z, E'_{m,l}) / min(|z-x'|, |z-P*_m|) < 2^-m along the image
  // arc, against the lower bound 1/eta(C). Step 2: the same ratio is at most
  // 2^-k / C2(k) with |x'-y'| >= C2(k) 4^-m 2^-k and C2(k) = 1/2 - 2^{1-k} (1 + c2).
  auto step1 = [&](int m) { return cert.image_john * std::ldexp(1.0, -m); };
  auto step2 = [&](int k) {
    const double c2k = 0.5 - std::ldexp(1.0, 1 - k) * (1.0 + cert.c2);
    return c2k > 0.0 ? cert.image_john * std::ldexp(1.0, -k) / c2k : kInf;
  };
  for (int m = 0; m <= bs.m_max; ++m) {
    for (int k = 0; k <= bs.k_max; ++k) {
      CertificateRow row;
      row.m = m;
      row.k = k;
      row.ratio = density_ratio(m, k);
      row.image_scale = density_threshold(m, k);
      row.step1_margin = step1(m);
      row.step2_margin = step2(k);
      cert.rows.push_back(row);
    }
  }
  for (int m = 0; m <= 64 && cert.depth_m < 0; ++m)
    if (step1(m) < 1.0) cert.depth_m = m;
  if (cert.c1 > 0.0)
    for (int k = 0; k <= 64 && cert.depth_k < 0; ++k)
      if (step2(k) < 1.0) cert.depth_k = k;
  cert.reachable = cert.depth_m >= 0 && cert.depth_k >= 0 && cert.depth_m <= bs.m_max && cert.depth_k <= bs.k_max;
  char buf[200];
  if (cert.depth_m < 0 || cert.depth_k < 0) {
    std::snprintf(buf, sizeof buf, "no contradiction up to depth 64");
  } else if (cert.reachable) {
    std::snprintf(buf, sizeof buf, "no eta-quasisymmetric extension exists beyond depth m = %d (k = %d)", cert.depth_m,
                  cert.depth_k);
  } else {
    std::snprintf(buf, sizeof buf, "no contradiction reachable at this depth (needs m >= %d, k >= %d)", cert.depth_m,
                  cert.depth_k);
  }
  cert.verdict = buf;
  return cert;
}

}  // namespace qsx
