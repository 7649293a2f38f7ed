#include "qsx/metric_core.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <numeric>

#include "qsx/error.hpp"
#include "qsx/kernels.hpp"

namespace qsx {

namespace {

bool lex_row_less(ConstPointView a, ConstPointView b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

double interval_gap(const Interval& a, const Interval& b) {
  if (a.hi < b.lo) return b.lo - a.hi;
  if (b.hi < a.lo) return a.lo - b.hi;
  return 0.0;
}

// Maximum ratio d_{i+1}/d_i over the sorted distinct positive distances.
double consecutive_ratio_max(std::vector<double>& d) {
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  double best = 1.0;
  for (std::size_t i = 0; i + 1 < d.size(); ++i) best = std::max(best, d[i + 1] / d[i]);
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// SiteMap

SiteMap::SiteMap(std::vector<double> sites, PointSet images)
    : sites_(std::move(sites)), images_(std::move(images)) {
  if (sites_.size() < 2) throw InvalidArgument("site map needs at least two sites");
  if (images_.size() != sites_.size()) {
    throw InvalidArgument("site map: " + std::to_string(sites_.size()) + " sites but " +
                          std::to_string(images_.size()) + " images");
  }
  if (images_.dim() == 0) throw InvalidArgument("site map: image dimension must be positive");
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (!std::isfinite(sites_[i])) throw InvalidArgument("site map: non-finite site");
    if (i > 0 && !(sites_[i - 1] < sites_[i])) {
      throw InvalidArgument("site map: sites must be strictly increasing (index " +
                            std::to_string(i) + ")");
    }
  }
  for (double c : images_.coords()) {
    if (!std::isfinite(c)) throw InvalidArgument("site map: non-finite image coordinate");
  }
  std::vector<std::size_t> order(images_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return lex_row_less(images_[a], images_[b]); });
  for (std::size_t i = 1; i < order.size(); ++i) {
    auto a = images_[order[i - 1]];
    auto b = images_[order[i]];
    if (std::equal(a.begin(), a.end(), b.begin())) {
      throw InvalidArgument("site map: images of sites " + std::to_string(order[i - 1]) + " and " +
                            std::to_string(order[i]) + " coincide (map is not injective)");
    }
  }
}

SiteMap SiteMap::restrict(std::span<const std::size_t> indices) const {
  std::vector<double> s;
  PointSet im(images_.dim());
  s.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= size()) throw InvalidArgument("restrict: index out of range");
    s.push_back(sites_[i]);
    im.push_back(images_[i]);
  }
  return SiteMap(std::move(s), std::move(im));
}

// ---------------------------------------------------------------------------
// PowerModulus

PowerModulus::PowerModulus(double c, double alpha) : scale(c), exponent(alpha) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("modulus scale C must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("modulus exponent must lie in (0, 1]");
}

double modulus_eval(const PowerModulus& m, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("modulus_eval: t must be >= 0");
  if (t == 0.0) return 0.0;
  if (m.exponent == 1.0) return m.scale * t;
  return t <= 1.0 ? m.scale * std::pow(t, m.exponent) : m.scale * std::pow(t, 1.0 / m.exponent);
}

double modulus_invert(const PowerModulus& m, double s) {
  if (!(s >= 0.0)) throw InvalidArgument("modulus_invert: s must be >= 0");
  if (s == 0.0) return 0.0;
  const double r = s / m.scale;
  if (m.exponent == 1.0) return r;
  return s <= m.scale ? std::pow(r, 1.0 / m.exponent) : std::pow(r, m.exponent);
}

// ---------------------------------------------------------------------------
// IntervalSet

IntervalSet::IntervalSet(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const auto& iv = intervals_[i];
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.hi < iv.lo) {
      throw InvalidArgument("interval set: malformed interval at index " + std::to_string(i));
    }
    if (i > 0 && !(intervals_[i - 1].hi < iv.lo)) {
      throw InvalidArgument("interval set: intervals must be sorted and pairwise disjoint");
    }
  }
}

IntervalSet IntervalSet::from_points(std::span<const double> points) {
  std::vector<double> p(points.begin(), points.end());
  std::sort(p.begin(), p.end());
  std::vector<Interval> iv;
  iv.reserve(p.size());
  for (double x : p) iv.push_back({x, x});
  return IntervalSet(std::move(iv));
}

std::vector<Interval> IntervalSet::gaps() const {
  std::vector<Interval> g;
  for (std::size_t i = 0; i + 1 < intervals_.size(); ++i) {
    g.push_back({intervals_[i].hi, intervals_[i + 1].lo});
  }
  return g;
}

std::optional<std::size_t> IntervalSet::locate(double x) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                             [](double v, const Interval& iv) { return v < iv.lo; });
  if (it == intervals_.begin()) return std::nullopt;
  --it;
  if (x <= it->hi) return static_cast<std::size_t>(it - intervals_.begin());
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Relative distance

double relative_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("relative distance: diameter zero");
  const auto [alo, ahi] = std::minmax_element(a.begin(), a.end());
  const auto [blo, bhi] = std::minmax_element(b.begin(), b.end());
  const double da = *ahi - *alo, db = *bhi - *blo;
  if (!(da > 0.0) || !(db > 0.0)) throw DomainError("relative distance: diameter zero");
  double dist = kInf;
  for (double x : a) {
    for (double y : b) dist = std::min(dist, std::abs(x - y));
  }
  return dist / std::min(da, db);
}

double relative_distance(const PointSet& a, const PointSet& b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("relative distance: diameter zero");
  if (a.dim() != b.dim()) throw InvalidArgument("relative distance: dimension mismatch");
  const double da = diameter(a), db = diameter(b);
  if (!(da > 0.0) || !(db > 0.0)) throw DomainError("relative distance: diameter zero");
  double dist = kInf;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) dist = std::min(dist, distance(a[i], b[j]));
  }
  return dist / std::min(da, db);
}

double relative_distance(const IntervalSet& a, const IntervalSet& b) {
  if (a.size() == 0 || b.size() == 0) throw DomainError("relative distance: diameter zero");
  const double da = a.diameter(), db = b.diameter();
  if (!(da > 0.0) || !(db > 0.0)) throw DomainError("relative distance: diameter zero");
  double dist = kInf;
  for (const auto& x : a.intervals()) {
    for (const auto& y : b.intervals()) dist = std::min(dist, interval_gap(x, y));
  }
  return dist / std::min(da, db);
}

double relative_distance(const Interval& a, const Interval& b) {
  const double da = a.length(), db = b.length();
  if (!(da > 0.0) || !(db > 0.0)) throw DomainError("relative distance: diameter zero");
  return interval_gap(a, b) / std::min(da, db);
}

// ---------------------------------------------------------------------------
// Relative connectedness

double relative_connectedness_constant(std::span<const double> points) {
  std::vector<double> p(points.begin(), points.end());
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 2) throw DomainError("relative connectedness undefined for singletons");
  const double v = kernels::index_max(p.size(), [&](std::size_t i) {
    std::vector<double> d;
    d.reserve(p.size() - 1);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j != i) d.push_back(std::abs(p[i] - p[j]));
    }
    return consecutive_ratio_max(d);
  });
  return std::max(1.0, v);
}

double relative_connectedness_constant(const PointSet& points) {
  if (points.size() < 2) throw DomainError("relative connectedness undefined for singletons");
  const double v = kernels::index_max(points.size(), [&](std::size_t i) {
    std::vector<double> d;
    d.reserve(points.size() - 1);
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (j == i) continue;
      const double dij = distance(points[i], points[j]);
      if (dij > 0.0) d.push_back(dij);
    }
    return consecutive_ratio_max(d);
  });
  return std::max(1.0, v);
}

// ---------------------------------------------------------------------------
// Uniform perfectness

double uniform_perfectness_gap_constant(const IntervalSet& e) {
  std::vector<Interval> g;
  for (const auto& iv : e.gaps()) {
    if (iv.length() > 0.0) g.push_back(iv);
  }
  if (g.size() < 2) return kInf;
  return kernels::index_min(g.size(), [&](std::size_t i) {
    double best = kInf;
    for (std::size_t j = i + 1; j < g.size(); ++j) best = std::min(best, relative_distance(g[i], g[j]));
    return best;
  });
}

double uniform_perfectness_constant(const IntervalSet& e, std::span<const double> centres) {
  if (e.size() == 0) throw InvalidArgument("uniform perfectness of an empty set");
  const auto& iv = e.intervals();
  const double v = kernels::index_max(centres.size(), [&](std::size_t ci) {
    const double x = centres[ci];
    // Distance set {|x - y| : y in E} as a union of closed intervals.
    std::vector<Interval> d;
    d.reserve(iv.size());
    for (const auto& j : iv) {
      const double near = j.contains(x) ? 0.0 : std::min(std::abs(x - j.lo), std::abs(x - j.hi));
      const double far = std::max(std::abs(x - j.lo), std::abs(x - j.hi));
      d.push_back({near, far});
    }
    std::sort(d.begin(), d.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    double best = 1.0;
    double reach = d.front().hi;
    for (std::size_t k = 1; k < d.size(); ++k) {
      if (d[k].lo > reach) best = std::max(best, reach > 0.0 ? d[k].lo / reach : kInf);
      reach = std::max(reach, d[k].hi);
    }
    return best;
  });
  return std::max(1.0, v);
}

double uniform_perfectness_constant(const IntervalSet& e) {
  std::vector<double> centres;
  centres.reserve(3 * e.size());
  for (const auto& iv : e.intervals()) {
    centres.push_back(iv.lo);
    if (iv.hi > iv.lo) {
      centres.push_back(iv.mid());
      centres.push_back(iv.hi);
    }
  }
  return uniform_perfectness_constant(e, centres);
}

// ---------------------------------------------------------------------------
// Weak quasisymmetry

QsConstants weak_qs_constant(const SiteMap& map) {
  if (map.size() < 3) throw DomainError("no admissible triples");
  const auto r = kernels::weak_qs_scan(map.sites(), map.images());
  if (!r.found) throw DomainError("no admissible triples");
  QsConstants out;
  out.raw_ratio = r.value;
  out.weak_constant = std::max(1.0, r.value);
  out.worst_indices = r.indices;
  for (int k = 0; k < 3; ++k) out.worst_triple[k] = map.site(r.indices[k]);
  return out;
}

// ---------------------------------------------------------------------------
// Power-modulus fitting

std::vector<std::array<double, 2>> ratio_samples(const SiteMap& map) {
  const std::size_t m = map.size();
  if (m < 3) return {};
  const auto count = static_cast<std::ptrdiff_t>(m);
  auto frontier = [](std::vector<std::array<double, 2>>& s) {
    std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) {
      return a[0] < b[0] || (a[0] == b[0] && a[1] > b[1]);
    });
    std::vector<std::array<double, 2>> keep;
    double top = -kInf;
    for (const auto& v : s) {
      if (v[1] > top) {
        keep.push_back(v);
        top = v[1];
      }
    }
    s.swap(keep);
  };

  // Per site x, a sample with a dominated by a' (dom no larger, img no smaller)
  // is dominated by the sample with a', and likewise for b in the reverse order,
  // by monotone rounding. The first two frontier layers on each side leave a
  // dominating choice with a != b, so only their pairs are formed.
  struct Candidates {
    std::vector<double> dom, img;
    std::vector<std::size_t> as, bs;
  };
  auto candidates = [&](std::size_t x) {
    Candidates c{std::vector<double>(m), std::vector<double>(m), {}, {}};
    for (std::size_t j = 0; j < m; ++j) {
      c.dom[j] = std::abs(map.site(x) - map.site(j));
      c.img[j] = distance(map.image(x), map.image(j));
    }
    auto two_layers = [&](double sign) {
      std::vector<std::size_t> idx;
      for (std::size_t j = 0; j < m; ++j)
        if (j != x) idx.push_back(j);
      std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        const double di = sign * c.dom[i], dj = sign * c.dom[j];
        return di < dj || (di == dj && (sign * c.img[i] > sign * c.img[j] || (c.img[i] == c.img[j] && i < j)));
      });
      std::vector<std::size_t> keep, rest;
      for (int layer = 0; layer < 2; ++layer) {
        double top = -kInf;
        for (std::size_t j : idx) {
          if (sign * c.img[j] > top) {
            keep.push_back(j);
            top = sign * c.img[j];
          } else {
            rest.push_back(j);
          }
        }
        idx.swap(rest);
        rest.clear();
      }
      return keep;
    };
    c.as = two_layers(1.0);
    c.bs = two_layers(-1.0);
    return c;
  };

  // Exact prefilter: bin t monotonically (exponent and eight mantissa bits of a
  // positive double) and drop every pair whose rho does not exceed the best rho
  // of a strictly lower bin over all sites; such a pair is strictly dominated.
  auto bin_of = [](double t) { return static_cast<std::int64_t>(std::bit_cast<std::uint64_t>(t) >> 44); };
  double dmin = kInf;
  for (std::size_t j = 1; j < m; ++j) dmin = std::min(dmin, map.site(j) - map.site(j - 1));
  const double dmax = map.site(m - 1) - map.site(0);
  // rounding is monotone, so every ratio lies in [dmin / dmax, dmax / dmin]
  const std::int64_t lo = bin_of(dmin / dmax);
  const auto bins = static_cast<std::size_t>(bin_of(dmax / dmin) - lo + 1);

  std::vector<Candidates> cand(m);
  std::vector<double> best(bins, -kInf);
#pragma omp parallel
  {
    std::vector<double> local(bins, -kInf);
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t ii = 0; ii < count; ++ii) {
      const auto x = static_cast<std::size_t>(ii);
      cand[x] = candidates(x);
      const auto& c = cand[x];
      for (std::size_t a : c.as)
        for (std::size_t b : c.bs) {
          if (a == b) continue;
          auto& slot = local[static_cast<std::size_t>(bin_of(c.dom[a] / c.dom[b]) - lo)];
          slot = std::max(slot, c.img[a] / c.img[b]);
        }
    }
#pragma omp critical
    for (std::size_t k = 0; k < bins; ++k) best[k] = std::max(best[k], local[k]);
  }
  std::vector<double> below(bins, -kInf);
  for (std::size_t k = 1; k < bins; ++k) below[k] = std::max(below[k - 1], best[k - 1]);

  std::vector<std::vector<std::array<double, 2>>> per_site(m);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t ii = 0; ii < count; ++ii) {
    const auto x = static_cast<std::size_t>(ii);
    const auto& c = cand[x];
    auto& s = per_site[x];
    for (std::size_t a : c.as)
      for (std::size_t b : c.bs) {
        if (a == b) continue;
        const double t = c.dom[a] / c.dom[b], r = c.img[a] / c.img[b];
        if (!std::isfinite(r) || r > below[static_cast<std::size_t>(bin_of(t) - lo)]) s.push_back({t, r});
      }
    frontier(s);
  }
  std::vector<std::array<double, 2>> all;
  for (auto& s : per_site) all.insert(all.end(), s.begin(), s.end());
  frontier(all);
  return all;
}

PowerModulus fit_power_modulus(std::span<const std::array<double, 2>> samples) {
  if (samples.empty()) throw InvalidArgument("fit_power_modulus: no samples");
  for (const auto& s : samples) {
    if (!(s[0] > 0.0) || !(s[1] > 0.0) || !std::isfinite(s[0]) || !std::isfinite(s[1])) {
      throw InvalidArgument("fit_power_modulus: samples must have positive finite t and rho");
    }
  }
  constexpr int kGrid = 512;
  const double lo = std::log(0.01);
  double best_c = kInf, best_alpha = 1.0;
  std::vector<std::array<double, 2>> logs(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) logs[i] = {std::log(samples[i][0]), std::log(samples[i][1])};
  for (int j = kGrid - 1; j >= 0; --j) {
    const double alpha = j == kGrid - 1 ? 1.0 : std::exp(lo * (1.0 - double(j) / (kGrid - 1)));
    // log of max rho / max(t^alpha, t^(1/alpha)); the exact check below restores domination
    double lc = -kInf;
    for (const auto& [lt, lr] : logs) lc = std::max(lc, lr - std::max(alpha * lt, lt / alpha));
    const double c = std::exp(lc);
    if (c < best_c) {
      best_c = c;
      best_alpha = alpha;
    }
  }
  const PowerModulus unit{1.0, best_alpha};
  double scale = 0.0;
  for (const auto& s : samples) scale = std::max(scale, s[1] / modulus_eval(unit, s[0]));
  PowerModulus fit{scale, best_alpha};
  for (bool dominated = false; !dominated;) {
    dominated = true;
    for (const auto& s : samples) {
      while (s[1] > modulus_eval(fit, s[0])) {
        fit.scale = std::nextafter(fit.scale, kInf);
        dominated = false;
      }
    }
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Hoelder envelope

double holder_envelope(const SiteMap& map, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("holder_envelope: alpha must lie in (0, 1]");
  const double dd = map.sites().back() - map.sites().front();
  const double di = diameter(map.images());
  const double v = kernels::pair_max(map.size(), [&](std::size_t i, std::size_t j) {
    const double d = std::abs(map.site(i) - map.site(j)) / dd;
    const double g = distance(map.image(i), map.image(j)) / di;
    return std::max(g / std::pow(d, alpha), std::pow(d, 1.0 / alpha) / g);
  });
  return std::max(1.0, v);
}

}  // namespace qsx
