#include "qsx/preextend.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qsx/error.hpp"

namespace qsx {

Point Similarity::image_to_normalized(ConstPointView y) const {
  Point out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = (y[i] - (i < image_offset.size() ? image_offset[i] : 0.0)) / image_scale;
  }
  return out;
}

Point Similarity::image_from_normalized(ConstPointView y) const {
  Point out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = y[i] * image_scale + (i < image_offset.size() ? image_offset[i] : 0.0);
  }
  return out;
}

bool Similarity::is_identity() const {
  return domain_offset == 0.0 && domain_scale == 1.0 && image_scale == 1.0 &&
         std::all_of(image_offset.begin(), image_offset.end(), [](double v) { return v == 0.0; });
}

NormalizedMap normalize(const SiteMap& map) {
  Similarity sim;
  sim.domain_offset = map.sites().front();
  sim.domain_scale = map.sites().back() - map.sites().front();
  sim.image_offset = map.images().row(0);
  sim.image_scale = diameter(map.images());
  std::vector<double> s;
  s.reserve(map.size());
  for (double x : map.sites()) s.push_back(sim.site_to_normalized(x));
  s.front() = 0.0;
  s.back() = 1.0;
  PointSet im(map.ambient_dim());
  for (std::size_t i = 0; i < map.size(); ++i) im.push_back(sim.image_to_normalized(map.image(i)));
  return {SiteMap(std::move(s), std::move(im)), std::move(sim)};
}

bool is_normalized(const SiteMap& map) {
  if (map.sites().front() != 0.0 || map.sites().back() != 1.0) return false;
  for (double c : map.image(0)) {
    if (c != 0.0) return false;
  }
  return std::abs(diameter(map.images()) - 1.0) <= 1e-12;
}

PeriodizedMap periodize(const SiteMap& normalized, int window) {
  if (window < 1) throw InvalidArgument("periodize: window K must be >= 1");
  if (!is_normalized(normalized)) throw InvalidArgument("periodize requires normalized map");
  const std::size_t m = normalized.size();
  const std::size_t n = normalized.ambient_dim();
  std::vector<double> s;
  PointSet im(n);
  s.reserve((2 * window + 1) * m);
  Point y(n);
  for (int k = -window; k <= window; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      s.push_back(2.0 * k + normalized.site(j));
      auto f = normalized.image(j);
      std::copy(f.begin(), f.end(), y.begin());
      y[0] += 2.0 * k;
      im.push_back(y);
    }
  }
  return {normalized, window, SiteMap(std::move(s), std::move(im)), n};
}

double reflection_c0(const PowerModulus& modulus) {
  return std::max(2.0, 1.0 / modulus_invert(modulus, 0.5));
}

ReflectedMap reflect_unbounded(const SiteMap& map, Side side, const PowerModulus& modulus, double m) {
  if (!(m >= 1.0)) throw InvalidArgument("reflect_unbounded: M must be >= 1");
  const std::size_t count = map.size();
  const std::size_t n = map.ambient_dim();
  const std::size_t anchor = side == Side::lower ? 0 : count - 1;
  const double x0 = map.site(anchor);
  const Point y0 = map.images().row(anchor);

  // Translated base: anchor at 0, f(anchor) at the origin.
  std::vector<double> bs;
  PointSet bi(n);
  for (std::size_t i = 0; i < count; ++i) {
    bs.push_back(map.site(i) - x0);
    Point y = map.images().row(i);
    for (std::size_t c = 0; c < n; ++c) y[c] -= y0[c];
    bi.push_back(y);
  }
  bs[anchor] = 0.0;
  SiteMap base(bs, bi);

  // Distances from the anchor, increasing.
  std::vector<std::size_t> order(count - 1);
  for (std::size_t i = 0; i + 1 < count; ++i) order[i] = side == Side::lower ? i + 1 : count - 2 - i;
  auto dist = [&](std::size_t i) { return std::abs(base.site(i)); };

  ReflectedMap out{base, side, reflection_c0(modulus), m, {}, base, n + 1, false, {}};
  auto one = std::find_if(order.begin(), order.end(), [&](std::size_t i) { return dist(i) == 1.0; });
  if (one == order.end()) {
    throw DomainError("reflect_unbounded: the site at distance 1 from the extreme point is missing");
  }
  std::vector<std::size_t> ladder_idx{*one};
  out.ladder.push_back(1.0);
  for (;;) {
    const double a = out.ladder.back();
    auto next = std::find_if(order.begin(), order.end(), [&](std::size_t i) { return dist(i) >= out.c0 * a; });
    if (next == order.end()) {
      out.truncated = true;
      out.warnings.push_back("ladder truncated at a = " + std::to_string(a) + ": sample ends before C0 a");
      break;
    }
    if (dist(*next) > m * out.c0 * a) {
      out.truncated = true;
      out.warnings.push_back("ladder truncated at a = " + std::to_string(a) +
                             ": no site in [C0 a, M C0 a]");
      break;
    }
    out.ladder.push_back(dist(*next));
    ladder_idx.push_back(*next);
  }
  for (std::size_t k = 1; k < out.ladder.size(); ++k) {
    const double r = out.ladder[k] / out.ladder[k - 1];
    if (r < out.c0 * (1.0 - 1e-15) || r > m * out.c0 * (1.0 + 1e-15)) {
      throw InvariantViolation("reflect_unbounded: ladder ratio outside [C0, M C0]");
    }
  }

  // Lifted map: base with a zero last coordinate plus -a_k (or +a_k) with image (0, ..., -|f(a_k)|).
  std::vector<std::pair<double, Point>> rows;
  for (std::size_t i = 0; i < count; ++i) rows.push_back({base.site(i), padded(base.image(i), n + 1)});
  const double sign = side == Side::lower ? -1.0 : 1.0;
  for (std::size_t k = 0; k < out.ladder.size(); ++k) {
    Point y(n + 1, 0.0);
    y[n] = -norm(base.image(ladder_idx[k]));
    rows.push_back({sign * out.ladder[k], y});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> ls;
  PointSet li(n + 1);
  for (auto& [x, y] : rows) {
    ls.push_back(x);
    li.push_back(y);
  }
  out.lifted = SiteMap(std::move(ls), std::move(li));
  return out;
}

Point FatPiece::eval(double y) const {
  Point out = value;
  out[0] += slope * (y - centre);
  return out;
}

IntervalSet FattenedSet::intervals() const {
  std::vector<Interval> iv;
  iv.reserve(pieces.size());
  for (const auto& p : pieces) iv.push_back(p.span);
  return IntervalSet(std::move(iv));
}

FattenedSet fatten_isolated(const SiteMap& map, const PowerModulus& modulus) {
  const std::size_t m = map.size();
  const double eta1 = modulus_eval(modulus, 1.0);
  FattenedSet out;
  out.modulus = modulus;
  out.pieces.resize(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(m); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double x = map.site(i);
    std::size_t pi;
    if (i == 0) {
      pi = 1;
    } else if (i + 1 == m) {
      pi = i - 1;
    } else {
      pi = (x - map.site(i - 1) <= map.site(i + 1) - x) ? i - 1 : i + 1;
    }
    const double d = std::abs(x - map.site(pi));
    const double r = d / 10.0;
    FatPiece p;
    p.centre = x;
    p.span = {x - r, x + r};
    p.neighbour = pi;
    p.value = map.images().row(i);
    p.slope = distance(map.image(i), map.image(pi)) / (eta1 * d);
    out.pieces[i] = std::move(p);
  }
  return out;
}

FatteningReport verify_fattening_ratios(const FattenedSet& fat) {
  const auto& pcs = fat.pieces;
  const std::size_t p = pcs.size();
  if (p < 2) throw InvalidArgument("verify_fattening_ratios: need at least two pieces");
  FatteningReport rep;
  rep.image_upper_bound = 5.0 * modulus_eval(fat.modulus, 1.0);

  std::vector<Point> ends(2 * p);
  for (std::size_t i = 0; i < p; ++i) {
    ends[2 * i] = pcs[i].eval_left();
    ends[2 * i + 1] = pcs[i].eval_right();
  }
  // Farthest pair of image endpoints, excluding one piece (or none).
  auto far_pair = [&](std::size_t skip, std::size_t& ia, std::size_t& ib) {
    double best = -1.0;
    for (std::size_t a = 0; a < 2 * p; ++a) {
      if (a / 2 == skip) continue;
      for (std::size_t b = a + 1; b < 2 * p; ++b) {
        if (b / 2 == skip) continue;
        const double d = distance(ends[a], ends[b]);
        if (d > best) {
          best = d;
          ia = a;
          ib = b;
        }
      }
    }
    return best;
  };
  std::size_t ta = 0, tb = 0;
  const double img_diam_all = far_pair(p, ta, tb);

  rep.pieces.resize(p);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(p); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto& pc = pcs[i];
    // Domain.
    // From centres and radii: the rounded span endpoints of nearby pieces far
    // from the origin would cancel most of the digits of their separation.
    auto radius = [&](std::size_t j) { return std::abs(pcs[j].centre - pcs[pcs[j].neighbour].centre) / 10.0; };
    double ddist = kInf;
    if (i > 0) ddist = std::min(ddist, (pc.centre - pcs[i - 1].centre) - radius(i) - radius(i - 1));
    if (i + 1 < p) ddist = std::min(ddist, (pcs[i + 1].centre - pc.centre) - radius(i) - radius(i + 1));
    const std::size_t first = i == 0 ? 1 : 0, last = i + 1 == p ? p - 2 : p - 1;
    const double rest = first == last ? 2.0 * radius(first)
                                      : (pcs[last].centre - pcs[first].centre) + radius(last) + radius(first);
    const double ddom = std::min(2.0 * radius(i), rest);
    // Image.
    double idist = kInf;
    for (std::size_t j = 0; j < p; ++j) {
      if (j == i) continue;
      idist = std::min(idist, segment_distance(ends[2 * i], ends[2 * i + 1], ends[2 * j], ends[2 * j + 1]));
    }
    double rest_diam = img_diam_all;
    if (ta / 2 == i || tb / 2 == i) {
      std::size_t a = 0, b = 0;
      rest_diam = far_pair(i, a, b);
    }
    const double own = distance(ends[2 * i], ends[2 * i + 1]);
    rep.pieces[i] = {i, pc.centre, ddist / ddom, idist / std::min(own, rest_diam)};
  }
  for (const auto& r : rep.pieces) {
    rep.domain_min = std::min(rep.domain_min, r.domain_ratio);
    rep.domain_max = std::max(rep.domain_max, r.domain_ratio);
    rep.image_min = std::min(rep.image_min, r.image_ratio);
    rep.image_max = std::max(rep.image_max, r.image_ratio);
    std::ostringstream msg;
    msg.precision(17);
    if (r.domain_ratio < 4.0 - kBoundTol || r.domain_ratio > 5.0 + kBoundTol) {
      msg << "piece " << r.piece << " (centre " << r.centre << "): domain ratio " << r.domain_ratio
          << " outside [4, 5]";
      rep.violations.push_back(msg.str());
    } else if (r.image_ratio < 3.0 - kBoundTol || r.image_ratio > rep.image_upper_bound + kBoundTol) {
      msg << "piece " << r.piece << " (centre " << r.centre << "): image ratio " << r.image_ratio
          << " outside [3, " << rep.image_upper_bound << "]";
      rep.violations.push_back(msg.str());
    }
  }
  return rep;
}

}  // namespace qsx
