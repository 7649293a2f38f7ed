#include "qsx/gap_interp.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "qsx/error.hpp"

namespace qsx {

double compute_delta0(const PowerModulus& modulus) { return std::min(0.5, modulus_invert(modulus, 0.5)); }

namespace {

// Point of E in [lo, hi] nearest `target`; ties go to the point nearer `anchor`.
std::optional<double> nearest_in_band(const IntervalSet& e, double lo, double hi, double target, double anchor) {
  const auto& iv = e.intervals();
  auto it = std::partition_point(iv.begin(), iv.end(), [&](const Interval& i) { return i.hi < lo; });
  std::optional<double> best;
  double best_err = kInf;
  for (; it != iv.end() && it->lo <= hi; ++it) {
    const double a = std::max(lo, it->lo);
    const double b = std::min(hi, it->hi);
    if (a > b) continue;
    const double cand = std::clamp(target, a, b);
    const double err = std::abs(cand - target);
    if (!best || err < best_err ||
        (err == best_err && std::abs(cand - anchor) < std::abs(*best - anchor))) {
      best = cand;
      best_err = err;
    }
  }
  return best;
}

std::string gap_label(const Interval& gap) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << gap.lo << ", " << gap.hi << ")";
  return os.str();
}

}  // namespace

EndpointSequence endpoint_sequence(const IntervalSet& e, const Interval& gap, GapSide side, double delta0,
                                   double c, double epsilon) {
  if (!(gap.lo < gap.hi)) throw InvalidArgument("endpoint sequence: empty gap");
  if (!(delta0 > 0.0 && delta0 <= 0.5)) throw InvalidArgument("endpoint sequence: delta0 outside (0, 1/2]");
  if (!(c >= 1.0) || !std::isfinite(c)) throw InvalidArgument("endpoint sequence: c must be finite and >= 1");
  if (!(epsilon > 0.0)) throw InvalidArgument("endpoint sequence: epsilon must be positive");

  EndpointSequence seq;
  seq.side = side;
  seq.anchor = side == GapSide::left ? gap.lo : gap.hi;
  seq.delta0 = delta0;
  seq.c = c;
  seq.resolution = epsilon;
  seq.ratio_lo = delta0 / c;
  seq.ratio_hi = delta0;
  const double sign = side == GapSide::left ? -1.0 : 1.0;
  const double anchor = seq.anchor;

  auto pick = [&](double r_lo, double r_hi) {
    const double target = anchor + sign * r_hi;
    const double lo = side == GapSide::left ? anchor - r_hi : anchor + r_lo;
    const double hi = side == GapSide::left ? anchor - r_lo : anchor + r_hi;
    const auto p = nearest_in_band(e, lo, hi, target, anchor);
    if (!p) throw DomainError("uniform perfectness violated near gap " + gap_label(gap));
    return *p;
  };

  const double len = gap.length();
  double a = pick(len / (2.0 * c), 0.5 * len);
  double d = std::abs(a - anchor);
  while (d > epsilon) {
    seq.points.push_back(a);
    a = pick(delta0 * d / c, delta0 * d);
    d = std::abs(a - anchor);
  }
  return seq;
}

double GapMap::arclength(double x) const {
  if (!(x >= gap.lo && x <= gap.hi)) throw InvalidArgument("gap map: point outside the gap");
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.end()) return ss.back();
  const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  if (xs[i] == x) return ss[i];
  const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return ss[i] + t * (ss[i + 1] - ss[i]);
}

Point GapMap::eval(double x) const { return bridge_point(bridge, arclength(x)); }

GapMap build_gap_map(const IntervalSet& e, const SiteFunction& f, const Interval& gap, const Bridge& bridge,
                     double delta0, double c, double epsilon) {
  GapMap gm;
  gm.gap = gap;
  gm.bridge = bridge;
  gm.left = endpoint_sequence(e, gap, GapSide::left, delta0, c, epsilon);
  gm.right = endpoint_sequence(e, gap, GapSide::right, delta0, c, epsilon);
  const double len = bridge.chord();
  if (!(len > 0.0)) throw DomainError("gap map: degenerate bridge");

  // Returns (domain point, side distance) pairs for k >= 1, nearest the midpoint first.
  auto side_points = [&](const EndpointSequence& seq, const char* name) {
    std::vector<std::pair<double, double>> out;
    const Point fa = f(seq.anchor);
    double last = len;
    for (std::size_t k = 1; k < seq.points.size(); ++k) {
      const double rho = distance(f(seq.points[k]), fa);
      std::ostringstream where;
      where.precision(17);
      where << name << " breakpoint " << k << " of gap " << gap_label(gap);
      if (rho >= len) {
        if (rho >= 1.01 * len)
          throw DomainError("gap map: image distance overshoots bridge side at " + where.str());
        gm.warnings.push_back("dropped " + where.str() + ": image distance overshoots bridge side by less than 1%");
        continue;
      }
      if (!(rho > 0.0)) throw DomainError("gap map: image distance zero at " + where.str());
      if (!(rho < last)) {
        gm.warnings.push_back("dropped " + where.str() + ": image distance does not decrease toward endpoint");
        continue;
      }
      last = rho;
      out.emplace_back(2.0 * seq.anchor - seq.points[k], rho);
    }
    return out;
  };

  const auto lp = side_points(gm.left, "left");
  const auto rp = side_points(gm.right, "right");

  gm.xs.push_back(gap.lo);
  gm.ss.push_back(0.0);
  for (auto it = lp.rbegin(); it != lp.rend(); ++it) {
    gm.xs.push_back(it->first);
    gm.ss.push_back(0.5 * it->second / len);
  }
  gm.xs.push_back(gap.mid());
  gm.ss.push_back(0.5);
  for (const auto& [x, sigma] : rp) {
    gm.xs.push_back(x);
    gm.ss.push_back(1.0 - 0.5 * sigma / len);
  }
  gm.xs.push_back(gap.hi);
  gm.ss.push_back(1.0);

  for (std::size_t i = 1; i < gm.xs.size(); ++i)
    if (!(gm.xs[i] > gm.xs[i - 1]) || !(gm.ss[i] > gm.ss[i - 1]))
      throw InvariantViolation("gap map: breakpoints not strictly increasing in gap " + gap_label(gap));
  return gm;
}

double neighbor_ratio_constant(const GapMap& gm) {
  const std::size_t n = gm.xs.size();
  std::vector<double> dom, img;
  std::vector<Point> pts;
  pts.reserve(n);
  for (double s : gm.ss) pts.push_back(bridge_point(gm.bridge, s));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    dom.push_back(gm.xs[i + 1] - gm.xs[i]);
    img.push_back(distance(pts[i], pts[i + 1]));
  }
  double best = 1.0;
  for (std::size_t i = 0; i + 1 < dom.size(); ++i) {
    best = std::max({best, dom[i] / dom[i + 1], dom[i + 1] / dom[i], img[i] / img[i + 1], img[i + 1] / img[i]});
  }
  return best;
}

}  // namespace qsx
