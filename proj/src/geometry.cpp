#include "qsx/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "qsx/error.hpp"

namespace qsx {

PointSet::PointSet(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0 || coords_.size() % dim_ != 0) {
    throw InvalidArgument("PointSet: coordinate count is not a multiple of the dimension");
  }
}

PointSet PointSet::from_rows(const std::vector<Point>& rows) {
  if (rows.empty()) return {};
  PointSet out(rows.front().size());
  for (const auto& r : rows) {
    if (r.size() != out.dim_) throw InvalidArgument("PointSet: ragged rows");
    out.push_back(r);
  }
  return out;
}

void PointSet::push_back(ConstPointView p) {
  if (p.size() != dim_) throw InvalidArgument("PointSet: dimension mismatch");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

Point PointSet::row(std::size_t i) const {
  auto v = (*this)[i];
  return {v.begin(), v.end()};
}

PointSet PointSet::padded(std::size_t new_dim) const {
  if (new_dim < dim_) throw InvalidArgument("PointSet::padded: cannot shrink dimension");
  PointSet out(new_dim);
  out.coords_.assign(size() * new_dim, 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    std::copy_n(coords_.begin() + static_cast<std::ptrdiff_t>(i * dim_), dim_,
                out.coords_.begin() + static_cast<std::ptrdiff_t>(i * new_dim));
  }
  return out;
}

double distance(ConstPointView a, ConstPointView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double dot(ConstPointView a, ConstPointView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(ConstPointView a) { return std::sqrt(dot(a, a)); }

Point padded(ConstPointView p, std::size_t dim) {
  Point out(dim, 0.0);
  std::copy(p.begin(), p.end(), out.begin());
  return out;
}

double point_segment_distance(ConstPointView x, ConstPointView a, ConstPointView b) {
  const std::size_t n = x.size();
  double ab2 = 0.0, t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = b[i] - a[i];
    ab2 += d * d;
    t += (x[i] - a[i]) * d;
  }
  t = ab2 > 0.0 ? std::clamp(t / ab2, 0.0, 1.0) : 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - (a[i] + t * (b[i] - a[i]));
    s += d * d;
  }
  return std::sqrt(s);
}

// Closest points of two segments (Ericson, Real-Time Collision Detection 5.1.9),
// followed by an endpoint-to-segment fallback that guards the near-parallel case.
double segment_distance(ConstPointView p0, ConstPointView p1, ConstPointView q0,
                        ConstPointView q1) {
  const std::size_t n = p0.size();
  Point d1(n), d2(n), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    d1[i] = p1[i] - p0[i];
    d2[i] = q1[i] - q0[i];
    r[i] = p0[i] - q0[i];
  }
  const double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
  double s = 0.0, t = 0.0;
  if (a <= 0.0 && e <= 0.0) return distance(p0, q0);
  if (a <= 0.0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = dot(d1, r);
    if (e <= 0.0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = dot(d1, d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (p0[i] + s * d1[i]) - (q0[i] + t * d2[i]);
    best += d * d;
  }
  best = std::sqrt(best);
  best = std::min({best, point_segment_distance(p0, q0, q1), point_segment_distance(p1, q0, q1),
                   point_segment_distance(q0, p0, p1), point_segment_distance(q1, p0, p1)});
  return best;
}

double diameter(const PointSet& pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, distance(pts[i], pts[j]));
  }
  return best;
}

}  // namespace qsx
