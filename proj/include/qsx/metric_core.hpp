#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "qsx/geometry.hpp"

namespace qsx {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
/// Absolute tolerance used when comparing computed values against bounds.
inline constexpr double kBoundTol = 1e-9;

/// A finite sample E of the real line together with the images f(E) in R^n.
class SiteMap {
 public:
  /// Validates: at least two sites, strictly increasing, matching image
  /// count, pairwise distinct images.
  SiteMap(std::vector<double> sites, PointSet images);

  std::size_t size() const noexcept { return sites_.size(); }
  std::size_t ambient_dim() const noexcept { return images_.dim(); }
  const std::vector<double>& sites() const noexcept { return sites_; }
  const PointSet& images() const noexcept { return images_; }
  double site(std::size_t i) const { return sites_[i]; }
  ConstPointView image(std::size_t i) const { return images_[i]; }

  /// Restriction to the given (increasing) indices.
  SiteMap restrict(std::span<const std::size_t> indices) const;

 private:
  std::vector<double> sites_;
  PointSet images_;
};

/// eta(t) = C * max(t^alpha, t^(1/alpha)).
struct PowerModulus {
  double scale = 1.0;     // C
  double exponent = 1.0;  // alpha in (0, 1]

  PowerModulus() = default;
  PowerModulus(double c, double alpha);

  static PowerModulus identity() { return {1.0, 1.0}; }
};

double modulus_eval(const PowerModulus& m, double t);
double modulus_invert(const PowerModulus& m, double s);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const noexcept { return hi - lo; }
  double mid() const noexcept { return 0.5 * (lo + hi); }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

/// Sorted, pairwise disjoint closed intervals; points are degenerate intervals.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> intervals);
  static IntervalSet from_points(std::span<const double> points);

  std::size_t size() const noexcept { return intervals_.size(); }
  const Interval& operator[](std::size_t i) const { return intervals_[i]; }
  const std::vector<Interval>& intervals() const noexcept { return intervals_; }

  double lo() const { return intervals_.front().lo; }
  double hi() const { return intervals_.back().hi; }
  double diameter() const { return intervals_.empty() ? 0.0 : hi() - lo(); }

  /// Bounded complementary components (a_I, b_I), left to right.
  std::vector<Interval> gaps() const;
  /// Index of the interval containing x, if any.
  std::optional<std::size_t> locate(double x) const;
  bool contains(double x) const { return locate(x).has_value(); }

 private:
  std::vector<Interval> intervals_;
};

/// Weak quasisymmetry constant of a sampled map with the triple that attains it.
struct QsConstants {
  double weak_constant = 1.0;  // H = max(1, raw_ratio)
  double raw_ratio = 0.0;      // max |f(x)-f(y)| / |f(x)-f(z)| over admissible triples
  std::array<std::size_t, 3> worst_indices{};  // (x, y, z) into the site list
  std::array<double, 3> worst_triple{};        // the corresponding site values
  std::optional<PowerModulus> fitted_modulus;
};

// Relative distance dist(A,B) / min(diam A, diam B).
double relative_distance(std::span<const double> a, std::span<const double> b);
double relative_distance(const PointSet& a, const PointSet& b);
double relative_distance(const IntervalSet& a, const IntervalSet& b);
double relative_distance(const Interval& a, const Interval& b);

/// Infimal M for which the finite set is M-relatively connected.
double relative_connectedness_constant(std::span<const double> points);
double relative_connectedness_constant(const PointSet& points);

/// Minimum relative distance over pairs of gaps; +inf with fewer than two gaps.
double uniform_perfectness_gap_constant(const IntervalSet& e);

/// Uniform-perfectness constant c of a union of intervals, measured with
/// annuli centred at every interval endpoint and midpoint: the largest ratio
/// v/u over gaps (u, v) of the distance set seen from such a centre.
/// Returns +inf when the set has a degenerate (isolated point) component.
double uniform_perfectness_constant(const IntervalSet& e);
/// Same, restricted to annuli centred at the given points of `e`.
double uniform_perfectness_constant(const IntervalSet& e, std::span<const double> centres);

QsConstants weak_qs_constant(const SiteMap& map);

/// Minimal-C power modulus dominating every (t, rho) sample.
PowerModulus fit_power_modulus(std::span<const std::array<double, 2>> samples);

/// All (t, rho) ratio samples of a map, reduced to the ones that can matter
/// for an increasing envelope (the upper-left Pareto frontier).
std::vector<std::array<double, 2>> ratio_samples(const SiteMap& map);

/// Smallest C' >= 1 with C'^-1 |x-y|^(1/a) <= |f(x)-f(y)| <= C' |x-y|^a after
/// rescaling domain and image to unit diameter.
double holder_envelope(const SiteMap& map, double alpha);

}  // namespace qsx
