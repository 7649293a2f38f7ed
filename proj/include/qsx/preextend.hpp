#pragma once

#include <string>
#include <vector>

#include "qsx/metric_core.hpp"

namespace qsx {

/// x_norm = (x - domain_offset) / domain_scale,
/// y_norm = (y - image_offset) / image_scale.
struct Similarity {
  double domain_offset = 0.0;
  double domain_scale = 1.0;
  Point image_offset;
  double image_scale = 1.0;

  double site_to_normalized(double x) const { return (x - domain_offset) / domain_scale; }
  double site_from_normalized(double x) const { return x * domain_scale + domain_offset; }
  Point image_to_normalized(ConstPointView y) const;
  /// Inverse image transform; the target may have more coordinates than the
  /// original image space (extra coordinates are scaled but not shifted).
  Point image_from_normalized(ConstPointView y) const;
  bool is_identity() const;
};

struct NormalizedMap {
  SiteMap map;
  Similarity similarity;
};

/// min E -> 0, max E -> 1, f(min E) -> origin, diam f(E) -> 1.
NormalizedMap normalize(const SiteMap& map);

/// True when `map` already satisfies the normalize() post-condition (to 1e-12).
bool is_normalized(const SiteMap& map);

struct PeriodizedMap {
  SiteMap base;          // normalized input
  int window = 2;        // K
  SiteMap materialized;  // sites 2k + x, images 2k e1 + f(x), |k| <= K
  std::size_t lifted_dim = 0;

  std::size_t copy_size() const { return base.size(); }
  /// Index of base site j in copy k.
  std::size_t index(int k, std::size_t j) const {
    return static_cast<std::size_t>(k + window) * base.size() + j;
  }
  /// Domain interval covered by the interior copies |k| <= K-1.
  Interval interior() const { return {-2.0 * (window - 1), 2.0 * (window - 1) + 1.0}; }
};

PeriodizedMap periodize(const SiteMap& normalized, int window = 2);

enum class Side { lower, upper };

struct ReflectedMap {
  SiteMap base;                 // translated so the extreme site is 0 and f(0) = origin
  Side side = Side::lower;
  double c0 = 2.0;              // C0 = max(2, 1/eta^-1(1/2))
  double m = 1.0;               // relative-connectedness constant used for the ratio window
  std::vector<double> ladder;   // a_1 = 1 < a_2 < ... (distances from the extreme site)
  SiteMap lifted;               // base lifted to R^{n+1} plus the reflected sites
  std::size_t lifted_dim = 0;
  bool truncated = false;
  std::vector<std::string> warnings;
};

double reflection_c0(const PowerModulus& modulus);

/// Cases 1 and 2 of the unbounding step. The map is translated so that its
/// minimum (side = lower) or maximum (side = upper) sits at 0 with image at
/// the origin; the site at distance 1 from it must exist.
ReflectedMap reflect_unbounded(const SiteMap& map, Side side, const PowerModulus& modulus, double m);

struct FatPiece {
  double centre = 0.0;
  Interval span;          // [x - r, x + r]
  std::size_t neighbour;  // index of pi(x)
  Point value;            // f(x)
  double slope = 0.0;     // along e1

  /// f(x) + slope (y - x) e1.
  Point eval(double y) const;
  Point eval_left() const { return eval(span.lo); }
  Point eval_right() const { return eval(span.hi); }
};

struct FattenedSet {
  std::vector<FatPiece> pieces;  // sorted by centre
  PowerModulus modulus;

  IntervalSet intervals() const;
};

/// Replaces every site by the closed interval of radius |x - pi(x)|/10 carrying
/// the affine hat map. Nearest-neighbour ties go to the left neighbour.
FattenedSet fatten_isolated(const SiteMap& map, const PowerModulus& modulus);

struct FatteningRatio {
  std::size_t piece = 0;
  double centre = 0.0;
  double domain_ratio = 0.0;
  double image_ratio = 0.0;
};

struct FatteningReport {
  std::vector<FatteningRatio> pieces;
  double domain_min = kInf, domain_max = 0.0;
  double image_min = kInf, image_max = 0.0;
  double image_upper_bound = 0.0;  // 5 eta(1)
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Relative distances d*(E_x, E^ \ E_x) in the domain and the image for every
/// piece, checked against [4, 5] and [3, 5 eta(1)] with tolerance kBoundTol.
FatteningReport verify_fattening_ratios(const FattenedSet& fat);

}  // namespace qsx
