#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsx/metric_core.hpp"

namespace qsx {

/// [p, apex] u [apex, q], with apex in the fresh coordinate direction e_k.
struct Bridge {
  Point p, q, apex;
  std::size_t dim_index = 0;  // 1-based coordinate index k

  double chord() const { return distance(p, q); }
};

/// apex = (p + q)/2 + (sqrt(3)/2)|p - q| e_k. `n` is the dimension of the
/// original image subspace; requires n < k <= dim(p) and p_k = q_k = 0.
Bridge make_bridge(ConstPointView p, ConstPointView q, std::size_t k, std::size_t n);

/// Constant-speed parametrisation of the bridge polyline, s in [0, 1].
Point bridge_point(const Bridge& b, double s);

/// Exact distance between two bridges (four segment pairs).
double bridge_distance(const Bridge& a, const Bridge& b);

/// Bi-Lipschitz constant of t -> bridge_point(t/|p-q|) on [0, |p-q|], measured
/// over all pairs of a uniform grid with `grid` points.
double bridge_chart_bilipschitz(const Bridge& b, std::size_t grid = 1000);

struct CrowdingResult {
  std::size_t count = 0;  // size of the largest family with pairwise d* <= d
  double bound = 0.0;     // 2d + 3
  bool ok = true;
  bool exact = true;      // exhaustive search (<= 20 intervals) or greedy heuristic
};

/// Largest subfamily of disjoint closed intervals with pairwise relative distance <= d.
CrowdingResult crowding_bound_check(const std::vector<Interval>& intervals, double d);

/// A gap of the fattened set with the images of its endpoints.
struct GapEndpoints {
  Interval gap;
  Point image_lo;  // f(a_I)
  Point image_hi;  // f(b_I)
};

/// Smallest T found such that endpoint pairs with d* >= T carry same-dimension
/// bridges with d* >= 1. Seeded randomized search over 10^4 configurations.
struct BridgeCalibration {
  double threshold = 0.0;  // T
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double worst_bridge_ratio = 0.0;  // bridge d* at the configuration that fixed T
};

/// Cached per seed; the result does not depend on the modulus.
const BridgeCalibration& calibrate_bridges(std::uint64_t seed = 0, std::size_t samples = 10000);

/// C0 = max(1, 1/eta^-1(1/(2T))): closures with d* >= C0 have endpoint images with d* >= T
/// by the quasisymmetric distortion bound d*(f A, f B) >= 1/(2 eta(1/d*(A, B))).
double bridge_threshold_c0(const PowerModulus& modulus, const BridgeCalibration& cal);

struct DimensionAssignment {
  std::vector<std::size_t> gap_dims;  // 1-based coordinate per gap (input order)
  std::vector<std::size_t> order;     // processing order
  double c0 = 0.0;
  double pair_threshold = 0.0;        // T
  std::size_t n = 0;                  // original image dimension
  double palette_bound = 0.0;         // ceil(2 C0 + 3)
  bool palette_capped = false;        // bound exceeded the gap count
  std::size_t n0 = 0;                 // min(palette_bound, gap count)
  std::size_t total_dim = 0;          // N = n + n0 + 1
  std::size_t dims_used = 0;
  std::size_t conflict_edges = 0;
  std::size_t max_conflicts = 0;      // most assigned conflicting predecessors of any gap
};

DimensionAssignment assign_dimensions(const std::vector<GapEndpoints>& gaps, std::size_t n,
                                      const PowerModulus& modulus, double c, std::uint64_t calibration_seed = 0);

/// Same with an explicit C0 (used by tests and by callers with their own threshold).
DimensionAssignment assign_dimensions_with_threshold(const std::vector<GapEndpoints>& gaps,
                                                     std::size_t n, double c0);

/// Pairs (i, j) of gaps whose closures have relative distance < c0.
bool conflicting(const Interval& a, const Interval& b, double c0);

struct BridgeSeparation {
  std::size_t pairs = 0;
  double min_distance = kInf;          // exact, over pairs without an allowed contact
  double min_sampled_distance = kInf;  // 64 points per bridge, near pairs only
  std::size_t sampled_pairs = 0;
  double upper_constant = 0.0;  // max d*(bridges) / d*(endpoint pairs)
  double lower_constant = 0.0;  // max d*(endpoint pairs) / d*(bridges)
  double min_relative_distance = kInf;  // over distinct-dimension pairs
  std::vector<std::string> intersections;
  bool ok() const { return intersections.empty(); }
};

/// Pairwise separation of bridges; bridges whose endpoint pairs share a point
/// may touch there.
BridgeSeparation bridge_separation_report(const std::vector<Bridge>& bridges);

/// min over random z, a, b (|z - a| <= |z - b|) and bridge points x of
/// |z - x| / (|z - a| + |x - a|).
double bridge_distance_lower_constant(std::uint64_t seed, std::size_t trials, std::size_t n);

}  // namespace qsx
