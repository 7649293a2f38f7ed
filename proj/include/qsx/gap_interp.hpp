#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qsx/bridges.hpp"
#include "qsx/metric_core.hpp"

namespace qsx {

enum class GapSide { left, right };

/// delta0 = min(1/2, eta^-1(1/2)).
double compute_delta0(const PowerModulus& modulus);

struct EndpointSequence {
  double anchor = 0.0;              // a_I (left side) or b_I (right side)
  GapSide side = GapSide::left;
  std::vector<double> points;       // a_0, a_1, ... in E, approaching the anchor
  double delta0 = 0.5;
  double c = 1.0;
  double resolution = 0.0;          // epsilon
  double ratio_lo = 0.0, ratio_hi = 0.0;  // delta0 / c, delta0
};

/// Geometric sequence in E towards a gap endpoint. Each point is the point of E
/// nearest the target anchor + delta0 (a_k - anchor) inside the admissible band
/// (ties toward the anchor); entries are kept while their distance to the anchor
/// exceeds epsilon.
EndpointSequence endpoint_sequence(const IntervalSet& e, const Interval& gap, GapSide side, double delta0,
                                   double c, double epsilon);

/// Evaluates the map on points of E.
using SiteFunction = std::function<Point(double)>;

/// Piecewise-linear homeomorphism from the closed gap onto its bridge.
struct GapMap {
  Interval gap;
  Bridge bridge;
  std::vector<double> xs;  // breakpoints, strictly increasing: a_I, a'_K, ..., a'_1, m_I, b'_1, ..., b_I
  std::vector<double> ss;  // bridge arclength positions in [0, 1], strictly increasing
  EndpointSequence left, right;
  std::vector<std::string> warnings;

  double arclength(double x) const;
  Point eval(double x) const;
};

/// Builds f_I. Breakpoints whose image distance overshoots the bridge side by
/// less than 1% are dropped with a warning; larger overshoot, or image
/// distances that do not decrease toward the endpoint, raise DomainError.
GapMap build_gap_map(const IntervalSet& e, const SiteFunction& f, const Interval& gap, const Bridge& bridge,
                     double delta0, double c, double epsilon);

/// Smallest C bounding |J1|/|J2| and diam f(J1)/diam f(J2) (both ways) over
/// consecutive partition intervals; 1 when there is only one interval.
double neighbor_ratio_constant(const GapMap& gm);

}  // namespace qsx
