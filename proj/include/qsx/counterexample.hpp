#pragma once

// A relatively connected countable set E in R^n (n >= 2) and a bi-Lipschitz
// map f on E that has no quasisymmetric extension, truncated at finite depth,
// together with the numeric diagnostics that mirror the obstruction argument.
//
// Unit coordinates are (v, t) with v in R^{n-1} and t the last coordinate.
// Q_0 = [-1,1]^n, Q_k = [-4^-k, 4^-k]^{n-1} x [2^-k, 2^{1-k}], h(v,t) = (v, 2-t).
// U = int(Q_0 minus Q_1..Q_kmax) and X is its boundary. zeta_m places a copy
// of [-2,2]^n at [4^-m / 2, 4^-m] x [-4^{-m-1}, 4^{-m-1}]^{n-1}.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qsx/geometry.hpp"
#include "qsx/metric_core.hpp"

namespace qsx {

/// Closed axis-aligned box.
struct Box {
  Point lo, hi;

  bool contains(ConstPointView x) const;
  /// Euclidean distance from x to the box, 0 inside.
  double distance(ConstPointView x) const;
  double diameter() const;
  Point centre() const;
};

/// x -> scale * x + shift.
struct ScaleShift {
  double scale = 1.0;
  Point shift;

  Point apply(ConstPointView x) const;
  Point invert(ConstPointView y) const;
  Box apply(const Box& b) const;
};

ScaleShift zeta(std::size_t n, int m);

/// h(v, t) = (v, 2 - t).
Point flip(ConstPointView x);

struct BoxScene {
  std::size_t n = 2;
  int m_max = 1;
  int k_max = 1;
  std::size_t points_per_face = 9;
  std::vector<ScaleShift> zetas;  // zeta_m for m = 0..m_max

  Box unit_box(int k) const;      // Q_k
  Box unit_flipped(int k) const;  // Q'_k = h(Q_k)
  Box box(int m, int k) const;    // zeta_m(Q_k)
  Box flipped(int m, int k) const;

  /// z in U (unit coordinates).
  bool in_domain(ConstPointView z) const;
  /// dist(z, boundary of U) for z in U.
  double boundary_distance(ConstPointView z) const;
  /// Whether a point of the boundary of Q_k lies on X.
  bool on_frontier(int k, ConstPointView x) const;
};

/// Boxes and similarities only; k_max = 0 leaves the plain cube.
BoxScene make_box_scene(std::size_t n, int m_max, int k_max, std::size_t points_per_face = 9);

enum class SiteKind { origin, tip, anchor, face };  // P, P_m, P*_m, E_{m,k}

struct SiteLabel {
  SiteKind kind = SiteKind::face;
  int m = 0;
  int k = 0;
};

struct SceneSites {
  PointSet points;
  PointSet images;
  std::vector<SiteLabel> labels;  // first set that produced each site
  /// Indices of E_{m,k}, stored at m * (k_max + 1) + k. Sites on a shared
  /// edge of two face sets appear in both.
  std::vector<std::vector<std::size_t>> face_sets;
  std::vector<double> face_pitch;  // largest lattice pitch of E_{m,k}, ambient units
};

struct Scene {
  BoxScene boxes;
  SceneSites sites;

  const std::vector<std::size_t>& face_set(int m, int k) const;
};

inline constexpr std::size_t kSiteBudget = 10'000'000;

double density_threshold(int m, int k);                 // 8^{-k-m}
double density_ratio(int m, int k);                     // 8^{-m-k} / (4^-m 4^-k) = 2^{-(m+k)}
double lattice_pitch_bound(std::size_t n, int m, int k);  // 8^{-k-m} / sqrt(n-1)

/// Number of lattice points build_scene would generate before merging shared edges.
std::size_t estimate_site_count(std::size_t n, int m_max, int k_max, std::size_t points_per_face);

/// Raises BudgetExceeded when the estimate passes kSiteBudget.
Scene build_scene(std::size_t n = 2, int m_max = 3, int k_max = 3, std::size_t points_per_face = 9);

struct DensityRow {
  int m = 0;
  int k = 0;
  double threshold = 0.0;
  double max_distance = 0.0;  // over the probes, to the nearest site of E_{m,k}
  std::size_t probes = 0;
  std::size_t sites = 0;
  bool ok() const { return max_distance < threshold; }
};

/// Probe grid `refinement` times finer than the face lattice, restricted to X.
std::vector<DensityRow> density_check(const Scene& scene, int refinement = 10);

/// Largest relative change of a pairwise distance under f within one E_{m,k}.
double isometry_defect(const Scene& scene);

inline constexpr std::size_t kExhaustiveSites = 10'000;

struct BilipschitzReport {
  double constant = 1.0;
  std::size_t pairs = 0;
  bool exhaustive = true;
  std::array<std::size_t, 2> worst{};
};

/// Exhaustive up to kExhaustiveSites sites, otherwise `pairs` seeded random pairs.
BilipschitzReport bilipschitz_constant(const SceneSites& sites, std::uint64_t seed = 0,
                                       std::size_t pairs = 4'000'000);

struct JohnReport {
  double constant = 1.0;
  std::size_t pairs = 0;
  std::size_t vertices = 0;
  Point x, y, z;  // the worst pair and arc vertex
};

/// Axis-aligned staircase from x to y in U through the spine. A point above
/// the deepest removed box first steps away from the column at 45 degrees,
/// then heads for 0.6 e_i on its side; every path ends at the hub
/// (0, ..., 0, -1/2).
std::vector<Point> john_arc(const BoxScene& scene, ConstPointView x, ConstPointView y);

/// max over sampled pairs and arc vertices z of min(|x-z|, |y-z|) / dist(z, boundary of U).
JohnReport john_constant(const BoxScene& scene, std::size_t pairs = 1000, std::uint64_t seed = 0);

struct CertificateRow {
  int m = 0;
  int k = 0;
  double ratio = 0.0;         // 2^{-(m+k)}
  double image_scale = 0.0;   // 8^{-m-k}, the site spacing next to Q'_{m,k}
  double step1_margin = 0.0;  // eta(C) 2^-m; contradiction when < 1
  double step2_margin = 0.0;  // eta(C) 2^-k / C2(k); contradiction when < 1
};

struct ObstructionCertificate {
  double john = 1.0;        // C for U
  double image_john = 1.0;  // eta(C), bound for images of C-John arcs
  double c1 = 0.0;          // dist(x', E') >= c1 dist(x, E), sampled
  double c2 = kInf;         // dist(x', E') <= c2 dist(x, E), sampled
  std::size_t distortion_samples = 0;
  std::vector<CertificateRow> rows;  // every (m, k) of the scene
  int depth_m = -1;  // first m with step1_margin < 1, -1 if none up to 64
  int depth_k = -1;  // first k with step2_margin < 1
  bool reachable = false;  // both depths inside the scene
  std::string verdict;
};

ObstructionCertificate obstruction_certificate(const Scene& scene, const PowerModulus& eta, double john,
                                               std::uint64_t seed = 0, std::size_t samples = 64);

}  // namespace qsx
