#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qsx/bridges.hpp"
#include "qsx/gap_interp.hpp"
#include "qsx/metric_core.hpp"
#include "qsx/preextend.hpp"

namespace qsx {

struct ExtensionConfig {
  int periods = 2;            // K
  double resolution = 1e-4;   // epsilon, relative to each gap length
  std::uint64_t seed = 0;     // bridge calibration seed
};

/// The global extension F: window -> R^N in normalized coordinates.
/// pieces[i] and pieces[i + 1] enclose gaps[i].
struct ExtensionMap {
  Interval window;
  std::size_t n = 1;   // image dimension of the periodized data
  std::size_t N = 0;   // n + n0 + 1
  std::vector<FatPiece> pieces;
  std::vector<GapMap> gaps;
  DimensionAssignment assignment;
  Similarity similarity;  // original -> normalized
  PowerModulus modulus;
  double uniform_perfectness = 1.0;  // c of the fattened set
  double delta0 = 0.5;
  ExtensionConfig config;
  std::vector<std::string> warnings;

  /// Binary search over piece boundaries; raises outside the window.
  Point evaluate(double x) const;
  /// Same, in the coordinates of the input data.
  Point evaluate_original(double x) const;
  std::vector<Bridge> bridges() const;
  IntervalSet fattened_set() const;
};

/// normalize -> periodize -> fatten -> gaps -> assign dimensions -> gap maps.
/// Stage failures are re-raised with the stage name prefixed.
ExtensionMap extend(const SiteMap& map, const PowerModulus& modulus, const ExtensionConfig& config = {});

/// Largest value mismatch between a piece and the adjacent gap map at their shared endpoint.
double continuity_defect(const ExtensionMap& f);

struct SampleSpec {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t uniform = 0;
  std::size_t gap_adversarial = 0;
  std::size_t cross_scale = 0;
  std::size_t structural = 0;  // deterministic probes around breakpoints and sites
  std::size_t refined = 0;     // local searches started
};

inline constexpr std::size_t kRefineStarts = 64;

struct VerificationReport {
  double weak_constant = 1.0;                  // H over all triples, after refinement
  double sampled_weak_constant = 1.0;          // H over the random strata alone
  std::array<double, 3> worst_triple{};        // (x, y, z) with |x-y| <= |x-z|
  double monotonicity_constant = 1.0;          // K
  std::array<double, 3> worst_monotone{};      // x1 < x2 < x3
  double dist4_lower = 1.0;  // max (three-term sum) / |F(x) - F(y)|
  double dist4_upper = 0.0;  // max |F(x) - F(y)| / (three-term sum)
  std::array<double, 2> worst_dist4{};
  std::size_t dist4_pairs = 0;
  SampleSpec sample_spec;
  std::vector<std::string> warnings;
};

/// Random triples in three strata: 40% uniform in the window, 40% within
/// 1e-3 |I| of gap endpoints, 20% cross-scale (offsets over 4 decades of the
/// window length). Structural probes centred at every gap breakpoint and site
/// (32 log-spaced radii in [1e-4 |I|, 2 |I|]) are added, and the best triple
/// of each of the kRefineStarts leading components is refined by compass
/// search; H is the largest ratio seen.
VerificationReport verify_extension(const ExtensionMap& f, std::size_t samples, std::uint64_t seed);

/// Deterministic near-symmetric triples (c - h, c, c + h) around breakpoints and sites.
std::vector<std::array<double, 3>> structural_triples(const ExtensionMap& f);

/// The drawn triples, in stratum order, for callers that re-check the report.
std::vector<std::array<double, 3>> draw_triples(const ExtensionMap& f, std::size_t samples, std::uint64_t seed,
                                                SampleSpec* spec = nullptr,
                                                std::vector<std::string>* warnings = nullptr);

struct InjectivityReport {
  std::size_t pairs = 0;
  std::size_t collisions = 0;
  double min_distance = kInf;  // min |F(x) - F(y)|
  double min_ratio = kInf;     // min |F(x) - F(y)| / |x - y|
};

InjectivityReport injectivity_check(const ExtensionMap& f, std::size_t pairs, std::uint64_t seed);

}  // namespace qsx
