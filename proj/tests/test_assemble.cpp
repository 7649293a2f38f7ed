#include <cmath>

#include "corpus.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "qsx/assemble.hpp"
#include "qsx/error.hpp"

using namespace qsx;

namespace {

ExtensionMap two_point() {
  return extend(oracle::make_map({0, 1}, {{0}, {1}}), PowerModulus::identity(), {2, 1e-4, 0});
}

PowerModulus fitted(const SiteMap& map) {
  const auto s = ratio_samples(map);
  return fit_power_modulus(s);
}

}  // namespace

TEST_CASE("two-site identity extension agrees with f on every translated site") {
  const auto f = two_point();
  CHECK(f.window.lo == -2.0);
  CHECK(f.window.hi == 3.0);
  for (int x = -2; x <= 3; ++x) {
    const auto y = f.evaluate(x);
    REQUIRE(y.size() == f.N);
    CHECK(y[0] == static_cast<double>(x));
    for (std::size_t i = 1; i < y.size(); ++i) CHECK(y[i] == 0.0);
  }
  CHECK(f.N == f.n + f.assignment.n0 + 1);
}

TEST_CASE("gap midpoints hit apexes and pieces join continuously") {
  const auto f = two_point();
  for (const auto& g : f.gaps)
    if (f.window.contains(g.gap.mid())) CHECK(f.evaluate(g.gap.mid()) == g.bridge.apex);
  CHECK(continuity_defect(f) <= 1e-12);
}

TEST_CASE("gap images lie on their bridges") {
  Rng rng(5);
  const auto f = extend(oracle::make_map(oracle::random_sites(rng, 6, 1.0), oracle::random_images(rng, 6, 2)),
                        PowerModulus{2.0, 0.5});
  for (const auto& g : f.gaps) {
    if (!f.window.contains(g.gap.lo) || !f.window.contains(g.gap.hi)) continue;
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double x = i == 100 ? g.gap.hi : g.gap.lo + g.gap.length() * i / 100.0;
      const auto y = f.evaluate(x);
      CHECK(y == g.eval(x));
      worst = std::max(worst, std::min(point_segment_distance(y, g.bridge.p, g.bridge.apex),
                                       point_segment_distance(y, g.bridge.apex, g.bridge.q)));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("evaluation outside the window raises") {
  const auto f = two_point();
  CHECK_THROWS_WITH_AS(f.evaluate(3.5), "outside materialized window", DomainError);
  CHECK_THROWS_AS(f.evaluate(-2.0001), DomainError);
}

TEST_CASE("original coordinates") {
  const auto f = extend(oracle::make_map({3, 5}, {{0}, {4}}), PowerModulus::identity());
  const auto y = f.evaluate_original(5.0);
  CHECK(y[0] == doctest::Approx(4.0).epsilon(1e-15));
  const auto z = f.evaluate_original(7.0);  // the next period
  CHECK(z[0] == doctest::Approx(8.0).epsilon(1e-15));
}

TEST_CASE("F on E reproduces the input constant") {
  Rng rng(9);
  for (int t = 0; t < 5; ++t) {
    const auto map = oracle::make_map(oracle::random_sites(rng, 5, 1.0), oracle::random_images(rng, 5, 2));
    const auto f = extend(map, fitted(map), {1, 1e-4, 0});
    std::vector<double> sites;
    PointSet direct(f.n), via(f.N);
    for (const auto& p : f.pieces) {
      if (!f.window.contains(p.centre)) continue;
      sites.push_back(p.centre);
      direct.push_back(p.value);
      via.push_back(f.evaluate(p.centre));
    }
    const auto a = weak_qs_constant(SiteMap(sites, direct));
    const auto b = weak_qs_constant(SiteMap(sites, via));
    CHECK(a.weak_constant == b.weak_constant);
    CHECK(a.worst_indices == b.worst_indices);
  }
}

TEST_CASE("injectivity on sampled pairs") {
  Rng rng(11);
  for (int t = 0; t < 3; ++t) {
    const auto map = oracle::make_map(oracle::random_sites(rng, 8, 2.0), oracle::random_images(rng, 8, 2));
    const auto f = extend(map, fitted(map));
    const auto rep = injectivity_check(f, 20000, t);
    CHECK(rep.collisions == 0);
    CHECK(rep.min_distance > 0.0);
    CHECK(bridge_separation_report(f.bridges()).ok());
  }
}

TEST_CASE("verification is deterministic and self-consistent") {
  const auto map = corpus::power_map(corpus::cantor_endpoints(3), 0.7);
  const auto f = extend(map, fitted(map));
  const auto a = verify_extension(f, 5000, 3);
  const auto b = verify_extension(f, 5000, 3);
  CHECK(a.weak_constant == b.weak_constant);
  CHECK(a.worst_triple == b.worst_triple);
  CHECK(a.monotonicity_constant == b.monotonicity_constant);
  CHECK(a.dist4_lower == b.dist4_lower);
  CHECK(std::isfinite(a.weak_constant));
  CHECK(a.weak_constant >= 1.0);
  CHECK(a.monotonicity_constant >= 1.0);
  CHECK(a.dist4_lower >= 1.0);
  CHECK(a.sample_spec.uniform == 2000);
  CHECK(a.sample_spec.gap_adversarial == 2000);
  CHECK(a.sample_spec.cross_scale == 1000);
  CHECK(a.dist4_pairs > 0);

  // every drawn ordered triple satisfies the monotonicity bound with the reported K
  for (auto t : draw_triples(f, 5000, 3)) {
    std::sort(t.begin(), t.end());
    const auto y0 = f.evaluate(t[0]), y1 = f.evaluate(t[1]), y2 = f.evaluate(t[2]);
    CHECK(std::max(distance(y0, y1), distance(y1, y2)) / distance(y0, y2) <= a.monotonicity_constant);
  }
}

TEST_CASE("verified constant is stable under refinement") {
  const auto map = corpus::power_map(corpus::cantor_endpoints(3), 0.7);
  const auto mod = fitted(map);
  const auto h1 = verify_extension(extend(map, mod, {2, 1e-4, 0}), 5000, 1).weak_constant;
  const auto h2 = verify_extension(extend(map, mod, {2, 2.5e-5, 0}), 5000, 1).weak_constant;
  CHECK(h2 == doctest::Approx(h1).epsilon(0.1));
}

TEST_CASE("stage failures carry the stage name") {
  CHECK_THROWS_WITH_AS(extend(oracle::make_map({0, 1}, {{0}, {1}}), PowerModulus::identity(), {0, 1e-4, 0}),
                       doctest::Contains("periodize"), InvalidArgument);
  CHECK_THROWS_AS(extend(oracle::make_map({0, 1}, {{0}, {1}}), PowerModulus::identity(), {2, 0.0, 0}),
                  InvalidArgument);
}
