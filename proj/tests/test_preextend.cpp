#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qsx/error.hpp"
#include "qsx/preextend.hpp"

using namespace qsx;

TEST_CASE("normalize") {
  const auto a = normalize(oracle::make_map({3, 5}, {{0}, {4}}));
  CHECK(a.map.sites() == std::vector<double>{0, 1});
  CHECK(a.map.images().coords() == std::vector<double>{0, 1});
  CHECK(a.similarity.site_from_normalized(1.0) == 5.0);
  CHECK(a.similarity.image_from_normalized(std::vector<double>{1.0})[0] == 4.0);

  const auto id = normalize(oracle::make_map({0, 0.5, 1}, {{0}, {0.5}, {1}}));
  CHECK(id.similarity.is_identity());
  CHECK(id.map.sites() == std::vector<double>{0, 0.5, 1});

  const auto c = normalize(oracle::make_map({0, 1, 2}, {{0, 0}, {1, 1}, {2, 0}}));
  CHECK(c.map.sites() == std::vector<double>{0, 0.5, 1});
  CHECK(diameter(c.map.images()) == 1.0);
  CHECK(c.map.image(1)[0] == 0.5);
  CHECK(c.map.image(1)[1] == 0.5);
  CHECK(is_normalized(c.map));
}

TEST_CASE("normalization round trip on random data") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto m = 2 + rng.below(10);
    auto s = oracle::random_sites(rng, m);
    auto f = oracle::random_images(rng, m, 3);
    const auto nm = normalize(oracle::make_map(s, f));
    CHECK(is_normalized(nm.map));
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(nm.similarity.site_from_normalized(nm.map.site(i)) == doctest::Approx(s[i]).epsilon(1e-12));
      const auto y = nm.similarity.image_from_normalized(nm.map.image(i));
      CHECK(oracle::euclid(y, f[i]) <= 1e-12);
    }
  }
}

TEST_CASE("periodize") {
  const auto id = oracle::make_map({0, 1}, {{0}, {1}});
  const auto p = periodize(id, 1);
  CHECK(p.materialized.sites() == std::vector<double>{-2, -1, 0, 1, 2, 3});
  CHECK(p.materialized.images().coords() == std::vector<double>{-2, -1, 0, 1, 2, 3});

  const auto planar = oracle::make_map({0, 1}, {{0, 0}, {0, 1}});
  const auto q = periodize(planar, 1);
  const auto y = q.materialized.image(q.index(1, 0));
  CHECK(q.materialized.site(q.index(1, 0)) == 2.0);
  CHECK(y[0] == 2.0);
  CHECK(y[1] == 0.0);

  CHECK(weak_qs_constant(periodize(oracle::make_map({0, 0.25, 1}, {{0}, {0.25}, {1}}), 2).materialized)
            .weak_constant == 1.0);
  CHECK_THROWS_WITH_AS(periodize(oracle::make_map({0, 2}, {{0}, {1}}), 1),
                       "periodize requires normalized map", InvalidArgument);
}

TEST_CASE("periodized weak constant is stable in the window size") {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto m = 3 + rng.below(6);
    auto s = oracle::random_sites(rng, m, 1.0);
    auto f = oracle::random_images(rng, m, 2);
    const auto base = normalize(oracle::make_map(s, f)).map;
    const double h1 = weak_qs_constant(periodize(base, 1).materialized).weak_constant;
    const double h3 = weak_qs_constant(periodize(base, 3).materialized).weak_constant;
    CHECK(std::isfinite(h1));
    CHECK(h3 == doctest::Approx(h1).epsilon(0.05));
  }
}

TEST_CASE("reflection constant C0") {
  CHECK(reflection_c0(PowerModulus::identity()) == 2.0);
  CHECK(reflection_c0(PowerModulus{2.0, 0.5}) == 16.0);
}

TEST_CASE("reflection ladder") {
  std::vector<double> e{0, 1, 2, 4, 8, 16};
  std::vector<std::vector<double>> f;
  for (double x : e) f.push_back({x});
  const auto map = oracle::make_map(e, f);
  const double m = relative_connectedness_constant(e);
  const auto r = reflect_unbounded(map, Side::lower, PowerModulus::identity(), m);
  CHECK(r.ladder == std::vector<double>{1, 2, 4, 8, 16});
  CHECK(r.truncated);
  CHECK(r.lifted_dim == 2);
  CHECK(r.lifted.size() == 11);
  std::size_t idx = 0;
  while (r.lifted.site(idx) != -4.0) ++idx;
  CHECK(r.lifted.image(idx)[0] == 0.0);
  CHECK(r.lifted.image(idx)[1] == -4.0);
  // original images carry a zero last coordinate
  CHECK(r.lifted.image(r.lifted.size() - 1)[1] == 0.0);
  for (std::size_t k = 1; k < r.ladder.size(); ++k) {
    const double q = r.ladder[k] / r.ladder[k - 1];
    CHECK(q >= r.c0);
    CHECK(q <= m * r.c0);
  }
}

TEST_CASE("upper-side reflection mirrors the lower side") {
  std::vector<double> e{-16, -8, -4, -2, -1, 0};
  std::vector<std::vector<double>> f;
  for (double x : e) f.push_back({x});
  const auto r = reflect_unbounded(oracle::make_map(e, f), Side::upper, PowerModulus::identity(), 3.0);
  CHECK(r.ladder == std::vector<double>{1, 2, 4, 8, 16});
  CHECK(r.lifted.sites().back() == 16.0);
  CHECK(r.lifted.images().row(r.lifted.size() - 1) == std::vector<double>{0.0, -16.0});
}

TEST_CASE("reflection requires the unit site") {
  const auto map = oracle::make_map({0, 3, 7}, {{0}, {3}, {7}});
  CHECK_THROWS_AS(reflect_unbounded(map, Side::lower, PowerModulus::identity(), 3.0), DomainError);
}

TEST_CASE("fattening") {
  const auto map = oracle::make_map({0, 1, 3}, {{0}, {1}, {3}});
  const auto fat = fatten_isolated(map, PowerModulus::identity());
  REQUIRE(fat.pieces.size() == 3);
  CHECK(fat.pieces[1].span.lo == doctest::Approx(0.9));
  CHECK(fat.pieces[1].span.hi == doctest::Approx(1.1));
  CHECK(fat.pieces[1].neighbour == 0);
  CHECK(fat.pieces[1].slope == 1.0);
  CHECK(fat.pieces[2].span.lo == doctest::Approx(2.8));
  IntervalSet e1({fat.pieces[1].span});
  IntervalSet rest({fat.pieces[0].span, fat.pieces[2].span});
  CHECK(relative_distance(e1, rest) == doctest::Approx(4.0).epsilon(1e-12));

  const auto rep = verify_fattening_ratios(fat);
  CHECK(rep.ok());
  CHECK(rep.domain_min >= 4.0 - 1e-9);
  CHECK(rep.domain_max <= 5.0 + 1e-9);
  CHECK(rep.image_min >= 3.0 - 1e-9);
  CHECK(rep.image_max <= 5.0 + 1e-9);
  CHECK(rep.pieces[1].domain_ratio == doctest::Approx(4.0).epsilon(1e-12));

  for (const auto& p : fat.pieces) CHECK(p.eval(p.centre) == p.value);
}

TEST_CASE("two-point fattening ratios are exactly four") {
  const auto fat = fatten_isolated(oracle::make_map({0, 1}, {{0}, {1}}), PowerModulus::identity());
  const auto rep = verify_fattening_ratios(fat);
  CHECK(rep.pieces[0].domain_ratio == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(rep.pieces[1].domain_ratio == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("fattening slope carries the modulus factor") {
  const auto fat = fatten_isolated(oracle::make_map({0, 1, 3}, {{0}, {2}, {6}}), PowerModulus{4.0, 0.5});
  CHECK(fat.pieces[1].slope == doctest::Approx(0.5));
}

TEST_CASE("verification reports an offending piece") {
  // Rest of the set much smaller than the piece: the domain bound cannot hold.
  const auto fat = fatten_isolated(oracle::make_map({0, 10, 10.001}, {{0}, {10}, {10.001}}),
                                   PowerModulus::identity());
  const auto rep = verify_fattening_ratios(fat);
  CHECK_FALSE(rep.ok());
  CHECK(rep.violations.front().find("piece 0") != std::string::npos);
}

TEST_CASE("fattened gap constant is similarity invariant") {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const auto m = 3 + rng.below(8);
    auto s = oracle::random_sites(rng, m, 2.0);
    auto f = oracle::random_images(rng, m, 2);
    const auto fat = fatten_isolated(oracle::make_map(s, f), PowerModulus::identity());
    std::vector<double> s2;
    for (double x : s) s2.push_back(3.0 * x - 1.0);
    const auto fat2 = fatten_isolated(oracle::make_map(s2, f), PowerModulus::identity());
    const double g1 = uniform_perfectness_gap_constant(fat.intervals());
    const double g2 = uniform_perfectness_gap_constant(fat2.intervals());
    CHECK(g1 > 0.0);
    CHECK(g2 == doctest::Approx(g1).epsilon(1e-9));
  }
}
