#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "qsx/error.hpp"
#include "qsx/kernels.hpp"
#include "qsx/metric_core.hpp"

using namespace qsx;

TEST_CASE("relative distance of point sets") {
  std::vector<double> a{0, 1}, b{3, 5};
  CHECK(relative_distance(a, b) == 2.0);
  std::vector<double> a7{0, 7}, b7{21, 35};
  CHECK(relative_distance(a7, b7) == doctest::Approx(2.0).epsilon(1e-12));
  std::vector<double> single{1.0};
  CHECK_THROWS_AS(relative_distance(single, b), DomainError);
  std::vector<double> dup{2.0, 2.0};
  CHECK_THROWS_AS(relative_distance(dup, b), DomainError);
}

TEST_CASE("relative distance of touching intervals is zero") {
  CHECK(relative_distance(Interval{0, 1}, Interval{1, 2}) == 0.0);
  IntervalSet a({{0, 1}}), b({{1, 2}});
  CHECK(relative_distance(a, b) == 0.0);
  CHECK_THROWS_AS(relative_distance(Interval{0, 0}, Interval{1, 2}), DomainError);
}

TEST_CASE("relative distance in the plane") {
  auto a = PointSet::from_rows({{0, 0}, {1, 0}});
  auto b = PointSet::from_rows({{0, 3}, {0, 5}});
  CHECK(relative_distance(a, b) == 3.0);
}

TEST_CASE("relative connectedness examples") {
  std::vector<double> two{0, 1};
  CHECK(relative_connectedness_constant(two) == 1.0);
  std::vector<double> e{0, 1, 2, 4};
  CHECK(relative_connectedness_constant(e) == 3.0);
  CHECK(oracle::relative_connectedness(e) == 3.0);

  std::vector<double> geo{0.0};
  for (int k = 0; k <= 6; ++k) geo.push_back(std::pow(4.0, -k));
  // x = 4^-k sees distances 3*4^-(k+1)... and then 15*4^-(k+1) on its way to the next points.
  CHECK(relative_connectedness_constant(geo) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(oracle::relative_connectedness(geo) == doctest::Approx(5.0).epsilon(1e-12));

  std::vector<double> one{3.0};
  CHECK_THROWS_AS(relative_connectedness_constant(one), DomainError);
}

TEST_CASE("relative connectedness matches the annulus oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = 2 + rng.below(9);
    auto s = oracle::random_sites(rng, m, 4.0);
    const double got = relative_connectedness_constant(s);
    const double want = oracle::relative_connectedness(s);
    REQUIRE(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("relative connectedness in R^n agrees with R on collinear data") {
  std::vector<double> e{0, 1, 2, 4, 8, 16};
  PointSet p(2);
  for (double x : e) p.push_back(std::vector<double>{x, 0.0});
  CHECK(relative_connectedness_constant(p) == relative_connectedness_constant(e));
}

TEST_CASE("similarity invariance") {
  // Spacings stay within two decades so the transformed inputs keep 1e-12 relative accuracy.
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = 3 + rng.below(8);
    auto s = oracle::random_sites(rng, m, 2.0);
    auto f = oracle::random_images(rng, m, 2);
    const double a = rng.uniform(0.1, 10.0), b = rng.uniform(-10.0, 10.0);
    const double lam = rng.uniform(0.1, 10.0), th = rng.uniform(0.0, 6.28);
    std::vector<double> s2;
    for (double x : s) s2.push_back(a * x + b);
    std::vector<std::vector<double>> f2;
    for (auto& p : f)
      f2.push_back({lam * (std::cos(th) * p[0] - std::sin(th) * p[1]) + 1.0,
                    lam * (std::sin(th) * p[0] + std::cos(th) * p[1]) - 2.0});
    CHECK(relative_connectedness_constant(s2) ==
          doctest::Approx(relative_connectedness_constant(s)).epsilon(1e-12));
    const auto h1 = weak_qs_constant(oracle::make_map(s, f));
    const auto h2 = weak_qs_constant(oracle::make_map(s2, f2));
    CHECK(h2.raw_ratio == doctest::Approx(h1.raw_ratio).epsilon(1e-12));
    std::vector<double> half1(s.begin(), s.begin() + 2), half2(s.end() - 2, s.end());
    std::vector<double> t1(s2.begin(), s2.begin() + 2), t2(s2.end() - 2, s2.end());
    if (m >= 4) {
      CHECK(relative_distance(t1, t2) ==
            doctest::Approx(relative_distance(half1, half2)).epsilon(1e-12));
    }
  }
}

TEST_CASE("gap constant") {
  IntervalSet e({{0, 1}, {2, 3}, {4, 5}});
  CHECK(uniform_perfectness_gap_constant(e) == 1.0);
  IntervalSet e10({{0, 10}, {20, 30}, {40, 50}});
  CHECK(uniform_perfectness_gap_constant(e10) == 1.0);
  IntervalSet one_gap({{0, 1}, {2, 3}});
  CHECK(std::isinf(uniform_perfectness_gap_constant(one_gap)));
}

TEST_CASE("uniform perfectness constant") {
  // Centre -1/2 sees E at distances [0, 1/2] and [3/2, 5/2].
  IntervalSet e({{-1, 0}, {1, 2}});
  CHECK(uniform_perfectness_constant(e) == 3.0);
  IntervalSet single({{0, 1}});
  CHECK(uniform_perfectness_constant(single) == 1.0);
  IntervalSet with_point({{0, 1}, {2, 2}});
  CHECK(std::isinf(uniform_perfectness_constant(with_point)));
}

TEST_CASE("weak quasisymmetry examples") {
  auto id = oracle::make_map({0, 1, 2, 5}, {{0}, {1}, {2}, {5}});
  CHECK(weak_qs_constant(id).weak_constant == 1.0);
  auto sim = oracle::make_map({0, 1, 2, 5}, {{7}, {10}, {13}, {22}});
  CHECK(weak_qs_constant(sim).weak_constant == 1.0);
  auto sq = oracle::make_map({0, 1, 2, 4}, {{0}, {1}, {4}, {16}});
  const auto q = weak_qs_constant(sq);
  CHECK(q.weak_constant == 3.0);
  const auto w = q.worst_triple;
  CHECK(std::abs(w[0] - w[1]) <= std::abs(w[0] - w[2]));
  CHECK(std::abs(w[1] * w[1] - w[0] * w[0]) == 3.0 * std::abs(w[2] * w[2] - w[0] * w[0]));
  CHECK_THROWS_AS(weak_qs_constant(oracle::make_map({0, 1}, {{0}, {1}})), DomainError);
}

TEST_CASE("raw ratio can be below one, reported constant cannot") {
  auto m = oracle::make_map({0, 1, 3}, {{0}, {1}, {3}});
  const auto q = weak_qs_constant(m);
  CHECK(q.raw_ratio == doctest::Approx(2.0 / 3.0));
  CHECK(q.weak_constant == 1.0);
}

TEST_CASE("weak quasisymmetry matches the triple oracle and its tie-break") {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = 3 + rng.below(8);
    auto s = oracle::random_sites(rng, m);
    auto f = oracle::random_images(rng, m, 1 + rng.below(3));
    if (trial % 3 == 0) {
      for (auto& x : s) x = std::round(x * 4.0) + double(&x - s.data()) * 16.0;  // ties in distances
    }
    const auto map = oracle::make_map(s, f);
    const auto got = weak_qs_constant(map);
    const auto want = oracle::weak_qs(s, f);
    REQUIRE(got.raw_ratio == doctest::Approx(want.value).epsilon(1e-12));
    const auto ref = kernels::weak_qs_scan_reference(s, map.images());
    const auto fast = kernels::weak_qs_scan(s, map.images());
    REQUIRE(ref.value == fast.value);
    REQUIRE(ref.indices == fast.indices);
  }
}

TEST_CASE("restriction never increases the weak constant") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = 5 + rng.below(6);
    auto s = oracle::random_sites(rng, m);
    auto f = oracle::random_images(rng, m, 2);
    const auto map = oracle::make_map(s, f);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < m; ++i)
      if (rng.coin() || keep.size() < 3) keep.push_back(i);
    if (keep.size() < 3) continue;
    CHECK(weak_qs_constant(map.restrict(keep)).raw_ratio <= weak_qs_constant(map).raw_ratio);
  }
}

TEST_CASE("reversal with reflected images leaves H unchanged") {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = 3 + rng.below(8);
    auto s = oracle::random_sites(rng, m);
    auto f = oracle::random_images(rng, m, 2);
    std::vector<double> rs;
    std::vector<std::vector<double>> rf;
    for (std::size_t i = m; i-- > 0;) {
      rs.push_back(-s[i]);
      rf.push_back({-f[i][0], -f[i][1]});
    }
    CHECK(weak_qs_constant(oracle::make_map(rs, rf)).raw_ratio ==
          doctest::Approx(weak_qs_constant(oracle::make_map(s, f)).raw_ratio).epsilon(1e-12));
  }
}

TEST_CASE("site map validation") {
  CHECK_THROWS_AS(oracle::make_map({0}, {{0}}), InvalidArgument);
  CHECK_THROWS_AS(oracle::make_map({0, 0}, {{0}, {1}}), InvalidArgument);
  CHECK_THROWS_AS(oracle::make_map({0, 1}, {{0}, {0}}), InvalidArgument);
  CHECK_THROWS_AS(SiteMap({0, 1}, PointSet::from_rows({{0}})), InvalidArgument);
}

TEST_CASE("modulus evaluation and inversion") {
  const auto id = PowerModulus::identity();
  CHECK(modulus_eval(id, 2.0) == 2.0);
  const PowerModulus m{2.0, 0.5};
  CHECK(modulus_eval(m, 1.0) == 2.0);
  CHECK(modulus_eval(m, 0.25) == 1.0);
  CHECK(modulus_eval(m, 4.0) == 32.0);
  CHECK(modulus_invert(id, 0.5) == 0.5);
  CHECK(modulus_invert(m, 0.5) == 1.0 / 16.0);
  CHECK(modulus_invert(m, 0.5) == doctest::Approx(oracle::bisect_invert(2.0, 0.5, 0.5)).epsilon(1e-12));
  CHECK(modulus_invert(m, 2.0) == 1.0);
  CHECK(modulus_eval(m, 0.0) == 0.0);
  CHECK_THROWS_AS(modulus_eval(m, -1.0), InvalidArgument);
  CHECK_THROWS_AS(modulus_invert(m, -1.0), InvalidArgument);
  CHECK_THROWS_AS(PowerModulus(0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(PowerModulus(1.0, 1.5), InvalidArgument);
}

TEST_CASE("modulus inversion round trip and monotonicity") {
  Rng rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    const PowerModulus m{rng.uniform(0.1, 10.0), rng.uniform(0.01, 1.0)};
    const double t = rng.uniform(0.0, 1000.0);
    CHECK(modulus_invert(m, modulus_eval(m, t)) == doctest::Approx(t).epsilon(1e-10));
    const double t2 = t + rng.uniform(1e-6, 1.0);
    CHECK(modulus_eval(m, t2) > modulus_eval(m, t));
  }
}

TEST_CASE("power-modulus fit") {
  std::vector<std::array<double, 2>> lin;
  for (double t : {0.25, 0.5, 1.0, 2.0, 4.0}) lin.push_back({t, t});
  const auto f1 = fit_power_modulus(lin);
  CHECK(f1.scale == 1.0);
  CHECK(f1.exponent == 1.0);

  std::vector<std::array<double, 2>> pw;
  for (double t : {0.25, 0.5, 1.0, 2.0, 4.0})
    pw.push_back({t, 2.0 * std::max(std::sqrt(t), t * t)});
  const auto f2 = fit_power_modulus(pw);
  CHECK(f2.scale == doctest::Approx(2.0).epsilon(1e-12));
  // Neighbouring log-grid exponents are about 0.9% apart.
  CHECK(f2.exponent == doctest::Approx(0.5).epsilon(0.01));
  CHECK(f2.exponent <= 0.5);

  const std::array<std::array<double, 2>, 1> single{{{1.0, 3.0}}};
  const auto f3 = fit_power_modulus(single);
  CHECK(f3.scale == 3.0);
  CHECK(f3.exponent == 1.0);

  CHECK_THROWS_AS(fit_power_modulus(std::span<const std::array<double, 2>>{}), InvalidArgument);
}

TEST_CASE("fitted modulus dominates every sample exactly") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = 3 + rng.below(10);
    auto s = oracle::random_sites(rng, m);
    auto f = oracle::random_images(rng, m, 2);
    const auto map = oracle::make_map(s, f);
    const auto frontier = ratio_samples(map);
    const auto fit = fit_power_modulus(frontier);
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
          if (x == a || x == b || a == b) continue;
          const double t = std::abs(s[x] - s[a]) / std::abs(s[x] - s[b]);
          const double rho = oracle::euclid(f[x], f[a]) / oracle::euclid(f[x], f[b]);
          REQUIRE(rho <= modulus_eval(fit, t));
        }
  }
}

TEST_CASE("hoelder envelope") {
  CHECK(holder_envelope(oracle::make_map({0, 0.5, 1}, {{0}, {0.5}, {1}}), 1.0) == 1.0);
  CHECK(holder_envelope(oracle::make_map({0, 0.5, 1}, {{0}, {0.25}, {1}}), 1.0) == 2.0);
  std::vector<double> s{0, 0.1, 0.35, 1};
  const auto map = oracle::make_map(s, {{0}, {0.1}, {0.35}, {1}});
  double want = 1.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double d = s[j] - s[i];
      // identity data: C'|d|^(1/2) >= d and C'^-1 d^2 <= d
      want = std::max({want, d / std::sqrt(d), d * d / d});
    }
  CHECK(holder_envelope(map, 0.5) == doctest::Approx(want).epsilon(1e-12));
  CHECK(holder_envelope(map, 0.5) == 1.0);
  // x^2 with alpha = 1/2: the pair (1/2, 1) gives (3/4) / (1/2)^(1/2).
  const auto sq = oracle::make_map({0, 0.5, 1}, {{0}, {0.25}, {1}});
  CHECK(holder_envelope(sq, 0.5) == doctest::Approx(0.75 / std::sqrt(0.5)).epsilon(1e-12));
  CHECK_THROWS_AS(holder_envelope(map, 0.0), InvalidArgument);
}

TEST_CASE("parallel pair kernel equals serial") {
  Rng rng(2);
  std::vector<double> v(300);
  for (auto& x : v) x = rng.uniform();
  auto f = [&](std::size_t i, std::size_t j) { return std::abs(v[i] - v[j]) * (v[i] + 1.0); };
  CHECK(kernels::pair_max(v.size(), f) == kernels::pair_max_reference(v.size(), f));
}

TEST_CASE("ratio samples are the exact frontier of all triples") {
  Rng rng(77);
  for (int t = 0; t < 40; ++t) {
    const auto m = 3 + rng.below(30);
    const auto s = oracle::random_sites(rng, m, 6.0);
    const auto f = oracle::random_images(rng, m, 2);
    std::vector<std::array<double, 2>> all;
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
          if (a == x || b == x || a == b) continue;
          all.push_back({std::abs(s[x] - s[a]) / std::abs(s[x] - s[b]),
                         oracle::euclid(f[x], f[a]) / oracle::euclid(f[x], f[b])});
        }
    std::sort(all.begin(), all.end(), [](const auto& p, const auto& q) { return p[0] < q[0] || (p[0] == q[0] && p[1] > q[1]); });
    std::vector<std::array<double, 2>> front;
    for (const auto& v : all)
      if (front.empty() || v[1] > front.back()[1]) front.push_back(v);
    const auto got = ratio_samples(oracle::make_map(s, f));
    REQUIRE(got.size() == front.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i][0] == doctest::Approx(front[i][0]).epsilon(1e-14));
      CHECK(got[i][1] == doctest::Approx(front[i][1]).epsilon(1e-14));
    }
  }
}
