#include "qsx/assemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <sstream>

#include "qsx/error.hpp"
#include "qsx/rng.hpp"

namespace qsx {

namespace {

template <class Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  const std::string prefix = std::string(stage) + ": ";
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + e.what());
  } catch (const DomainError& e) {
    throw DomainError(prefix + e.what());
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(prefix + e.what());
  }
}

// Index of the first piece whose span ends at or after x.
std::size_t piece_at_or_after(const std::vector<FatPiece>& pieces, double x) {
  const auto it = std::partition_point(pieces.begin(), pieces.end(), [x](const FatPiece& p) { return p.span.hi < x; });
  return static_cast<std::size_t>(it - pieces.begin());
}

struct Location {
  bool in_piece = false;
  std::size_t index = 0;  // piece index, or gap index
};

Location locate(const ExtensionMap& f, double x) {
  const std::size_t i = piece_at_or_after(f.pieces, x);
  if (i < f.pieces.size() && x >= f.pieces[i].span.lo) return {true, i};
  return {false, i - 1};
}

}  // namespace

Point ExtensionMap::evaluate(double x) const {
  if (!(x >= window.lo && x <= window.hi)) throw DomainError("outside materialized window");
  const auto loc = locate(*this, x);
  if (loc.in_piece) return padded(pieces[loc.index].eval(x), N);
  return gaps[loc.index].eval(x);
}

Point ExtensionMap::evaluate_original(double x) const {
  return similarity.image_from_normalized(evaluate(similarity.site_to_normalized(x)));
}

std::vector<Bridge> ExtensionMap::bridges() const {
  std::vector<Bridge> out;
  out.reserve(gaps.size());
  for (const auto& g : gaps) out.push_back(g.bridge);
  return out;
}

IntervalSet ExtensionMap::fattened_set() const {
  std::vector<Interval> iv;
  iv.reserve(pieces.size());
  for (const auto& p : pieces) iv.push_back(p.span);
  return IntervalSet(iv);
}

ExtensionMap extend(const SiteMap& map, const PowerModulus& modulus, const ExtensionConfig& config) {
  ExtensionMap out;
  out.config = config;
  out.modulus = modulus;
  if (!(config.resolution > 0.0 && config.resolution < 0.5))
    throw InvalidArgument("extend: resolution must lie in (0, 1/2)");

  const auto nm = staged("normalize", [&] { return normalize(map); });
  out.similarity = nm.similarity;
  const auto per = staged("periodize", [&] { return periodize(nm.map, config.periods); });
  out.window = per.interior();
  out.n = per.materialized.ambient_dim();

  const auto fat = staged("fatten", [&] { return fatten_isolated(per.materialized, modulus); });
  out.pieces = fat.pieces;
  const IntervalSet e = fat.intervals();
  const auto gaps = e.gaps();
  out.uniform_perfectness = staged("gaps", [&] { return uniform_perfectness_constant(e); });
  out.delta0 = compute_delta0(modulus);

  std::vector<GapEndpoints> ends;
  ends.reserve(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i)
    ends.push_back({gaps[i], out.pieces[i].eval_right(), out.pieces[i + 1].eval_left()});

  out.assignment = staged("assign_dimensions", [&] {
    return assign_dimensions(ends, out.n, modulus, out.uniform_perfectness, config.seed);
  });
  if (out.assignment.palette_capped) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "palette bound " << out.assignment.palette_bound << " exceeds the gap count; n0 capped at "
        << out.assignment.n0;
    out.warnings.push_back(msg.str());
  }
  out.N = out.assignment.total_dim;

  const auto& pieces = out.pieces;
  const SiteFunction fhat = [&pieces](double x) {
    const std::size_t i = piece_at_or_after(pieces, x);
    if (i == pieces.size() || x < pieces[i].span.lo) throw InvariantViolation("gap map queried off the set");
    return pieces[i].eval(x);
  };

  std::vector<std::optional<GapMap>> built(gaps.size());
  std::vector<std::exception_ptr> errors(gaps.size());
  const auto count = static_cast<std::ptrdiff_t>(gaps.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t ii = 0; ii < count; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      const auto b = make_bridge(padded(ends[i].image_lo, out.N), padded(ends[i].image_hi, out.N),
                                 out.assignment.gap_dims[i], out.n);
      built[i] = build_gap_map(e, fhat, gaps[i], b, out.delta0, out.uniform_perfectness,
                               config.resolution * gaps[i].length());
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& err : errors)
    if (err) staged("gap_maps", [&] { std::rethrow_exception(err); });

  out.gaps.reserve(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    for (const auto& w : built[i]->warnings) out.warnings.push_back("gap " + std::to_string(i) + ": " + w);
    out.gaps.push_back(std::move(*built[i]));
  }
  return out;
}

double continuity_defect(const ExtensionMap& f) {
  double worst = 0.0;
  for (std::size_t i = 0; i < f.gaps.size(); ++i) {
    const auto& g = f.gaps[i];
    worst = std::max(worst, distance(padded(f.pieces[i].eval_right(), f.N), g.eval(g.gap.lo)));
    worst = std::max(worst, distance(padded(f.pieces[i + 1].eval_left(), f.N), g.eval(g.gap.hi)));
  }
  return worst;
}

std::vector<std::array<double, 3>> draw_triples(const ExtensionMap& f, std::size_t samples, std::uint64_t seed,
                                                SampleSpec* spec, std::vector<std::string>* warnings) {
  const Interval w = f.window;
  const double width = w.length();
  auto clamp = [&](double x) { return std::clamp(x, w.lo, w.hi); };

  std::vector<const GapMap*> inner;
  for (const auto& g : f.gaps)
    if (g.gap.lo >= w.lo && g.gap.hi <= w.hi) inner.push_back(&g);

  SampleSpec s;
  s.samples = samples;
  s.seed = seed;
  s.gap_adversarial = inner.empty() ? 0 : samples * 2 / 5;
  s.cross_scale = samples / 5;
  s.uniform = samples - s.gap_adversarial - s.cross_scale;
  if (inner.empty() && warnings) warnings->push_back("no gap inside the window; gap stratum folded into uniform");
  if (spec) *spec = s;

  auto distinct = [](const std::array<double, 3>& t) { return t[0] != t[1] && t[0] != t[2] && t[1] != t[2]; };
  std::vector<std::array<double, 3>> out;
  out.reserve(samples);

  Rng uni(derive_seed(seed, 1));
  while (out.size() < s.uniform) {
    std::array<double, 3> t{uni.uniform(w.lo, w.hi), uni.uniform(w.lo, w.hi), uni.uniform(w.lo, w.hi)};
    if (distinct(t)) out.push_back(t);
  }

  Rng adv(derive_seed(seed, 2));
  const std::size_t after_adv = s.uniform + s.gap_adversarial;
  while (out.size() < after_adv) {
    const GapMap& g = *inner[adv.below(inner.size())];
    const double len = g.gap.length();
    const double end = adv.coin() ? g.gap.lo : g.gap.hi;
    const double x = clamp(end + adv.uniform(-1e-3, 1e-3) * len);
    auto offset = [&] { return (adv.coin() ? 1.0 : -1.0) * len * std::pow(10.0, adv.uniform(-4.0, 1.0)); };
    std::array<double, 3> t{x, clamp(x + offset()), clamp(x + offset())};
    if (distinct(t)) out.push_back(t);
  }

  Rng cross(derive_seed(seed, 3));
  while (out.size() < samples) {
    const double x = cross.uniform(w.lo, w.hi);
    auto offset = [&] { return (cross.coin() ? 1.0 : -1.0) * width * std::pow(10.0, cross.uniform(-4.0, 0.0)); };
    std::array<double, 3> t{x, clamp(x + offset()), clamp(x + offset())};
    if (distinct(t)) out.push_back(t);
  }
  return out;
}

namespace {

// (x', y') = (min, max) of E n [x, y], or nullopt when x and y share a gap.
std::optional<std::array<double, 2>> inner_endpoints(const ExtensionMap& f, double x, double y) {
  const auto lx = locate(f, x);
  const auto ly = locate(f, y);
  if (!lx.in_piece && !ly.in_piece && lx.index == ly.index) return std::nullopt;
  const double xp = lx.in_piece ? x : f.pieces[lx.index + 1].span.lo;
  const double yp = ly.in_piece ? y : f.pieces[ly.index].span.hi;
  return std::array<double, 2>{xp, yp};
}

}  // namespace

std::vector<std::array<double, 3>> structural_triples(const ExtensionMap& f) {
  std::vector<std::array<double, 3>> out;
  const Interval w = f.window;
  for (std::size_t gi = 0; gi < f.gaps.size(); ++gi) {
    const auto& g = f.gaps[gi];
    if (g.gap.lo < w.lo || g.gap.hi > w.hi) continue;
    std::vector<double> centres(g.xs.begin(), g.xs.end());
    if (w.contains(f.pieces[gi].centre)) centres.push_back(f.pieces[gi].centre);
    const double hmin = 1e-4 * g.gap.length();
    const double hmax = 2.0 * g.gap.length();
    for (double c : centres) {
      for (int j = 0; j < 32; ++j) {
        const double h = hmin * std::pow(hmax / hmin, j / 31.0);
        // equal radii are ambiguous under rounding; offer both near-ties
        const double shrunk = h * (1.0 - 1e-9);
        const std::array<double, 3> a{std::max(w.lo, c - shrunk), c, std::min(w.hi, c + h)};
        const std::array<double, 3> b{std::max(w.lo, c - h), c, std::min(w.hi, c + shrunk)};
        for (const auto& t : {a, b})
          if (t[0] < t[1] && t[1] < t[2]) out.push_back(t);
      }
    }
  }
  return out;
}

namespace {

// max over base points of |F(x)-F(y)| / |F(x)-F(z)| with |x-y| <= |x-z|; -1 for invalid triples.
double triple_ratio(const ExtensionMap& f, const std::array<double, 3>& t, std::array<double, 3>* arg) {
  for (double x : t)
    if (!(x >= f.window.lo && x <= f.window.hi)) return -1.0;
  if (t[0] == t[1] || t[0] == t[2] || t[1] == t[2]) return -1.0;
  const std::array<Point, 3> v{f.evaluate(t[0]), f.evaluate(t[1]), f.evaluate(t[2])};
  double best = -1.0;
  for (int x = 0; x < 3; ++x) {
    int y = (x + 1) % 3, z = (x + 2) % 3;
    if (std::abs(t[x] - t[y]) > std::abs(t[x] - t[z])) std::swap(y, z);
    const double r = distance(v[x], v[y]) / distance(v[x], v[z]);
    if (r > best) {
      best = r;
      if (arg) *arg = {t[x], t[y], t[z]};
    }
  }
  return best;
}

// Adaptive compass search on the triple coordinates.
double refine_triple(const ExtensionMap& f, std::array<double, 3>& t, std::array<double, 3>& arg) {
  double cur = triple_ratio(f, t, &arg);
  double step = 0.25 * std::min({std::abs(t[0] - t[1]), std::abs(t[0] - t[2]), std::abs(t[1] - t[2])});
  const double stop = step * 1e-6;
  for (int it = 0; it < 2000 && step > stop; ++it) {
    bool improved = false;
    for (int c = 0; c < 3; ++c) {
      for (double sign : {1.0, -1.0}) {
        auto u = t;
        u[c] += sign * step;
        std::array<double, 3> ua;
        const double r = triple_ratio(f, u, &ua);
        if (r > cur) {
          cur = r;
          t = u;
          arg = ua;
          improved = true;
        }
      }
    }
    step *= improved ? 1.5 : 0.5;
  }
  return cur;
}

std::size_t component_id(const ExtensionMap& f, double x) {
  const auto loc = locate(f, x);
  return loc.in_piece ? 2 * loc.index : 2 * loc.index + 1;
}

}  // namespace

VerificationReport verify_extension(const ExtensionMap& f, std::size_t samples, std::uint64_t seed) {
  if (samples < 1000) throw InvalidArgument("verify_extension: at least 1000 samples required");
  VerificationReport rep;
  auto triples = draw_triples(f, samples, seed, &rep.sample_spec, &rep.warnings);
  const auto probes = structural_triples(f);
  rep.sample_spec.structural = probes.size();
  triples.insert(triples.end(), probes.begin(), probes.end());

  const std::size_t m = triples.size();
  std::vector<double> h(m), mono(m), lower(m, -kInf), upper(m, -kInf);
  std::vector<std::array<double, 3>> h_arg(m), sorted(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(m); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto t = triples[i];
    std::sort(t.begin(), t.end());
    sorted[i] = t;
    h[i] = triple_ratio(f, t, &h_arg[i]);
    const std::array<Point, 3> v{f.evaluate(t[0]), f.evaluate(t[1]), f.evaluate(t[2])};
    const double d02 = distance(v[0], v[2]);
    mono[i] = std::max(distance(v[0], v[1]), distance(v[1], v[2])) / d02;
    if (const auto ip = inner_endpoints(f, t[0], t[2])) {
      const auto fx = f.evaluate((*ip)[0]);
      const auto fy = f.evaluate((*ip)[1]);
      const double sum = distance(v[0], fx) + distance(fx, fy) + distance(fy, v[2]);
      lower[i] = sum / d02;
      upper[i] = d02 / sum;
    }
  }

  double best_h = -kInf, best_mono = -kInf, best_lower = -kInf, best_sampled = -kInf;
  for (std::size_t i = 0; i < m; ++i) {
    if (i < samples) best_sampled = std::max(best_sampled, h[i]);
    if (h[i] > best_h) {
      best_h = h[i];
      rep.worst_triple = h_arg[i];
    }
    if (mono[i] > best_mono) {
      best_mono = mono[i];
      rep.worst_monotone = sorted[i];
    }
    if (lower[i] == -kInf) continue;
    ++rep.dist4_pairs;
    if (lower[i] > best_lower) {
      best_lower = lower[i];
      rep.worst_dist4 = {sorted[i][0], sorted[i][2]};
    }
    rep.dist4_upper = std::max(rep.dist4_upper, upper[i]);
  }
  rep.sampled_weak_constant = std::max(1.0, best_sampled);

  // local refinement of the best triple in each of the leading components
  std::vector<std::pair<double, std::size_t>> per_component;
  {
    std::vector<std::pair<double, std::size_t>> best(2 * f.pieces.size(), {-kInf, 0});
    for (std::size_t i = 0; i < m; ++i) {
      auto& slot = best[component_id(f, sorted[i][1])];
      if (h[i] > slot.first) slot = {h[i], i};
    }
    for (const auto& b : best)
      if (b.first > 0.0) per_component.push_back(b);
    std::stable_sort(per_component.begin(), per_component.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    per_component.resize(std::min<std::size_t>(per_component.size(), kRefineStarts));
  }
  const std::size_t r = per_component.size();
  std::vector<double> refined(r);
  std::vector<std::array<double, 3>> refined_arg(r);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(r); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto t = sorted[per_component[i].second];
    refined[i] = refine_triple(f, t, refined_arg[i]);
  }
  rep.sample_spec.refined = r;
  for (std::size_t i = 0; i < r; ++i) {
    if (refined[i] > best_h) {
      best_h = refined[i];
      rep.worst_triple = refined_arg[i];
    }
  }

  rep.weak_constant = std::max(1.0, best_h);
  rep.monotonicity_constant = std::max(1.0, best_mono);
  rep.dist4_lower = std::max(1.0, best_lower);
  return rep;
}

InjectivityReport injectivity_check(const ExtensionMap& f, std::size_t pairs, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 7));
  std::vector<std::array<double, 2>> xs;
  xs.reserve(pairs);
  while (xs.size() < pairs) {
    const double x = rng.uniform(f.window.lo, f.window.hi);
    // half the pairs are close pairs to probe local injectivity
    const double y = rng.coin() ? rng.uniform(f.window.lo, f.window.hi)
                                : std::clamp(x + f.window.length() * std::pow(10.0, rng.uniform(-8.0, -2.0)) *
                                                     (rng.coin() ? 1.0 : -1.0),
                                             f.window.lo, f.window.hi);
    if (x != y) xs.push_back({x, y});
  }
  std::vector<double> d(pairs), r(pairs);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(pairs); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    d[i] = distance(f.evaluate(xs[i][0]), f.evaluate(xs[i][1]));
    r[i] = d[i] / std::abs(xs[i][0] - xs[i][1]);
  }
  InjectivityReport rep;
  rep.pairs = pairs;
  for (std::size_t i = 0; i < pairs; ++i) {
    if (d[i] == 0.0) ++rep.collisions;
    rep.min_distance = std::min(rep.min_distance, d[i]);
    rep.min_ratio = std::min(rep.min_ratio, r[i]);
  }
  return rep;
}

}  // namespace qsx
