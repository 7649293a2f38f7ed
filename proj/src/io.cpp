#include "qsx/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace qsx::io {

namespace {

void dump_into(const Json& j, int indent, int depth, std::string& out) {
  const auto pad = [&](int d) {
    if (indent >= 0) {
      out += '\n';
      out.append(static_cast<std::size_t>(indent * d), ' ');
    }
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        pad(depth + 1);
        out += Json(it.key()).dump();
        out += indent >= 0 ? ": " : ":";
        dump_into(it.value(), indent, depth + 1, out);
      }
      pad(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // arrays of scalars stay on one line
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return !e.is_structured(); });
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat && indent >= 0 ? ", " : ",";
        first = false;
        if (!flat) pad(depth + 1);
        dump_into(e, indent, depth + 1, out);
      }
      if (!flat) pad(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.16e", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

std::string where(const std::string& path) { return path.empty() ? "document" : "field '" + path + "'"; }

const Json& field(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw InputError(where(path) + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw InputError(where(path.empty() ? key : path + "." + key) + ": missing");
  return *it;
}

double real(const Json& j, const std::string& path) {
  if (!j.is_number()) throw InputError(where(path) + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InputError(where(path) + ": not finite");
  return v;
}

double real_or_inf(const Json& j, const std::string& path) {
  if (j.is_null()) return kInf;
  return real(j, path);
}

std::uint64_t unsigned_int(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned()) {
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
    throw InputError(where(path) + ": expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

std::vector<double> reals(const Json& j, const std::string& path) {
  if (!j.is_array()) throw InputError(where(path) + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(real(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Interval interval(const Json& j, const std::string& path) {
  const auto v = reals(j, path);
  if (v.size() != 2 || !(v[0] <= v[1])) throw InputError(where(path) + ": expected [lo, hi] with lo <= hi");
  return {v[0], v[1]};
}

std::vector<std::string> strings(const Json& j, const std::string& path) {
  if (!j.is_array()) throw InputError(where(path) + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw InputError(where(path) + ": expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

Json point(ConstPointView p) {
  Json a = Json::array();
  for (double c : p) a.push_back(c);
  return a;
}

Json interval_json(const Interval& i) { return Json::array({i.lo, i.hi}); }

Json sequence_json(const EndpointSequence& s) {
  Json j;
  j["anchor"] = s.anchor;
  j["side"] = s.side == GapSide::left ? "left" : "right";
  j["points"] = s.points;
  j["delta0"] = s.delta0;
  j["c"] = s.c;
  j["resolution"] = s.resolution;
  j["ratio_lo"] = s.ratio_lo;
  j["ratio_hi"] = s.ratio_hi;
  return j;
}

EndpointSequence sequence_from(const Json& j, const std::string& path) {
  EndpointSequence s;
  s.anchor = real(field(j, "anchor", path), path + ".anchor");
  const auto& side = field(j, "side", path);
  if (side != "left" && side != "right") throw InputError(where(path + ".side") + ": expected left or right");
  s.side = side == "left" ? GapSide::left : GapSide::right;
  s.points = reals(field(j, "points", path), path + ".points");
  s.delta0 = real(field(j, "delta0", path), path + ".delta0");
  s.c = real_or_inf(field(j, "c", path), path + ".c");
  s.resolution = real(field(j, "resolution", path), path + ".resolution");
  s.ratio_lo = real(field(j, "ratio_lo", path), path + ".ratio_lo");
  s.ratio_hi = real(field(j, "ratio_hi", path), path + ".ratio_hi");
  return s;
}

std::vector<std::size_t> sizes(const Json& j, const std::string& path) {
  if (!j.is_array()) throw InputError(where(path) + ": expected an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(unsigned_int(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

std::string dump(const Json& j, int indent) {
  std::string out;
  dump_into(j, indent, 0, out);
  out += '\n';
  return out;
}

Json parse(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(path + ": cannot write");
    out << content;
    out.flush();
    if (!out) throw InputError(path + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError(path + ": rename failed");
  }
}

// ---------------------------------------------------------------------------
// Input documents

InputDocument parse_input(const Json& doc) {
  if (!doc.is_object()) throw InputError("document: expected an object");
  auto pts = reals(field(doc, "points", ""), "points");
  const auto& img = field(doc, "images", "");
  if (!img.is_array()) throw InputError("field 'images': expected an array of coordinate lists");
  if (img.size() != pts.size())
    throw InputError("field 'images': " + std::to_string(img.size()) + " entries for " + std::to_string(pts.size()) +
                     " points");
  std::vector<Point> rows;
  for (std::size_t i = 0; i < img.size(); ++i) {
    const std::string path = "images[" + std::to_string(i) + "]";
    rows.push_back(img[i].is_number() ? Point{real(img[i], path)} : reals(img[i], path));
    if (rows.back().empty()) throw InputError(where(path) + ": empty coordinate list");
    if (rows.back().size() != rows.front().size()) throw InputError(where(path) + ": dimension mismatch");
  }
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pts[a] < pts[b]; });
  std::vector<double> sorted;
  PointSet images(rows.empty() ? 1 : rows.front().size());
  for (std::size_t i : order) {
    if (!sorted.empty() && sorted.back() == pts[i])
      throw InputError("field 'points[" + std::to_string(i) + "]': duplicate site");
    sorted.push_back(pts[i]);
    images.push_back(rows[i]);
  }

  std::optional<PowerModulus> modulus;
  if (const auto it = doc.find("modulus"); it != doc.end() && !it->is_null()) {
    const double c = real(field(*it, "C", "modulus"), "modulus.C");
    const double a = real(field(*it, "alpha", "modulus"), "modulus.alpha");
    if (!(c >= 1.0) || !(a > 0.0 && a <= 1.0))
      throw InputError("field 'modulus': need C >= 1 and alpha in (0, 1]");
    modulus = PowerModulus{c, a};
  }
  ExtensionConfig config;
  std::optional<std::size_t> samples;
  if (const auto it = doc.find("config"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw InputError("field 'config': expected an object");
    if (it->contains("periods")) config.periods = static_cast<int>(unsigned_int((*it)["periods"], "config.periods"));
    if (it->contains("resolution")) config.resolution = real((*it)["resolution"], "config.resolution");
    if (it->contains("seed")) config.seed = unsigned_int((*it)["seed"], "config.seed");
    if (it->contains("samples")) samples = unsigned_int((*it)["samples"], "config.samples");
  }
  return {SiteMap(std::move(sorted), std::move(images)), modulus, config, samples};
}

// ---------------------------------------------------------------------------
// Extension files

Json to_json(const PowerModulus& m) {
  Json j;
  j["C"] = m.scale;
  j["alpha"] = m.exponent;
  return j;
}

Json to_json(const ExtensionMap& f) {
  Json j;
  j["format"] = "qsx-extension";
  j["version"] = 1;
  j["window"] = interval_json(f.window);
  j["n"] = f.n;
  j["N"] = f.N;
  j["modulus"] = to_json(f.modulus);
  j["config"] = {{"periods", f.config.periods}, {"resolution", f.config.resolution}, {"seed", f.config.seed}};
  j["similarity"] = {{"domain_offset", f.similarity.domain_offset},
                     {"domain_scale", f.similarity.domain_scale},
                     {"image_offset", point(f.similarity.image_offset)},
                     {"image_scale", f.similarity.image_scale}};
  j["uniform_perfectness"] = f.uniform_perfectness;
  j["delta0"] = f.delta0;
  Json pieces = Json::array();
  for (const auto& p : f.pieces) {
    pieces.push_back({{"centre", p.centre},
                      {"span", interval_json(p.span)},
                      {"neighbour", p.neighbour},
                      {"value", point(p.value)},
                      {"slope", p.slope}});
  }
  j["pieces"] = std::move(pieces);
  Json gaps = Json::array();
  for (const auto& g : f.gaps) {
    Json b = {{"p", point(g.bridge.p)}, {"q", point(g.bridge.q)}, {"apex", point(g.bridge.apex)},
              {"dim", g.bridge.dim_index}};
    gaps.push_back({{"gap", interval_json(g.gap)},
                    {"bridge", std::move(b)},
                    {"breakpoints", g.xs},
                    {"arclength", g.ss},
                    {"left", sequence_json(g.left)},
                    {"right", sequence_json(g.right)},
                    {"warnings", g.warnings}});
  }
  j["gaps"] = std::move(gaps);
  const auto& a = f.assignment;
  j["assignment"] = {{"gap_dims", a.gap_dims},
                     {"order", a.order},
                     {"c0", a.c0},
                     {"pair_threshold", a.pair_threshold},
                     {"n", a.n},
                     {"palette_bound", a.palette_bound},
                     {"palette_capped", a.palette_capped},
                     {"n0", a.n0},
                     {"total_dim", a.total_dim},
                     {"dims_used", a.dims_used},
                     {"conflict_edges", a.conflict_edges},
                     {"max_conflicts", a.max_conflicts}};
  j["warnings"] = f.warnings;
  return j;
}

ExtensionMap extension_from_json(const Json& doc) {
  if (!doc.is_object()) throw InputError("document: expected an object");
  if (field(doc, "format", "") != "qsx-extension") throw InputError("field 'format': not an extension file");
  ExtensionMap f;
  f.window = interval(field(doc, "window", ""), "window");
  f.n = unsigned_int(field(doc, "n", ""), "n");
  f.N = unsigned_int(field(doc, "N", ""), "N");
  if (f.n == 0 || f.N <= f.n) throw InputError("field 'N': must exceed n >= 1");
  const auto& mod = field(doc, "modulus", "");
  try {
    f.modulus = PowerModulus(real(field(mod, "C", "modulus"), "modulus.C"),
                             real(field(mod, "alpha", "modulus"), "modulus.alpha"));
  } catch (const InvalidArgument& e) {
    throw InputError(std::string("field 'modulus': ") + e.what());
  }
  const auto& cfg = field(doc, "config", "");
  f.config.periods = static_cast<int>(unsigned_int(field(cfg, "periods", "config"), "config.periods"));
  f.config.resolution = real(field(cfg, "resolution", "config"), "config.resolution");
  f.config.seed = unsigned_int(field(cfg, "seed", "config"), "config.seed");
  const auto& sim = field(doc, "similarity", "");
  f.similarity.domain_offset = real(field(sim, "domain_offset", "similarity"), "similarity.domain_offset");
  f.similarity.domain_scale = real(field(sim, "domain_scale", "similarity"), "similarity.domain_scale");
  f.similarity.image_offset = reals(field(sim, "image_offset", "similarity"), "similarity.image_offset");
  f.similarity.image_scale = real(field(sim, "image_scale", "similarity"), "similarity.image_scale");
  if (!(f.similarity.domain_scale > 0.0) || !(f.similarity.image_scale > 0.0))
    throw InputError("field 'similarity': scales must be positive");
  f.uniform_perfectness = real_or_inf(field(doc, "uniform_perfectness", ""), "uniform_perfectness");
  f.delta0 = real(field(doc, "delta0", ""), "delta0");

  const auto& pieces = field(doc, "pieces", "");
  if (!pieces.is_array() || pieces.empty()) throw InputError("field 'pieces': expected a non-empty array");
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const std::string path = "pieces[" + std::to_string(i) + "]";
    FatPiece p;
    p.centre = real(field(pieces[i], "centre", path), path + ".centre");
    p.span = interval(field(pieces[i], "span", path), path + ".span");
    p.neighbour = unsigned_int(field(pieces[i], "neighbour", path), path + ".neighbour");
    p.value = reals(field(pieces[i], "value", path), path + ".value");
    p.slope = real(field(pieces[i], "slope", path), path + ".slope");
    if (p.value.empty() || p.value.size() > f.N) throw InputError(where(path + ".value") + ": bad dimension");
    if (!f.pieces.empty() && !(f.pieces.back().span.hi < p.span.lo))
      throw InputError(where(path + ".span") + ": pieces must be disjoint and increasing");
    f.pieces.push_back(std::move(p));
  }
  const auto& gaps = field(doc, "gaps", "");
  if (!gaps.is_array() || gaps.size() + 1 != f.pieces.size())
    throw InputError("field 'gaps': expected one gap between consecutive pieces");
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const std::string path = "gaps[" + std::to_string(i) + "]";
    const auto& g = gaps[i];
    GapMap m;
    m.gap = interval(field(g, "gap", path), path + ".gap");
    if (m.gap.lo != f.pieces[i].span.hi || m.gap.hi != f.pieces[i + 1].span.lo)
      throw InputError(where(path + ".gap") + ": does not match the neighbouring pieces");
    const auto& b = field(g, "bridge", path);
    m.bridge.p = reals(field(b, "p", path + ".bridge"), path + ".bridge.p");
    m.bridge.q = reals(field(b, "q", path + ".bridge"), path + ".bridge.q");
    m.bridge.apex = reals(field(b, "apex", path + ".bridge"), path + ".bridge.apex");
    m.bridge.dim_index = unsigned_int(field(b, "dim", path + ".bridge"), path + ".bridge.dim");
    if (m.bridge.p.size() != f.N || m.bridge.q.size() != f.N || m.bridge.apex.size() != f.N)
      throw InputError(where(path + ".bridge") + ": points must have N coordinates");
    m.xs = reals(field(g, "breakpoints", path), path + ".breakpoints");
    m.ss = reals(field(g, "arclength", path), path + ".arclength");
    if (m.xs.size() < 2 || m.xs.size() != m.ss.size())
      throw InputError(where(path + ".breakpoints") + ": needs at least two entries matching 'arclength'");
    for (std::size_t k = 1; k < m.xs.size(); ++k)
      if (!(m.xs[k - 1] < m.xs[k]) || !(m.ss[k - 1] < m.ss[k]))
        throw InputError(where(path + ".breakpoints") + ": must be strictly increasing");
    if (m.xs.front() != m.gap.lo || m.xs.back() != m.gap.hi || m.ss.front() != 0.0 || m.ss.back() != 1.0)
      throw InputError(where(path + ".breakpoints") + ": must span the gap and [0, 1]");
    m.left = sequence_from(field(g, "left", path), path + ".left");
    m.right = sequence_from(field(g, "right", path), path + ".right");
    m.warnings = strings(field(g, "warnings", path), path + ".warnings");
    f.gaps.push_back(std::move(m));
  }
  if (f.window.lo < f.pieces.front().span.lo || f.window.hi > f.pieces.back().span.hi)
    throw InputError("field 'window': not covered by the pieces");

  const auto& a = field(doc, "assignment", "");
  auto& as = f.assignment;
  as.gap_dims = sizes(field(a, "gap_dims", "assignment"), "assignment.gap_dims");
  as.order = sizes(field(a, "order", "assignment"), "assignment.order");
  as.c0 = real(field(a, "c0", "assignment"), "assignment.c0");
  as.pair_threshold = real(field(a, "pair_threshold", "assignment"), "assignment.pair_threshold");
  as.n = unsigned_int(field(a, "n", "assignment"), "assignment.n");
  as.palette_bound = real(field(a, "palette_bound", "assignment"), "assignment.palette_bound");
  const auto& capped = field(a, "palette_capped", "assignment");
  if (!capped.is_boolean()) throw InputError("field 'assignment.palette_capped': expected a boolean");
  as.palette_capped = capped.get<bool>();
  as.n0 = unsigned_int(field(a, "n0", "assignment"), "assignment.n0");
  as.total_dim = unsigned_int(field(a, "total_dim", "assignment"), "assignment.total_dim");
  as.dims_used = unsigned_int(field(a, "dims_used", "assignment"), "assignment.dims_used");
  as.conflict_edges = unsigned_int(field(a, "conflict_edges", "assignment"), "assignment.conflict_edges");
  as.max_conflicts = unsigned_int(field(a, "max_conflicts", "assignment"), "assignment.max_conflicts");
  f.warnings = strings(field(doc, "warnings", ""), "warnings");
  return f;
}

Json to_json(const VerificationReport& r) {
  Json j;
  j["H"] = r.weak_constant;
  j["H_sampled"] = r.sampled_weak_constant;
  j["worst_triple"] = r.worst_triple;
  j["monotonicity_constant"] = r.monotonicity_constant;
  j["worst_monotone"] = r.worst_monotone;
  j["dist4_lower"] = r.dist4_lower;
  j["dist4_upper"] = r.dist4_upper;
  j["worst_dist4"] = r.worst_dist4;
  j["dist4_pairs"] = r.dist4_pairs;
  const auto& s = r.sample_spec;
  j["strata"] = {{"uniform", s.uniform},
                 {"gap_adversarial", s.gap_adversarial},
                 {"cross_scale", s.cross_scale},
                 {"structural", s.structural},
                 {"refined", s.refined}};
  j["samples"] = s.samples;
  j["seed"] = s.seed;
  j["warnings"] = r.warnings;
  return j;
}

std::string curve_csv(const ExtensionMap& f, std::size_t samples) {
  if (samples < 2) throw InvalidArgument("curve needs at least two samples");
  const double lo = f.similarity.site_from_normalized(f.window.lo);
  const double hi = f.similarity.site_from_normalized(f.window.hi);
  std::string out = "x";
  for (std::size_t i = 1; i <= f.N; ++i) out += ",F" + std::to_string(i);
  out += '\n';
  char buf[40];
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = i + 1 == samples ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
    std::snprintf(buf, sizeof buf, "%.16e", x);
    out += buf;
    for (double c : f.evaluate_original(x)) {
      std::snprintf(buf, sizeof buf, ",%.16e", c);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Counterexample scenes

Json scene_json(const Scene& scene) {
  const auto& bs = scene.boxes;
  Json j;
  j["format"] = "qsx-scene";
  j["n"] = bs.n;
  j["m_max"] = bs.m_max;
  j["k_max"] = bs.k_max;
  j["points_per_face"] = bs.points_per_face;
  Json sims = Json::array();
  for (int m = 0; m <= bs.m_max; ++m)
    sims.push_back({{"m", m}, {"scale", bs.zetas[m].scale}, {"shift", point(bs.zetas[m].shift)}});
  j["similarities"] = std::move(sims);
  Json boxes = Json::array();
  for (int m = 0; m <= bs.m_max; ++m) {
    for (int k = 0; k <= bs.k_max; ++k) {
      const auto b = bs.box(m, k), f = bs.flipped(m, k);
      boxes.push_back({{"m", m},
                       {"k", k},
                       {"lo", point(b.lo)},
                       {"hi", point(b.hi)},
                       {"flipped_lo", point(f.lo)},
                       {"flipped_hi", point(f.hi)},
                       {"sites", scene.face_set(m, k).size()},
                       {"pitch", scene.sites.face_pitch[static_cast<std::size_t>(m) * (bs.k_max + 1) + k]}});
    }
  }
  j["boxes"] = std::move(boxes);
  static const char* kinds[] = {"origin", "tip", "anchor", "face"};
  Json sites = Json::array();
  const auto& s = scene.sites;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const auto& l = s.labels[i];
    sites.push_back({{"x", point(s.points[i])},
                     {"image", point(s.images[i])},
                     {"kind", kinds[static_cast<int>(l.kind)]},
                     {"m", l.m},
                     {"k", l.k}});
  }
  j["sites"] = std::move(sites);
  return j;
}

}  // namespace qsx::io
