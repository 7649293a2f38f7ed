// qsx: analyze, extend and verify finite samples of maps on the line, and
// build the higher-dimensional counterexample scene.
//
// Exit codes: 0 success, 2 input error, 3 precondition error, 4 resource guard.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qsx/assemble.hpp"
#include "qsx/counterexample.hpp"
#include "qsx/error.hpp"
#include "qsx/io.hpp"
#include "qsx/kernels.hpp"

using namespace qsx;
using io::Json;

namespace {

constexpr int kInputError = 2;
constexpr int kPrecondition = 3;
constexpr int kResource = 4;

struct ModulusChoice {
  PowerModulus modulus;
  std::string source;
};

ModulusChoice choose_modulus(const io::InputDocument& doc) {
  if (doc.modulus) return {*doc.modulus, "input"};
  if (doc.map.size() < 3) {
    std::cerr << "WARNING: no modulus given and fewer than 3 sites to fit one; using the identity modulus\n";
    return {PowerModulus::identity(), "identity"};
  }
  const auto m = fit_power_modulus(ratio_samples(doc.map));
  char buf[160];
  std::snprintf(buf, sizeof buf, "WARNING: no modulus given; using the modulus fitted to the data: C = %.17g, alpha = %.17g\n",
                m.scale, m.exponent);
  std::cerr << buf;
  return {m, "fitted"};
}

io::InputDocument load_input(const std::string& path) { return io::parse_input(io::parse(io::read_file(path), path)); }

void emit(const Json& j, const std::string& out) {
  const std::string text = io::dump(j);
  if (!out.empty()) io::write_atomic(out, text);
  std::cout << text;
}

int cmd_analyze(const std::string& input, const std::string& out) {
  const auto doc = load_input(input);
  const auto& map = doc.map;
  const auto mod = choose_modulus(doc);
  Json r;
  r["sites"] = map.size();
  r["dimension"] = map.ambient_dim();
  r["relative_connectedness"] = relative_connectedness_constant(std::span<const double>(map.sites()));
  // c of the fattened periodized sample, the set the extension is built on
  const auto fat = fatten_isolated(periodize(normalize(map).map, doc.config.periods).materialized, mod.modulus);
  r["gap_constant"] = uniform_perfectness_constant(fat.intervals());
  if (map.size() < 3) {
    r["H"] = "n/a, < 3 sites";
  } else {
    const auto q = weak_qs_constant(map);
    r["H"] = q.weak_constant;
    r["worst_triple"] = q.worst_triple;
  }
  r["modulus"] = io::to_json(mod.modulus);
  r["modulus_source"] = mod.source;
  r["holder_envelope"] = holder_envelope(map, mod.modulus.exponent);
  emit(r, out);
  return 0;
}

int cmd_fit(const std::string& input, const std::string& out) {
  const auto doc = load_input(input);
  if (doc.map.size() < 3) throw DomainError("fitting a modulus needs at least 3 sites");
  const auto samples = ratio_samples(doc.map);
  Json r = io::to_json(fit_power_modulus(samples));
  r["samples"] = samples.size();
  emit(r, out);
  return 0;
}

struct ExtendOptions {
  std::string input, prefix;
  int window = 0;
  double resolution = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int cmd_extend(const ExtendOptions& o) {
  const auto doc = load_input(o.input);
  const auto mod = choose_modulus(doc);
  ExtensionConfig cfg = doc.config;
  if (o.window > 0) cfg.periods = o.window;
  if (o.resolution > 0.0) cfg.resolution = o.resolution;
  if (o.seed_given) cfg.seed = o.seed;
  const std::size_t samples = o.samples > 0 ? o.samples : doc.samples.value_or(1001);
  const auto f = extend(doc.map, mod.modulus, cfg);
  Json file = io::to_json(f);
  file["modulus_source"] = mod.source;
  const std::string ext = o.prefix + ".extension.json", csv = o.prefix + ".curve.csv";
  io::write_atomic(ext, io::dump(file));
  io::write_atomic(csv, io::curve_csv(f, samples));
  for (const auto& w : f.warnings) std::cerr << "warning: " << w << '\n';
  Json r;
  r["N"] = f.N;
  r["gaps"] = f.gaps.size();
  r["window"] = Json::array({f.window.lo, f.window.hi});
  r["modulus"] = io::to_json(f.modulus);
  r["modulus_source"] = mod.source;
  r["seed"] = cfg.seed;
  r["warnings"] = f.warnings;
  r["files"] = Json::array({ext, csv});
  std::cout << io::dump(r);
  return 0;
}

int cmd_verify(const std::string& path, std::size_t samples, std::uint64_t seed, const std::string& out) {
  const auto f = io::extension_from_json(io::parse(io::read_file(path), path));
  emit(io::to_json(verify_extension(f, samples, seed)), out);
  return 0;
}

struct SceneOptions {
  std::size_t n = 2;
  int m = 3, k = 3;
  std::size_t points_per_face = 9;
  std::size_t john_pairs = 1000;
  double modulus_c = 1.0, modulus_alpha = 1.0;
  std::uint64_t seed = 0;
  std::string prefix;
};

int cmd_counterexample(const SceneOptions& o) {
  const PowerModulus eta(o.modulus_c, o.modulus_alpha);
  const auto scene = build_scene(o.n, o.m, o.k, o.points_per_face);
  const auto bl = bilipschitz_constant(scene.sites, o.seed);
  const auto density = density_check(scene);
  const auto john = john_constant(scene.boxes, o.john_pairs, o.seed);
  const auto cert = obstruction_certificate(scene, eta, john.constant, o.seed);

  Json d;
  d["format"] = "qsx-diagnostics";
  d["n"] = o.n;
  d["m_max"] = o.m;
  d["k_max"] = o.k;
  d["sites"] = scene.sites.points.size();
  d["seed"] = o.seed;
  d["bilipschitz"] = {{"L", bl.constant},
                      {"pairs", bl.pairs},
                      {"exhaustive", bl.exhaustive},
                      {"worst", Json::array({bl.worst[0], bl.worst[1]})}};
  d["isometry_defect"] = isometry_defect(scene);
  d["relative_connectedness"] = relative_connectedness_constant(scene.sites.points);
  bool all_ok = true;
  Json rows = Json::array();
  for (const auto& r : density) {
    all_ok = all_ok && r.ok();
    rows.push_back({{"m", r.m},
                    {"k", r.k},
                    {"threshold", r.threshold},
                    {"max_distance", r.max_distance},
                    {"probes", r.probes},
                    {"sites", r.sites},
                    {"ok", r.ok()}});
  }
  d["density"] = {{"ok", all_ok}, {"refinement", 10}, {"rows", std::move(rows)}};
  Json ratios = Json::array();
  for (const auto& r : cert.rows) ratios.push_back({{"m", r.m}, {"k", r.k}, {"ratio", r.ratio}});
  d["ratio_table"] = std::move(ratios);
  d["john"] = {{"C", john.constant},
               {"pairs", john.pairs},
               {"vertices", john.vertices},
               {"seed", o.seed},
               {"worst_x", john.x},
               {"worst_y", john.y},
               {"worst_z", john.z}};
  Json crow = Json::array();
  for (const auto& r : cert.rows)
    crow.push_back({{"m", r.m},
                    {"k", r.k},
                    {"ratio", r.ratio},
                    {"image_scale", r.image_scale},
                    {"step1_margin", r.step1_margin},
                    {"step2_margin", r.step2_margin}});
  d["certificate"] = {{"modulus", io::to_json(eta)},
                      {"john", cert.john},
                      {"image_john", cert.image_john},
                      {"c1", cert.c1},
                      {"c2", cert.c2},
                      {"distortion_samples", cert.distortion_samples},
                      {"depth_m", cert.depth_m},
                      {"depth_k", cert.depth_k},
                      {"reachable", cert.reachable},
                      {"verdict", cert.verdict},
                      {"rows", std::move(crow)}};

  const std::string scene_path = o.prefix + ".scene.json", diag_path = o.prefix + ".diagnostics.json";
  io::write_atomic(scene_path, io::dump(io::scene_json(scene)));
  io::write_atomic(diag_path, io::dump(d));
  Json r;
  r["sites"] = scene.sites.points.size();
  r["L"] = bl.constant;
  r["density_ok"] = all_ok;
  r["john"] = john.constant;
  r["verdict"] = cert.verdict;
  r["files"] = Json::array({scene_path, diag_path});
  std::cout << io::dump(r);
  return 0;
}

void apply_thread_cap() {
  const char* env = std::getenv("QSX_THREADS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) throw io::InputError("QSX_THREADS must be a positive integer");
  kernels::set_thread_cap(static_cast<int>(v));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasisymmetric extension toolkit"};
  app.require_subcommand(1);

  std::string input, out;
  auto* analyze = app.add_subcommand("analyze", "report the constants of a finite sample");
  analyze->add_option("input", input, "input JSON document")->required();
  analyze->add_option("--out", out, "also write the report to this file");

  auto* fit = app.add_subcommand("fit-modulus", "fit a power modulus to the sample");
  fit->add_option("input", input, "input JSON document")->required();
  fit->add_option("--out", out, "also write the result to this file");

  ExtendOptions eo;
  auto* ext = app.add_subcommand("extend", "build the extension and sample its curve");
  ext->add_option("input", eo.input, "input JSON document")->required();
  ext->add_option("--window", eo.window, "number of periods K")->check(CLI::PositiveNumber);
  ext->add_option("--resolution", eo.resolution, "gap resolution epsilon, relative")->check(CLI::PositiveNumber);
  ext->add_option("--samples", eo.samples, "curve rows")->check(CLI::Range(2, 100000000));
  auto* ext_seed = ext->add_option("--seed", eo.seed, "seed");
  ext->add_option("--out", eo.prefix, "output prefix")->required();

  std::string ext_path;
  std::size_t vsamples = 100000;
  std::uint64_t vseed = 0;
  auto* ver = app.add_subcommand("verify", "estimate the constants of an extension file");
  ver->add_option("extension", ext_path, "extension JSON file")->required();
  ver->add_option("--samples", vsamples, "random triples (>= 1000)")->check(CLI::Range(1000, 100000000));
  ver->add_option("--seed", vseed, "seed");
  ver->add_option("--out", out, "also write the report to this file");

  SceneOptions so;
  auto* cx = app.add_subcommand("counterexample", "build the box scene and its diagnostics");
  cx->add_option("--n", so.n, "dimension (>= 2)");
  cx->add_option("--m", so.m, "depth m_max (>= 1)");
  cx->add_option("--k", so.k, "depth k_max (>= 1)");
  cx->add_option("--points-per-face", so.points_per_face, "minimum lattice points per face edge");
  cx->add_option("--john-pairs", so.john_pairs, "sampled pairs for the John constant")->check(CLI::PositiveNumber);
  cx->add_option("--modulus-C", so.modulus_c, "modulus constant C for the certificate");
  cx->add_option("--modulus-alpha", so.modulus_alpha, "modulus exponent alpha for the certificate");
  cx->add_option("--seed", so.seed, "seed");
  cx->add_option("--out", so.prefix, "output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    apply_thread_cap();
    if (*analyze) return cmd_analyze(input, out);
    if (*fit) return cmd_fit(input, out);
    if (*ext) {
      eo.seed_given = ext_seed->count() > 0;
      return cmd_extend(eo);
    }
    if (*ver) return cmd_verify(ext_path, vsamples, vseed, out);
    if (*cx) return cmd_counterexample(so);
  } catch (const io::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const BudgetExceeded& e) {
    std::cerr << "resource guard: " << e.what() << '\n';
    return kResource;
  } catch (const StageError& e) {
    std::cerr << "pipeline failure in stage " << e.what() << '\n';
    return kPrecondition;
  } catch (const InvariantViolation& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "precondition: " << e.what() << '\n';
    return kPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
