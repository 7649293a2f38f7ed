#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qsx/io.hpp"

namespace fs = std::filesystem;
using qsx::io::Json;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

struct Scratch {
  fs::path dir = fs::temp_directory_path() / ("qsx_cli_test_" + std::to_string(::getpid()));
  Scratch() {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

const fs::path& scratch() {
  static const Scratch s;
  return s.dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string put(const std::string& name, const std::string& content) {
  const auto p = scratch() / name;
  std::ofstream(p, std::ios::binary) << content;
  return p.string();
}

Run run(const std::string& args, const std::string& env = "") {
  const auto out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  const std::string cmd = env + " \"" QSX_BIN "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

const char* kSix = R"({"points": [0, 0.1, 0.35, 1, 1.2, 3],
  "images": [[0, 0], [0.2, 0.1], [0.5, 0.3], [1, 0], [1.1, 0.4], [2, 1]],
  "modulus": {"C": 3, "alpha": 0.6}})";

}  // namespace

TEST_CASE("analyze: two identity sites") {
  const auto r = run("analyze " + put("two.json", R"({"points": [0, 1], "images": [[0], [1]]})"));
  REQUIRE(r.code == 0);
  const auto j = qsx::io::parse(r.out, "stdout");
  CHECK(j["relative_connectedness"].get<double>() == 1.0);
  CHECK(j["H"] == "n/a, < 3 sites");
}

TEST_CASE("analyze: squares on {0,1,2,4}") {
  const auto r = run("analyze " + put("sq.json", R"({"points": [0, 1, 2, 4], "images": [[0], [1], [4], [16]]})") +
                     " --out " + path("sq.report.json"));
  REQUIRE(r.code == 0);
  const auto j = qsx::io::parse(r.out, "stdout");
  CHECK(j["H"].get<double>() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(slurp(path("sq.report.json")) == r.out);
  // no modulus given: the fitted one is announced on stderr
  CHECK(r.err.find("WARNING") != std::string::npos);
}

TEST_CASE("exit codes") {
  const auto bad = put("bad.json", "{\"points\": [0, 1], \"images\": [[0], [1]");
  auto r = run("extend " + bad + " --out " + path("bad"));
  CHECK(r.code == 2);
  CHECK(r.err.find(":1:") != std::string::npos);
  CHECK_FALSE(fs::exists(path("bad.extension.json")));
  CHECK_FALSE(fs::exists(path("bad.curve.csv")));
  r = run("analyze " + bad + " --out " + path("bad.report.json"));
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK_FALSE(fs::exists(path("bad.report.json")));

  CHECK(run("analyze " + put("mismatch.json", R"({"points": [0, 1], "images": [[0]]})")).code == 2);
  CHECK(run("analyze " + put("one.json", R"({"points": [0], "images": [[0]]})")).code == 3);
  CHECK(run("analyze " + path("missing.json")).code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("verify " + bad).code == 2);
  CHECK(run("analyze " + put("ok.json", kSix), "QSX_THREADS=zero").code == 2);
  CHECK(run("counterexample --n 1 --out " + path("n1")).code == 3);

  r = run("counterexample --m 12 --k 12 --out " + path("huge"));
  CHECK(r.code == 4);
  CHECK(r.err.find("try m_max=") != std::string::npos);
  CHECK_FALSE(fs::exists(path("huge.scene.json")));
}

TEST_CASE("verify rejects truncated extension files") {
  REQUIRE(run("extend " + put("six.json", kSix) + " --seed 1 --samples 101 --out " + path("t")).code == 0);
  const auto text = slurp(path("t.extension.json"));
  const auto cut = put("cut.extension.json", text.substr(0, text.size() * 2 / 3));
  const auto r = run("verify " + cut);
  CHECK(r.code == 2);
  CHECK(r.out.empty());
}

TEST_CASE("extend and verify are byte-identical across runs") {
  const auto in = put("six.json", kSix);
  std::string ext[3], csv[3], ver[3];
  for (int i = 0; i < 3; ++i) {
    const auto prefix = path("det" + std::to_string(i));
    const std::string env = i == 2 ? "QSX_THREADS=1" : "";
    REQUIRE(run("extend " + in + " --seed 5 --samples 2001 --out " + prefix, env).code == 0);
    ext[i] = slurp(prefix + ".extension.json");
    csv[i] = slurp(prefix + ".curve.csv");
    const auto v = run("verify " + prefix + ".extension.json --samples 20000 --seed 7", env);
    REQUIRE(v.code == 0);
    ver[i] = v.out;
  }
  CHECK(!ext[0].empty());
  for (int i = 1; i < 3; ++i) {
    CHECK(ext[i] == ext[0]);
    CHECK(csv[i] == csv[0]);
    CHECK(ver[i] == ver[0]);
  }
  const auto report = qsx::io::parse(ver[0], "verify");
  CHECK(report["seed"].get<std::uint64_t>() == 7);
  CHECK(std::isfinite(report["H"].get<double>()));
}

TEST_CASE("two-site identity curve") {
  REQUIRE(run("extend " + put("id.json", R"({"points": [0, 1], "images": [[0], [1]]})") +
              " --samples 1001 --out " + path("id"))
              .code == 0);
  std::istringstream in(slurp(path("id.curve.csv")));
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("x,F1,F2", 0) == 0);
  bool at0 = false, at1 = false;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    if (row[0] == 0.0) {
      at0 = true;
      for (std::size_t i = 1; i < row.size(); ++i) CHECK(row[i] == 0.0);
    } else if (row[0] == 1.0) {
      at1 = true;
      CHECK(row[1] == 1.0);
      for (std::size_t i = 2; i < row.size(); ++i) CHECK(row[i] == 0.0);
    }
  }
  CHECK(at0);
  CHECK(at1);
}

TEST_CASE("counterexample files") {
  const auto r = run("counterexample --m 2 --k 2 --john-pairs 200 --out " + path("cx"));
  REQUIRE(r.code == 0);
  const auto scene = qsx::io::parse(slurp(path("cx.scene.json")), "scene");
  const auto diag = qsx::io::parse(slurp(path("cx.diagnostics.json")), "diag");
  CHECK(scene["sites"].size() == 235);
  CHECK(diag["density"]["ok"] == true);
  CHECK(diag["isometry_defect"].get<double>() <= 1e-12);
  for (const auto& row : diag["ratio_table"]) {
    const int m = row["m"], k = row["k"];
    CHECK(row["ratio"].get<double>() == std::ldexp(1.0, -(m + k)));
  }
  CHECK(diag["ratio_table"].size() == 9);
  CHECK(diag["certificate"]["depth_m"].get<int>() >= 1);
  CHECK(std::isfinite(diag["john"]["C"].get<double>()));
}
