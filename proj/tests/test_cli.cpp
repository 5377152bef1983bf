// Runs the homax binary: exit codes, config precedence, and every output
// against its golden file in docs/schemas.
#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string g_exe;
fs::path g_schemas;

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  Run r;
  const std::string cmd = "'" + g_exe + "' " + args + " 2>/dev/null";
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  REQUIRE(pipe);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) r.out.append(buf.data(), n);
  const int raw = pclose(pipe.release());
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE_MESSAGE(in, "missing " << p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path tmp(const std::string& name) { return fs::temp_directory_path() / ("homax_cli_" + name); }

bool close(double a, double b) { return std::fabs(a - b) <= 1e-6 * (1.0 + std::fabs(b)); }

// Same keys, same types, same array lengths, numbers within 1e-6.
void same_shape(const json& got, const json& want, const std::string& path, int& bad) {
  if (bad > 5) return;
  const bool num_g = got.is_number(), num_w = want.is_number();
  if (num_g && num_w) {
    if (!close(got.get<double>(), want.get<double>())) {
      ++bad;
      MESSAGE(path << ": " << got.get<double>() << " vs golden " << want.get<double>());
    }
    return;
  }
  if (got.type() != want.type()) {
    ++bad;
    MESSAGE(path << ": type " << got.type_name() << " vs golden " << want.type_name());
    return;
  }
  if (want.is_object()) {
    for (const auto& [k, v] : want.items()) {
      if (!got.contains(k)) {
        ++bad;
        MESSAGE(path << ": missing key " << k);
      } else {
        same_shape(got.at(k), v, path + "." + k, bad);
      }
    }
    for (const auto& [k, v] : got.items())
      if (!want.contains(k)) {
        ++bad;
        MESSAGE(path << ": extra key " << k);
      }
  } else if (want.is_array()) {
    if (got.size() != want.size()) {
      ++bad;
      MESSAGE(path << ": length " << got.size() << " vs golden " << want.size());
      return;
    }
    for (std::size_t i = 0; i < want.size(); ++i) same_shape(got[i], want[i], path + "[" + std::to_string(i) + "]", bad);
  } else if (got != want) {
    ++bad;
    MESSAGE(path << ": " << got.dump() << " vs golden " << want.dump());
  }
}

void check_json(const std::string& text, const std::string& golden) {
  json got;
  REQUIRE_NOTHROW(got = json::parse(text));
  int bad = 0;
  same_shape(got, json::parse(slurp(g_schemas / golden)), golden, bad);
  CHECK_MESSAGE(bad == 0, golden);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

void check_csv(const std::string& text, const std::string& golden) {
  const auto got = split(text, '\n'), want = split(slurp(g_schemas / golden), '\n');
  REQUIRE(got.size() == want.size());
  CHECK(got[0] == want[0]);
  int bad = 0;
  for (std::size_t i = 1; i < want.size(); ++i) {
    const auto a = split(got[i], ','), b = split(want[i], ',');
    if (a.size() != b.size()) {
      ++bad;
      continue;
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      char* ea = nullptr;
      char* eb = nullptr;
      const double x = std::strtod(a[k].c_str(), &ea), y = std::strtod(b[k].c_str(), &eb);
      const bool numeric = !b[k].empty() && *eb == '\0';
      if (numeric ? !(*ea == '\0' && close(x, y)) : a[k] != b[k]) ++bad;
    }
  }
  CHECK_MESSAGE(bad == 0, golden << ": " << bad << " cells differ");
}

const std::string kLandau = "--n 257 --c1 0 --c2 0 --c3 0";

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run("classify --c1 0 --c2 0 --c3 0 --gamma -1").status == 0);
  CHECK(run("classify --c1 0 --c2 0 --c3 0").status == 1);
  CHECK(run("").status == 1);
  CHECK(run("frobnicate").status == 1);
  CHECK(run("--help").status == 0);
  CHECK(run("noswirl " + kLandau + " --gamma 5").status == 1);
  CHECK(run("classify " + kLandau + " --gamma -1 --n 100").status == 1);
  CHECK(run("solve " + kLandau + " --gamma -1 --beta3 1 --beta-guard 0.1").status == 1);
  CHECK(run("solve --c1 0 --c2 0 --c3 0 --gamma -1 --beta3 20 --beta-guard 100").status == 2);
  CHECK(run("classify " + kLandau + " --gamma -1 --out /nonexistent/dir/x.json").status == 3);
  CHECK(run("classify " + kLandau + " --gamma -1 --config /nonexistent/cfg.json").status == 3);
  const fs::path bad = tmp("bad.json");
  std::ofstream(bad) << R"({"mesh": 3})";
  CHECK(run("classify " + kLandau + " --gamma -1 --config " + bad.string()).status == 1);
}

TEST_CASE("classification of a Landau point") {
  const Run r = run("classify --c1 0 --c2 0 --c3 0 --gamma -1");
  REQUIRE(r.status == 0);
  const json j = json::parse(r.out);
  CHECK(j["label"]["i_stratum"] == json::array({1, 1}));
  CHECK(j["label"]["case"] == "case1");
}

TEST_CASE("config file, environment and flags layer in that order") {
  const fs::path a = tmp("a.json"), b = tmp("b.json");
  std::ofstream(a) << R"({"mesh_n": 513, "seed": 5})";
  std::ofstream(b) << R"({"mesh_n": 769})";
  const std::string env = "HOMAX_CONFIG='" + a.string() + "' ";
  auto with_env = [&](const std::string& args) {
    const std::string saved = g_exe;
    g_exe = saved;
    Run r;
    const std::string cmd = env + "'" + g_exe + "' " + args + " 2>/dev/null";
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe.get())) > 0) r.out.append(buf.data(), n);
    r.status = WEXITSTATUS(pclose(pipe.release()));
    return r;
  };
  CHECK(json::parse(with_env("config").out)["mesh_n"] == 513);
  CHECK(json::parse(with_env("config --config " + b.string()).out)["mesh_n"] == 769);
  const json j = json::parse(with_env("config --config " + b.string() + " --n 257 --seed 9").out);
  CHECK(j["mesh_n"] == 257);
  CHECK(j["seed"] == 9);
  CHECK(json::parse(run("config").out)["mesh_n"] == 1025);
}

TEST_CASE("outputs match their golden files") {
  SUBCASE("gamma-bounds") { check_json(run("gamma-bounds " + kLandau).out, "gamma-bounds.json"); }
  SUBCASE("classify") { check_json(run("classify " + kLandau + " --gamma -1").out, "classify.json"); }
  SUBCASE("noswirl and fields") {
    const fs::path f = tmp("fields.csv");
    const Run r = run("noswirl " + kLandau + " --gamma -1 --fields " + f.string());
    check_json(r.out, "noswirl.json");
    check_csv(slurp(f), "fields.csv");
  }
  SUBCASE("kernel") { check_json(run("kernel " + kLandau + " --gamma -1").out, "kernel.json"); }
  SUBCASE("solve and point cloud") {
    const fs::path c = tmp("cloud.csv");
    const Run r = run("solve " + kLandau + " --gamma -1 --beta3 0.01 --beta4 0.01 --profiles --cloud " + c.string() +
                      " --radii 1,2");
    check_json(r.out, "solve.json");
    check_csv(slurp(c), "cloud.csv");
  }
  SUBCASE("tangency") { check_json(run("tangency " + kLandau + " --gamma -1").out, "tangency.json"); }
  SUBCASE("probe") { check_json(run("probe --c1 0 --c2 0 --c3 0 --gamma 2 --beta4 0.01").out, "probe.json"); }
  SUBCASE("config") { check_json(run("config --n 257").out, "config.json"); }
  SUBCASE("sweep, atlas point, index and atlas-check") {
    const fs::path dir = tmp("atlas");
    fs::remove_all(dir);
    REQUIRE(run("sweep --n 257 --grid " + (g_schemas / "grid.json").string() + " --out " + dir.string()).status == 0);
    check_json(slurp(dir / "point_00001.json"), "atlas-point.json");
    check_csv(slurp(dir / "index.csv"), "index.csv");
    check_json(run("atlas-check --n 257 --dir " + dir.string()).out, "atlas-check.json");
  }
  SUBCASE("verify report") {
    const Run r = run("verify --seed 0");
    CHECK(r.status == 0);
    const auto got = split(r.out, '\n'), want = split(slurp(g_schemas / "verify.txt"), '\n');
    REQUIRE(got.size() == want.size());
    // Check keys and verdicts; the measured values may drift across platforms.
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i].substr(0, 20) == want[i].substr(0, 20));
  }
}

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: test_cli <homax> <schema dir> [doctest options]\n");
    return 2;
  }
  g_exe = argv[1];
  g_schemas = argv[2];
  doctest::Context ctx;
  ctx.applyCommandLine(argc - 2, argv + 2);
  return ctx.run();
}
