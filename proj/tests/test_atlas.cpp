#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "homax/atlas.hpp"
#include "homax/errors.hpp"

using namespace homax;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

GridSpec small_grid() {
  return grid_from_json(json::parse(
      R"({"c1": [0, 0.5], "c2": 0, "c3": [0, -5], "gamma_fraction": 0.5, "beta3": [0, 0.01]})"));
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("grid spec parsing") {
  const GridSpec g = small_grid();
  CHECK(g.c1.size() == 2);
  CHECK(g.c2 == std::vector<double>{0.0});
  CHECK(g.gamma_is_fraction);
  CHECK(g.beta1 == std::vector<double>{0.0});
  CHECK(g.beta3.size() == 2);
  CHECK_THROWS_AS(grid_from_json(json::parse(R"({"c1": 0, "c2": 0, "c3": 0})")), ParameterError);
  CHECK_THROWS_AS(grid_from_json(json::parse(R"({"c1": 0, "c2": 0, "c3": 0, "gamma": 0, "gamma_fraction": 0})")),
                  ParameterError);
  CHECK_THROWS_AS(grid_from_json(json::parse(R"({"c1": 0, "c2": 0, "c3": 0, "gamma": 0, "beta5": 1})")),
                  ParameterError);
  CHECK_THROWS_AS(grid_from_json(json::parse(R"({"c1": [], "c2": 0, "c3": 0, "gamma": 0})")), ParameterError);
  CHECK_THROWS_AS(grid_from_json(json::parse(R"({"c1": "a", "c2": 0, "c3": 0, "gamma": 0})")), ParameterError);
  CHECK_THROWS_AS(grid_from_json(json::parse("[1, 2]")), ParameterError);
}

TEST_CASE("sweep writes one file per point and an index") {
  RunConfig cfg;
  const fs::path dir = fresh_dir("homax_atlas_a");
  const auto recs = sweep(small_grid(), cfg, dir.string());
  REQUIRE(recs.size() == 8);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir)) files += e.path().extension() == ".json";
  CHECK(files == 8);

  const auto idx = lines(dir / "index.csv");
  REQUIRE(idx.size() == 9);
  CHECK(idx[0] == "c1,c2,c3,gamma,beta1,beta2,beta3,beta4,converged,residual,iterations");

  int solved = 0, failed = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const AtlasRecord& r = recs[i];
    if (r.c.c3 == -5) {
      // c3 below the admissible floor.
      CHECK_FALSE(r.error.empty());
      CHECK_FALSE(r.solution.has_value());
      CHECK(idx[i + 1].ends_with(",0,,"));
      ++failed;
      continue;
    }
    REQUIRE(r.bounds);
    REQUIRE(r.label);
    CHECK(r.gamma == doctest::Approx(0.5 * (r.bounds->minus + r.bounds->plus)).epsilon(1e-15));
    REQUIRE(r.solution);
    CHECK(r.solution->converged);
    CHECK(r.solution->residual_y <= cfg.solve.tol * 10);
    ++solved;
  }
  CHECK(solved == 4);
  CHECK(failed == 4);
}

TEST_CASE("thread count does not change the records") {
  RunConfig one, four;
  one.threads = 1;
  four.threads = 4;
  const auto a = sweep(small_grid(), one, fresh_dir("homax_atlas_t1").string());
  const auto b = sweep(small_grid(), four, fresh_dir("homax_atlas_t4").string());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  std::ostringstream ia, ib;
  write_index(a, ia);
  write_index(b, ib);
  CHECK(ia.str() == ib.str());
}

TEST_CASE("load round-trips and re-classifies a sample") {
  RunConfig cfg;
  const fs::path dir = fresh_dir("homax_atlas_load");
  const auto recs = sweep(small_grid(), cfg, dir.string());
  const AtlasLoad all = load_atlas(dir.string(), cfg.riccati, 1.0);
  REQUIRE(all.records.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) CHECK(all.records[i] == recs[i]);
  CHECK(all.checked.size() == 4);
  CHECK(all.mismatched.empty());

  const AtlasLoad sample = load_atlas(dir.string(), cfg.riccati);
  CHECK(sample.checked.size() == 1);

  // A tampered label is caught.
  json j;
  std::ifstream(dir / "point_00000.json") >> j;
  j["label"]["variant"] = "W3";
  std::ofstream(dir / "point_00000.json") << j.dump();
  CHECK(load_atlas(dir.string(), cfg.riccati, 1.0).mismatched == std::vector<std::size_t>{0});

  CHECK_THROWS_AS(load_atlas(dir.string(), cfg.riccati, 0.0), ParameterError);
  CHECK_THROWS_AS(load_atlas("/nonexistent/atlas", cfg.riccati), IoError);
}

TEST_CASE("record JSON round-trip") {
  AtlasRecord r;
  r.c = {0.25, -0.5, 1.0};
  r.gamma = 0.125;
  r.beta = {0, 1e-3, -2e-3, 0.5};
  r.error = "blew up";
  CHECK(atlas_record_from_json(to_json(r)) == r);
  r.solution = SolveSummary{false, std::numeric_limits<double>::infinity(), 3, ""};
  const AtlasRecord back = atlas_record_from_json(json::parse(to_json(r).dump()));
  REQUIRE(back.solution);
  CHECK(std::isinf(back.solution->residual_y));
  CHECK_THROWS_AS(atlas_record_from_json(json::parse(R"({"c": [0, 0]})")), ParameterError);
}
