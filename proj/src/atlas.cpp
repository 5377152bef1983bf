#include "homax/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <tbb/info.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "homax/errors.hpp"

namespace homax {

namespace fs = std::filesystem;

namespace {

std::vector<double> list(const nlohmann::json& j, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  std::vector<double> out = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
  if (out.empty()) throw ParameterError(std::string("grid list '") + key + "' is empty");
  for (double x : out)
    if (!std::isfinite(x)) throw ParameterError(std::string("grid list '") + key + "' has a non-finite entry");
  return out;
}

std::string point_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "point_%05zu.json", i);
  return buf;
}

struct Site {
  CTriple c;
  double gamma_arg = 0.0;
  std::size_t first = 0;
};

void solve_site(const Site& site, const GridSpec& grid, const RunConfig& cfg, const MeshPtr& mesh,
                const std::vector<Beta>& betas, std::vector<AtlasRecord>& out) {
  AtlasRecord proto;
  proto.c = site.c;
  proto.gamma = site.gamma_arg;
  std::optional<OperatorContext> ctx;
  std::string ctx_error;
  try {
    const GammaBounds b = gamma_bounds(site.c, cfg.riccati);
    proto.bounds = b;
    if (grid.gamma_is_fraction) proto.gamma = b.minus + site.gamma_arg * (b.plus - b.minus);
    proto.label = classify(site.c, proto.gamma, cfg.riccati, &b);
    const NoSwirlProfile p = solve_profile(mesh, site.c, proto.gamma, cfg.riccati, &b);
    proto.endpoints = endpoint_data(p, cfg.riccati);
    if (grid.solve && proto.label->variant) {
      try {
        ctx.emplace(make_context(mesh, site.c, proto.gamma, {}, cfg.riccati, &b));
      } catch (const Error& e) {
        ctx_error = e.what();
      }
    }
  } catch (const Error& e) {
    proto.error = e.what();
  }
  for (std::size_t k = 0; k < betas.size(); ++k) {
    AtlasRecord r = proto;
    r.beta = betas[k];
    if (proto.error.empty() && grid.solve && proto.label && proto.label->variant) {
      SolveSummary s;
      if (!ctx) {
        s.error = ctx_error;
      } else {
        try {
          const SwirlSolution sol = picard_solve(*ctx, r.beta, cfg.solve);
          s.converged = sol.converged;
          s.residual_y = sol.residual_y;
          s.iterations = sol.iterations;
        } catch (const Error& e) {
          s.error = e.what();
        }
      }
      r.solution = s;
    }
    out[site.first + k] = std::move(r);
  }
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace

GridSpec grid_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("grid spec must be a JSON object");
  try {
    for (const auto& [k, v] : j.items()) {
      static const char* known[] = {"c1", "c2", "c3", "gamma", "gamma_fraction", "beta1", "beta2", "beta3", "beta4", "solve"};
      if (std::find_if(std::begin(known), std::end(known), [&](const char* s) { return k == s; }) == std::end(known))
        throw ParameterError("unknown grid key '" + k + "'");
    }
    GridSpec g;
    for (const char* key : {"c1", "c2", "c3"})
      if (!j.contains(key)) throw ParameterError(std::string("grid spec needs '") + key + "'");
    g.c1 = list(j, "c1", {});
    g.c2 = list(j, "c2", {});
    g.c3 = list(j, "c3", {});
    if (j.contains("gamma") == j.contains("gamma_fraction"))
      throw ParameterError("grid spec needs exactly one of 'gamma' and 'gamma_fraction'");
    g.gamma_is_fraction = j.contains("gamma_fraction");
    g.gamma = list(j, g.gamma_is_fraction ? "gamma_fraction" : "gamma", {});
    g.beta1 = list(j, "beta1", {0.0});
    g.beta2 = list(j, "beta2", {0.0});
    g.beta3 = list(j, "beta3", {0.0});
    g.beta4 = list(j, "beta4", {0.0});
    if (j.contains("solve")) g.solve = j.at("solve").get<bool>();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed grid spec: ") + e.what());
  }
}

nlohmann::json to_json(const AtlasRecord& r) {
  nlohmann::json j{{"c", {r.c.c1, r.c.c2, r.c.c3}}, {"gamma", r.gamma}, {"beta", r.beta}};
  j["gamma_bounds"] = r.bounds ? nlohmann::json{{"minus", r.bounds->minus}, {"plus", r.bounds->plus}}
                               : nlohmann::json(nullptr);
  j["label"] = r.label ? to_json(*r.label) : nlohmann::json(nullptr);
  j["endpoints"] = r.endpoints ? to_json(*r.endpoints) : nlohmann::json(nullptr);
  j["solution"] = r.solution ? nlohmann::json{{"converged", r.solution->converged},
                                              {"residual_Y", std::isfinite(r.solution->residual_y) ? nlohmann::json(r.solution->residual_y)
                                                                                     : nlohmann::json(nullptr)},
                                              {"iterations", r.solution->iterations},
                                              {"error", r.solution->error}}
                             : nlohmann::json(nullptr);
  j["error"] = r.error;
  return j;
}

AtlasRecord atlas_record_from_json(const nlohmann::json& j) {
  try {
    AtlasRecord r;
    const auto& c = j.at("c");
    r.c = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
    r.gamma = j.at("gamma").get<double>();
    r.beta = j.at("beta").get<Beta>();
    if (!j.at("gamma_bounds").is_null())
      r.bounds = GammaBounds{j.at("gamma_bounds").at("minus").get<double>(), j.at("gamma_bounds").at("plus").get<double>()};
    if (!j.at("label").is_null()) r.label = label_from_json(j.at("label"));
    if (!j.at("endpoints").is_null()) r.endpoints = endpoint_data_from_json(j.at("endpoints"));
    if (!j.at("solution").is_null()) {
      const auto& s = j.at("solution");
      // A non-finite residual is stored as null.
      const double res = s.at("residual_Y").is_null() ? std::numeric_limits<double>::infinity()
                                                       : s.at("residual_Y").get<double>();
      r.solution = SolveSummary{s.at("converged").get<bool>(), res,
                                s.at("iterations").get<int>(), s.at("error").get<std::string>()};
    }
    r.error = j.at("error").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed atlas record: ") + e.what());
  }
}

bool operator==(const AtlasRecord& a, const AtlasRecord& b) { return to_json(a) == to_json(b); }

std::vector<AtlasRecord> sweep(const GridSpec& grid, const RunConfig& cfg, const std::string& out_dir) {
  validate(cfg);
  const MeshPtr mesh = Mesh::build(cfg.mesh_n, cfg.mesh_grading);
  std::vector<Beta> betas;
  for (double b1 : grid.beta1)
    for (double b2 : grid.beta2)
      for (double b3 : grid.beta3)
        for (double b4 : grid.beta4) betas.push_back({b1, b2, b3, b4});
  std::vector<Site> sites;
  for (double c1 : grid.c1)
    for (double c2 : grid.c2)
      for (double c3 : grid.c3)
        for (double g : grid.gamma) sites.push_back({{c1, c2, c3}, g, sites.size() * betas.size()});

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  std::vector<AtlasRecord> records(sites.size() * betas.size());
  const int threads = cfg.threads > 0 ? std::min(cfg.threads, tbb::info::default_concurrency()) : tbb::task_arena::automatic;
  tbb::task_arena arena(threads);
  arena.execute([&] {
    tbb::parallel_for(std::size_t{0}, sites.size(), [&](std::size_t i) {
      solve_site(sites[i], grid, cfg, mesh, betas, records);
      for (std::size_t k = 0; k < betas.size(); ++k) {
        const std::size_t idx = sites[i].first + k;
        write_json_file(fs::path(out_dir) / point_name(idx), to_json(records[idx]));
      }
    });
  });

  std::ofstream index(fs::path(out_dir) / "index.csv");
  if (!index) throw IoError("cannot write index.csv in " + out_dir);
  write_index(records, index);
  return records;
}

void write_index(const std::vector<AtlasRecord>& records, std::ostream& os) {
  os << "c1,c2,c3,gamma,beta1,beta2,beta3,beta4,converged,residual,iterations\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.c.c1, r.c.c2, r.c.c3, r.gamma,
                  r.beta[0], r.beta[1], r.beta[2], r.beta[3]);
    os << buf;
    if (r.solution && r.solution->error.empty()) {
      std::snprintf(buf, sizeof buf, ",%d,%.17g,%d\n", r.solution->converged ? 1 : 0, r.solution->residual_y,
                    r.solution->iterations);
      os << buf;
    } else {
      os << ",0,,\n";
    }
  }
}

AtlasLoad load_atlas(const std::string& dir, const RiccatiOptions& opt, double spot_fraction) {
  if (!(spot_fraction > 0.0 && spot_fraction <= 1.0)) throw ParameterError("spot fraction must lie in (0, 1]");
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("point_", 0) == 0 && e.path().extension() == ".json") files.push_back(e.path());
  }
  if (ec) throw IoError("cannot list " + dir + ": " + ec.message());
  std::sort(files.begin(), files.end());
  AtlasLoad out;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw IoError("cannot read " + f.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw ParameterError(f.string() + " is not valid JSON: " + e.what());
    }
    out.records.push_back(atlas_record_from_json(j));
  }
  const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1.0 / spot_fraction)));
  for (std::size_t i = 0; i < out.records.size(); i += stride) {
    const AtlasRecord& r = out.records[i];
    if (!r.label || !r.bounds) continue;
    out.checked.push_back(i);
    const RegionLabel again = classify(r.c, r.gamma, opt, &*r.bounds);
    if (to_json(again) != to_json(*r.label)) out.mismatched.push_back(i);
  }
  return out;
}

}  // namespace homax
