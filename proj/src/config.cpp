#include "homax/config.hpp"

#include <cstdlib>
#include <fstream>

#include "homax/errors.hpp"

namespace homax {

namespace {

template <class T>
void take(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw ParameterError("unknown config key '" + where + k + "'");
  }
}

void positive(double v, const char* name) {
  if (!(v > 0.0)) throw ParameterError(std::string(name) + " must be positive");
}

}  // namespace

void validate(const RunConfig& cfg) {
  if (cfg.mesh_n < 257) throw ParameterError("mesh_n must be at least 257");
  if (cfg.mesh_n % 2 == 0) throw ParameterError("mesh_n must be odd");
  if (!(cfg.mesh_grading > 0.0 && cfg.mesh_grading <= 10.0))
    throw ParameterError("mesh_grading must lie in (0, 10]");
  const RiccatiOptions& r = cfg.riccati;
  positive(r.rtol, "riccati.rtol");
  positive(r.atol, "riccati.atol");
  positive(r.blowup_guard, "riccati.blowup_guard");
  positive(r.u_stop, "riccati.u_stop");
  positive(r.gamma_snap, "riccati.gamma_snap");
  positive(r.c_snap, "riccati.c_snap");
  positive(r.cbar3_snap, "riccati.cbar3_snap");
  positive(r.bisection_tol, "riccati.bisection_tol");
  if (r.bisection_max_iter < 1) throw ParameterError("riccati.bisection_max_iter must be positive");
  positive(cfg.solve.tol, "solve.tol");
  positive(cfg.solve.beta_guard, "solve.beta_guard");
  if (cfg.solve.max_iter < 1) throw ParameterError("solve.max_iter must be positive");
  if (cfg.solve.stall_limit < 1) throw ParameterError("solve.stall_limit must be positive");
  positive(cfg.newton.inner_tol, "newton.inner_tol");
  positive(cfg.newton.tol, "newton.tol");
  if (cfg.newton.max_steps < 0 || cfg.newton.inner_max < 1)
    throw ParameterError("newton step counts must be nonnegative");
  positive(cfg.solve.y_tol, "solve.y_tol");
  positive(cfg.newton.y_tol, "newton.y_tol");
  if (cfg.threads < 0) throw ParameterError("threads must be nonnegative");
}

nlohmann::json to_json(const RunConfig& cfg) {
  const RiccatiOptions& r = cfg.riccati;
  return {{"mesh_n", cfg.mesh_n},
          {"mesh_grading", cfg.mesh_grading},
          {"riccati",
           {{"rtol", r.rtol},
            {"atol", r.atol},
            {"blowup_guard", r.blowup_guard},
            {"u_stop", r.u_stop},
            {"gamma_snap", r.gamma_snap},
            {"c_snap", r.c_snap},
            {"cbar3_snap", r.cbar3_snap},
            {"bisection_tol", r.bisection_tol},
            {"bisection_max_iter", r.bisection_max_iter}}},
          {"solve",
           {{"tol", cfg.solve.tol},
            {"max_iter", cfg.solve.max_iter},
            {"beta_guard", cfg.solve.beta_guard},
            {"stall_limit", cfg.solve.stall_limit},
            {"y_tol", cfg.solve.y_tol}}},
          {"newton",
           {{"max_steps", cfg.newton.max_steps},
            {"inner_max", cfg.newton.inner_max},
            {"inner_tol", cfg.newton.inner_tol},
            {"tol", cfg.newton.tol},
            {"y_tol", cfg.newton.y_tol}}},
          {"out_dir", cfg.out_dir},
          {"seed", cfg.seed},
          {"threads", cfg.threads}};
}

RunConfig config_from_json(const nlohmann::json& j, RunConfig base) {
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  try {
    check_keys(j, {"mesh_n", "mesh_grading", "riccati", "solve", "newton", "out_dir", "seed", "threads"}, "");
    take(j, "mesh_n", base.mesh_n);
    take(j, "mesh_grading", base.mesh_grading);
    take(j, "out_dir", base.out_dir);
    take(j, "seed", base.seed);
    take(j, "threads", base.threads);
    if (j.contains("riccati")) {
      const auto& r = j.at("riccati");
      check_keys(r, {"rtol", "atol", "blowup_guard", "u_stop", "gamma_snap", "c_snap", "cbar3_snap", "bisection_tol",
                     "bisection_max_iter"},
                 "riccati.");
      RiccatiOptions& o = base.riccati;
      take(r, "rtol", o.rtol);
      take(r, "atol", o.atol);
      take(r, "blowup_guard", o.blowup_guard);
      take(r, "u_stop", o.u_stop);
      take(r, "gamma_snap", o.gamma_snap);
      take(r, "c_snap", o.c_snap);
      take(r, "cbar3_snap", o.cbar3_snap);
      take(r, "bisection_tol", o.bisection_tol);
      take(r, "bisection_max_iter", o.bisection_max_iter);
    }
    if (j.contains("solve")) {
      const auto& s = j.at("solve");
      check_keys(s, {"tol", "max_iter", "beta_guard", "stall_limit", "y_tol"}, "solve.");
      take(s, "tol", base.solve.tol);
      take(s, "max_iter", base.solve.max_iter);
      take(s, "beta_guard", base.solve.beta_guard);
      take(s, "stall_limit", base.solve.stall_limit);
      take(s, "y_tol", base.solve.y_tol);
    }
    if (j.contains("newton")) {
      const auto& n = j.at("newton");
      check_keys(n, {"max_steps", "inner_max", "inner_tol", "tol", "y_tol"}, "newton.");
      take(n, "max_steps", base.newton.max_steps);
      take(n, "inner_max", base.newton.inner_max);
      take(n, "inner_tol", base.newton.inner_tol);
      take(n, "tol", base.newton.tol);
      take(n, "y_tol", base.newton.y_tol);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed config: ") + e.what());
  }
  validate(base);
  return base;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError("config file " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::optional<std::string> config_path_from_env() {
  const char* p = std::getenv("HOMAX_CONFIG");
  if (p == nullptr || *p == '\0') return std::nullopt;
  return std::string(p);
}

}  // namespace homax
