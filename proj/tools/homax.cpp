#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "homax/atlas.hpp"
#include "homax/config.hpp"
#include "homax/errors.hpp"
#include "homax/fields.hpp"
#include "homax/swirl.hpp"
#include "homax/verify.hpp"

using namespace homax;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::optional<int> n;
  std::optional<double> grading;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<double> beta_guard;

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty())
      cfg = load_config(config_path);
    else if (auto env = config_path_from_env())
      cfg = load_config(*env);
    if (n) cfg.mesh_n = *n;
    if (grading) cfg.mesh_grading = *grading;
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (tol) cfg.solve.tol = *tol;
    if (max_iter) cfg.solve.max_iter = *max_iter;
    if (beta_guard) cfg.solve.beta_guard = *beta_guard;
    validate(cfg);
    return cfg;
  }
};

struct Point {
  double c1 = 0, c2 = 0, c3 = 0, gamma = 0;
  CTriple c() const { return {c1, c2, c3}; }
};

void add_mesh_flags(CLI::App* cmd, Common& o) {
  cmd->add_option("--config", o.config_path, "JSON config file (default: $HOMAX_CONFIG)");
  cmd->add_option("--n", o.n, "Mesh node count (odd, >= 257)");
  cmd->add_option("--grading", o.grading, "Mesh grading exponent");
}

void add_c(CLI::App* cmd, Point& p) {
  cmd->add_option("--c1", p.c1, "Coefficient of (1 - x)")->required();
  cmd->add_option("--c2", p.c2, "Coefficient of (1 + x)")->required();
  cmd->add_option("--c3", p.c3, "Coefficient of (1 - x^2)")->required();
}

void add_gamma(CLI::App* cmd, Point& p) { cmd->add_option("--gamma", p.gamma, "Profile value U(0)")->required(); }

void emit(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing " + path);
}

template <class F>
void write_text(const std::string& path, F&& body) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  body(os);
  if (!os) throw IoError("failed writing " + path);
}

json point_json(const CTriple& c, double gamma) { return {{"c", {c.c1, c.c2, c.c3}}, {"gamma", gamma}}; }

MeshPtr mesh_of(const RunConfig& cfg) { return Mesh::build(cfg.mesh_n, cfg.mesh_grading); }

OperatorContext context_of(const RunConfig& cfg, const Point& p, bool allow_unassigned) {
  const GammaBounds b = gamma_bounds(p.c(), cfg.riccati);
  OperatorOptions oo;
  oo.allow_unassigned = allow_unassigned;
  return make_context(mesh_of(cfg), p.c(), p.gamma, oo, cfg.riccati, &b);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ParameterError("not a number: '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Axisymmetric (-1)-homogeneous Navier-Stokes profiles: no-swirl family, swirl perturbations, fields"};
  app.require_subcommand(1);
  Common o;
  Point p;
  std::string out;
  int exit_status = 0;

  auto* gb = app.add_subcommand("gamma-bounds", "Admissible interval [gamma^-, gamma^+] for c");
  add_mesh_flags(gb, o);
  add_c(gb, p);
  gb->add_option("--out", out, "Output JSON (default stdout)");
  gb->callback([&] {
    const RunConfig cfg = o.resolve();
    const GammaBounds b = gamma_bounds(p.c(), cfg.riccati);
    emit({{"c", {p.c1, p.c2, p.c3}}, {"gamma_minus", b.minus}, {"gamma_plus", b.plus}}, out);
  });

  auto* cl = app.add_subcommand("classify", "Stratum, case and right-inverse variant of (c, gamma)");
  add_mesh_flags(cl, o);
  add_c(cl, p);
  add_gamma(cl, p);
  cl->add_option("--out", out, "Output JSON (default stdout)");
  cl->callback([&] {
    const RunConfig cfg = o.resolve();
    json j = point_json(p.c(), p.gamma);
    j["label"] = to_json(classify(p.c(), p.gamma, cfg.riccati));
    emit(j, out);
  });

  std::string csv, cloud, radii = "1,2";
  auto* ns = app.add_subcommand("noswirl", "No-swirl profile, endpoint data and fields");
  add_mesh_flags(ns, o);
  add_c(ns, p);
  add_gamma(ns, p);
  ns->add_option("--out", out, "Output JSON (default stdout)");
  ns->add_option("--fields", csv, "Write spherical fields as CSV");
  ns->callback([&] {
    const RunConfig cfg = o.resolve();
    const GammaBounds b = gamma_bounds(p.c(), cfg.riccati);
    const NoSwirlProfile prof = solve_profile(mesh_of(cfg), p.c(), p.gamma, cfg.riccati, &b);
    json j = point_json(p.c(), p.gamma);
    j["label"] = to_json(classify(p.c(), p.gamma, cfg.riccati, &b));
    j["endpoints"] = to_json(endpoint_data(prof, cfg.riccati));
    j["x"] = prof.mesh()->x();
    j["u"] = prof.ubar.values();
    emit(j, out);
    if (!csv.empty()) {
      const SphericalField f = reconstruct(total_profile(prof, ProfilePair::zero(prof.mesh())), "noswirl");
      write_text(csv, [&](std::ostream& os) { write_csv(f, os); });
    }
  });

  bool allow_unassigned = false;
  auto* kr = app.add_subcommand("kernel", "Kernel vectors, variant and weights of the linearised operator");
  add_mesh_flags(kr, o);
  add_c(kr, p);
  add_gamma(kr, p);
  kr->add_flag("--allow-unassigned", allow_unassigned, "Build the operator outside every I_{k,l}");
  kr->add_option("--out", out, "Output JSON (default stdout)");
  kr->callback([&] {
    const RunConfig cfg = o.resolve();
    const OperatorContext ctx = context_of(cfg, p, allow_unassigned);
    json j = point_json(p.c(), p.gamma);
    j["case"] = to_string(ctx.case_tag());
    j["variant"] = to_string(ctx.variant());
    j["epsilon"] = ctx.epsilon();
    j["x"] = ctx.mesh()->x();
    json kernels = json::object();
    for (KernelId id : ctx.basis_ids()) {
      const ProfilePair& v = ctx.kernel(id);
      kernels[to_string(id)] = {{"u_theta", v.theta.values()}, {"u_phi", v.phi.values()},
                                {"norm_X", to_json(norm_X(ctx, v))}};
    }
    j["basis"] = kernels;
    emit(j, out);
  });

  Beta beta{};
  bool newton = false, profiles = false;
  auto* sv = app.add_subcommand("solve", "Swirl solution u(c, gamma, beta) by contraction");
  add_mesh_flags(sv, o);
  add_c(sv, p);
  add_gamma(sv, p);
  sv->add_option("--beta1", beta[0], "Coefficient of V1");
  sv->add_option("--beta2", beta[1], "Coefficient of V2 (V2a, V2b on gamma-boundaries)");
  sv->add_option("--beta3", beta[2], "Coefficient of V3 (swirl)");
  sv->add_option("--beta4", beta[3], "Coefficient of V4 (constant swirl)");
  sv->add_option("--tol", o.tol, "Contraction tolerance in the X norm");
  sv->add_option("--max-iter", o.max_iter, "Iteration limit");
  sv->add_option("--beta-guard", o.beta_guard, "Largest accepted |beta|");
  sv->add_flag("--newton", newton, "Refine by Newton steps after the contraction");
  sv->add_flag("--profiles", profiles, "Include the profiles in the JSON");
  sv->add_flag("--allow-unassigned", allow_unassigned, "Solve outside every I_{k,l}");
  sv->add_option("--out", out, "Output JSON (default stdout)");
  sv->add_option("--fields", csv, "Write spherical fields as CSV");
  sv->add_option("--cloud", cloud, "Write a 3-D point cloud as CSV");
  sv->add_option("--radii", radii, "Comma-separated radii for --cloud");
  sv->callback([&] {
    const RunConfig cfg = o.resolve();
    const OperatorContext ctx = context_of(cfg, p, allow_unassigned);
    SwirlSolution s = picard_solve(ctx, beta, cfg.solve);
    if (newton) s = newton_refine(ctx, s, cfg.newton);
    emit(to_json(s, profiles), out);
    if (!csv.empty() || !cloud.empty()) {
      const SphericalField f = reconstruct(total_profile(ctx.profile(), s.pair), "solve");
      if (!csv.empty()) write_text(csv, [&](std::ostream& os) { write_csv(f, os); });
      if (!cloud.empty()) {
        const auto rs = parse_list(radii);
        write_text(cloud, [&](std::ostream& os) { write_point_cloud(f, rs, os); });
      }
    }
  });

  auto* tg = app.add_subcommand("tangency", "Central differences in beta3, beta4 against V3, V4");
  add_mesh_flags(tg, o);
  add_c(tg, p);
  add_gamma(tg, p);
  tg->add_option("--out", out, "Output JSON (default stdout)");
  tg->callback([&] {
    const RunConfig cfg = o.resolve();
    const OperatorContext ctx = context_of(cfg, p, false);
    json j = point_json(p.c(), p.gamma);
    j["checks"] = json::array();
    for (const auto& d : beta_derivative_check(ctx)) j["checks"].push_back(to_json(d));
    emit(j, out);
  });

  auto* pr = app.add_subcommand("probe", "Attempt a swirl solve outside I and report the outcome");
  add_mesh_flags(pr, o);
  add_c(pr, p);
  add_gamma(pr, p);
  pr->add_option("--beta3", beta[2], "Coefficient of V3");
  pr->add_option("--beta4", beta[3], "Coefficient of V4");
  pr->add_option("--out", out, "Output JSON (default stdout)");
  pr->callback([&] {
    const RunConfig cfg = o.resolve();
    const OperatorContext ctx = context_of(cfg, p, true);
    json j = point_json(p.c(), p.gamma);
    j["label"] = to_json(ctx.label());
    j["report"] = to_json(rigidity_probe(ctx, beta, cfg.solve));
    emit(j, out);
  });

  std::string grid_path;
  auto* sw = app.add_subcommand("sweep", "Solve a parameter grid in parallel into an atlas directory");
  add_mesh_flags(sw, o);
  sw->add_option("--grid", grid_path, "Grid spec JSON")->required();
  sw->add_option("--out", out, "Atlas directory (default: out_dir of the config)");
  sw->add_option("--threads", o.threads, "Worker threads (0 = hardware)");
  sw->callback([&] {
    const RunConfig cfg = o.resolve();
    std::ifstream in(grid_path);
    if (!in) throw IoError("cannot read grid spec " + grid_path);
    json g;
    try {
      in >> g;
    } catch (const json::parse_error& e) {
      throw ParameterError("grid spec is not valid JSON: " + std::string(e.what()));
    }
    const std::string dir = out.empty() ? cfg.out_dir : out;
    const auto records = sweep(grid_from_json(g), cfg, dir);
    int converged = 0;
    for (const auto& r : records) converged += r.solution && r.solution->converged;
    std::cout << records.size() << " points written to " << dir << ", " << converged << " converged\n";
  });

  std::string atlas_dir;
  auto* ac = app.add_subcommand("atlas-check", "Load an atlas and re-classify a 1% sample of records");
  add_mesh_flags(ac, o);
  ac->add_option("--dir", atlas_dir, "Atlas directory")->required();
  ac->callback([&] {
    const RunConfig cfg = o.resolve();
    const AtlasLoad l = load_atlas(atlas_dir, cfg.riccati);
    emit({{"records", l.records.size()}, {"checked", l.checked}, {"mismatched", l.mismatched}}, "");
    if (!l.mismatched.empty()) exit_status = static_cast<int>(ExitCode::divergence);
  });

  auto* vf = app.add_subcommand("verify", "Run the acceptance criteria and module invariants");
  add_mesh_flags(vf, o);
  vf->add_option("--seed", o.seed, "Seed for the randomized checks (default 0)");
  vf->add_option("--out", out, "Write the report here as well as to stdout");
  vf->callback([&] {
    const RunConfig cfg = o.resolve();
    const auto results = run_verify(cfg);
    std::ostringstream report;
    write_report(results, cfg, report);
    std::cout << report.str();
    if (!out.empty()) write_text(out, [&](std::ostream& os) { os << report.str(); });
    for (const auto& r : results)
      if (!r.passed) exit_status = static_cast<int>(ExitCode::divergence);
  });

  auto* cf = app.add_subcommand("config", "Print the effective configuration");
  add_mesh_flags(cf, o);
  cf->add_option("--seed", o.seed, "Seed for randomized checks");
  cf->callback([&] { emit(to_json(o.resolve()), ""); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return static_cast<int>(ExitCode::parameter);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::parameter);
  }
  return exit_status;
}
