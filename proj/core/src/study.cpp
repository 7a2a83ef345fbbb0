// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include "tracefem/study.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "tracefem/solver.hpp"
#include "tracefem/vtk_io.hpp"

namespace tracefem {

namespace {

using clock_t_ = std::chrono::steady_clock;

double ms_since(clock_t_::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_t_::now() - t0)
      .count();
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> config_keys() {
  return {"study",  "surface", "surface_params", "m",        "k",
          "stab",   "rho_s",   "levels",         "n0",       "box_lo",
          "box_hi", "eps",     "sigma",          "theta",    "max_steps",
          "dof_budget", "offsets", "tol",        "seed",     "delta0",
          "delta1", "out_dir", "with_cond",      "write_vtk"};
}

void apply_override(StudyConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (key == "study") cfg.study = value;
  else if (key == "surface") cfg.surface = value;
  else if (key == "surface_params") cfg.surface_params = parse_double_list(value);
  else if (key == "m") cfg.m = std::stoi(value);
  else if (key == "k") cfg.k = std::stoi(value);
  else if (key == "stab") cfg.stab = value;
  else if (key == "rho_s") cfg.rho_s = std::stod(value);
  else if (key == "levels") cfg.levels = std::stoi(value);
  else if (key == "n0") cfg.n0 = std::stoi(value);
  else if (key == "box_lo") cfg.box_lo = std::stod(value);
  else if (key == "box_hi") cfg.box_hi = std::stod(value);
  else if (key == "eps") cfg.eps = std::stod(value);
  else if (key == "sigma") cfg.sigma = std::stod(value);
  else if (key == "theta") cfg.theta = std::stod(value);
  else if (key == "max_steps") cfg.max_steps = std::stoi(value);
  else if (key == "dof_budget") cfg.dof_budget = std::stol(value);
  else if (key == "offsets") cfg.offsets = std::stoi(value);
  else if (key == "tol") cfg.tol = std::stod(value);
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "delta0") cfg.delta0 = std::stod(value);
  else if (key == "delta1") cfg.delta1 = std::stod(value);
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "with_cond") cfg.with_cond = std::stoi(value) != 0;
  else if (key == "write_vtk") cfg.write_vtk = std::stoi(value) != 0;
  else {
    std::string keys;
    for (auto& k : config_keys()) keys += (keys.empty() ? "" : ", ") + k;
    throw std::invalid_argument("unknown config key '" + key +
                                "' (valid: " + keys + ")");
  }
}

StudyConfig parse_config(std::istream& in) {
  StudyConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (cfg.k > cfg.m)
    throw std::invalid_argument(
        "config: geometry degree k = " + std::to_string(cfg.k) +
        " exceeds FE degree m = " + std::to_string(cfg.m));
  return cfg;
}

namespace {

std::string config_echo(const StudyConfig& c) {
  std::ostringstream os;
  os << "study=" << c.study << " surface=" << c.surface << " params=";
  if (c.surface_params.empty()) os << "(default)";
  for (std::size_t i = 0; i < c.surface_params.size(); ++i)
    os << (i ? "," : "") << c.surface_params[i];
  os << " m=" << c.m << " k=" << c.k << " stab=" << c.stab
     << " rho_s=" << c.rho_s << " levels=" << c.levels << " n0=" << c.n0
     << " box=[" << c.box_lo << "," << c.box_hi << "]"
     << " eps=" << c.eps << " theta=" << c.theta << " tol=" << c.tol
     << " seed=" << c.seed << "\n";
  return os.str();
}

struct LevelPipeline {
  TetMesh mesh;
  std::shared_ptr<FeSpace> space_m, space_k;
  DiscreteLevelSet phi;
  CutTopology cut;
  IsoMap map;
  AssemblyContext ctx;
};

// mesh + spaces + level set + cut + map for one resolution
LevelPipeline make_pipeline(const StudyConfig& cfg, int n,
                            const AnalyticSurface& surface) {
  LevelPipeline p;
  Vec3 lo = Vec3::Constant(cfg.box_lo);
  Vec3 hi = Vec3::Constant(cfg.box_hi);
  p.mesh = build_box_mesh(lo, hi, n);
  p.space_m = std::make_shared<FeSpace>(p.mesh, cfg.m);
  p.space_k = (cfg.k == cfg.m) ? p.space_m
                               : std::make_shared<FeSpace>(p.mesh, cfg.k);
  p.phi = interpolate_levelset(surface, p.space_k);
  p.cut = extract_cut_topology(p.phi, p.mesh);
  p.map = build_isomap(p.phi, p.cut);
  p.ctx.mesh = &p.mesh;
  p.ctx.space = p.space_m.get();
  p.ctx.cut = &p.cut;
  p.ctx.map = p.map.identity ? nullptr : &p.map;
  p.ctx.phi = &p.phi;
  return p;
}

void write_solution_vtk(const std::string& path, const LevelPipeline& p,
                        const Eigen::VectorXd& u, const ActiveDofMap& dofs,
                        const ProblemSpec& prob) {
  std::vector<double> uh_tri, err_tri;
  const FeSpace& space = *p.ctx.space;
  int nd = space.dofs_per_tet();
  for (auto& tri : p.cut.tris) {
    Vec3 ref = (tri.ref[0] + tri.ref[1] + tri.ref[2]) / 3.0;
    Vec3 x = (tri.x[0] + tri.x[1] + tri.x[2]) / 3.0;
    BasisEval b = eval_basis(space, tri.tet, ref);
    auto& gd = space.tet_dofs(tri.tet);
    double uh = 0.0;
    for (int i = 0; i < nd; ++i)
      uh += u[dofs.global_to_active[gd[i]]] * b.value[i];
    uh_tri.push_back(uh);
    err_tri.push_back(std::abs(uh - prob.exact_u(x)));
  }
  write_vtk_surface(path, p.cut, {{"uh", uh_tri}, {"err", err_tri}});
}

ProblemSpec study_problem(const StudyConfig& cfg,
                          std::shared_ptr<const AnalyticSurface> surface) {
  if (cfg.surface == "sphere") {
    double r = cfg.surface_params.empty() ? 1.0 : cfg.surface_params[0];
    return sphere_harmonic_problem(r);
  }
  return manufactured_problem(
      surface, [](const Vec3& x) { return x[0] * x[1]; });
}

StudyReport study_convergence(const StudyConfig& cfg) {
  StudyReport rep;
  auto surface = std::shared_ptr<const AnalyticSurface>(
      make_surface(cfg.surface, cfg.surface_params));
  ProblemSpec prob = study_problem(cfg, surface);

  std::vector<std::string> failures;
  for (int level = 0; level < cfg.levels; ++level) {
    int n = cfg.n0 << level;
    try {
      LevelPipeline p = make_pipeline(cfg, n, *prob.surface);

      auto t0 = clock_t_::now();
      TraceSystem sys = assemble_lb(p.ctx, prob);
      StabKind kind = stab_from_string(cfg.stab);
      SpMat A = sys.A;
      if (kind != StabKind::none)
        A = A + assemble_stabilization(p.ctx, kind, cfg.rho_s);
      double asm_ms = ms_since(t0);

      t0 = clock_t_::now();
      SolveReport sol = solve_cg(A, sys.rhs, cfg.tol);
      double solve_ms = ms_since(t0);
      if (!sol.converged)
        throw std::runtime_error("CG stalled");

      ErrorRecord r;
      r.level = level;
      r.h = p.cut.max_active_diameter(p.mesh);
      r.n_active = sys.dofs.n_active;
      auto [l2, h1] = surface_errors(sol.x, sys.dofs, p.ctx, prob);
      r.err_l2 = l2;
      r.err_h1 = h1;
      if (cfg.with_cond) {
        int steps = sys.dofs.n_active > 150000 ? 80 : 200;
        r.cond = estimate_condition(A, cfg.seed, steps).cond();
      }
      r.asm_ms = asm_ms;
      r.solve_ms = solve_ms;
      rep.records.push_back(r);

      if (cfg.write_vtk)
        write_solution_vtk(cfg.out_dir + "/level_" + std::to_string(level) +
                               ".vtk",
                           p, sol.x, sys.dofs, prob);
    } catch (const std::exception& e) {
      failures.push_back("level " + std::to_string(level) + " (n=" +
                         std::to_string(n) + "): failed, " + e.what());
    }
  }
  rep.eoc = compute_eoc(rep.records);

  std::ostringstream os;
  os << config_echo(cfg);
  os << "convergence (" << prob.name << ", m=" << cfg.m << ", k=" << cfg.k
     << ", stab=" << cfg.stab << ")\n";
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    auto& r = rep.records[i];
    os << "level " << r.level << ": h=" << r.h << " dofs=" << r.n_active
       << " L2=" << r.err_l2 << " (eoc " << rep.eoc.l2[i] << ") H1="
       << r.err_h1 << " (eoc " << rep.eoc.h1[i] << ") cond=" << r.cond
       << "\n";
  }
  for (auto& f : failures) os << f << "\n";
  rep.summary = os.str();
  return rep;
}

StudyReport study_conditioning(const StudyConfig& cfg) {
  StudyReport rep;
  auto base = std::shared_ptr<const AnalyticSurface>(
      make_surface(cfg.surface, cfg.surface_params));
  ProblemSpec prob = study_problem(cfg, base);
  StabKind kind = stab_from_string(cfg.stab);

  Vec3 lo = Vec3::Constant(cfg.box_lo), hi = Vec3::Constant(cfg.box_hi);
  TetMesh mesh = build_box_mesh(lo, hi, cfg.n0);
  auto space_m = std::make_shared<FeSpace>(mesh, cfg.m);
  auto space_k =
      cfg.k == cfg.m ? space_m : std::make_shared<FeSpace>(mesh, cfg.k);
  double h = mesh.max_diameter();

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> umag(0.0, 0.5 * h);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::ostringstream os;
  os << config_echo(cfg);
  os << "conditioning (" << to_string(kind) << " vs none, " << cfg.offsets
     << " offsets, n0=" << cfg.n0 << ", h=" << h << ")\n";

  for (int off = 0; off < cfg.offsets; ++off) {
    double mag = umag(rng);
    Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
    while (dir.norm() < 1e-12)
      dir = Vec3(gauss(rng), gauss(rng), gauss(rng));
    dir.normalize();
    auto surf = std::shared_ptr<const AnalyticSurface>(
        offset_surface(base, mag * dir));

    DiscreteLevelSet phi = interpolate_levelset(*surf, space_k);
    CutTopology cut = extract_cut_topology(phi, mesh);
    IsoMap map = build_isomap(phi, cut);
    AssemblyContext ctx{&mesh, space_m.get(), &cut,
                        map.identity ? nullptr : &map, &phi};

    auto t0 = clock_t_::now();
    TraceSystem sys = assemble_lb(ctx, prob);
    SpMat S = assemble_stabilization(ctx, kind, cfg.rho_s);
    SpMat A = sys.A + S;
    double asm_ms = ms_since(t0);

    CondEstimate stab_est = estimate_condition(A, cfg.seed);
    CondEstimate none_est = estimate_condition(sys.A, cfg.seed);

    ErrorRecord r;
    r.level = off;
    r.h = h;
    r.n_active = sys.dofs.n_active;
    r.cond = stab_est.cond();
    r.asm_ms = asm_ms;
    rep.records.push_back(r);
    ErrorRecord rn = r;
    rn.cond = none_est.cond();
    rep.records_aux.push_back(rn);

    os << "offset " << off << ": |s|=" << mag << " cond_stab=" << stab_est.cond()
       << " (reliable=" << stab_est.reliable
       << ", kernel=" << stab_est.kernel_dim << ")"
       << " cond_none=" << none_est.cond()
       << " (reliable=" << none_est.reliable
       << ", kernel=" << none_est.kernel_dim << ")\n";
  }
  rep.eoc = compute_eoc(rep.records);
  rep.eoc_aux = compute_eoc(rep.records_aux);

  double cmax = 0.0, cmin = std::numeric_limits<double>::infinity();
  for (auto& r : rep.records) {
    cmax = std::max(cmax, r.cond);
    cmin = std::min(cmin, r.cond);
  }
  os << "stabilized cond max/min over offsets: " << cmax / cmin << "\n";
  rep.summary = os.str();
  return rep;
}

StudyReport study_supg(const StudyConfig& cfg) {
  StudyReport rep;
  double r0 = cfg.surface_params.empty() ? 1.0 : cfg.surface_params[0];
  if (cfg.surface != "sphere")
    throw std::invalid_argument("supg study: surface must be sphere");
  if (cfg.k != 1)
    throw std::invalid_argument("supg study: requires k=1 geometry");
  ProblemSpec prob = rotating_convection_problem(r0, cfg.eps);
  StabKind kind = stab_from_string(cfg.stab);

  std::vector<std::string> failures;
  for (int level = 0; level < cfg.levels; ++level) {
    int n = cfg.n0 << level;
    try {
      LevelPipeline p = make_pipeline(cfg, n, *prob.surface);

      auto t0 = clock_t_::now();
      TraceSystem sys = assemble_supg(p.ctx, prob, cfg.delta0, cfg.delta1);
      SpMat A = sys.A;
      if (kind != StabKind::none)
        A = A + assemble_stabilization(p.ctx, kind, cfg.rho_s);
      double asm_ms = ms_since(t0);

      t0 = clock_t_::now();
      SolveReport sol = solve_bicgstab(A, sys.rhs, cfg.tol);
      double solve_ms = ms_since(t0);
      if (!sol.converged)
        throw std::runtime_error("BiCGSTAB stalled");

      ErrorRecord r;
      r.level = level;
      r.h = p.cut.max_active_diameter(p.mesh);
      r.n_active = sys.dofs.n_active;
      auto [l2, h1] = surface_errors(sol.x, sys.dofs, p.ctx, prob);
      r.err_l2 = l2;
      r.err_h1 = h1;
      r.err_star = star_norm(sol.x, sys.dofs, p.ctx, prob, sys.delta_T);
      r.asm_ms = asm_ms;
      r.solve_ms = solve_ms;
      rep.records.push_back(r);

      if (cfg.write_vtk)
        write_solution_vtk(cfg.out_dir + "/level_" + std::to_string(level) +
                               ".vtk",
                           p, sol.x, sys.dofs, prob);
    } catch (const std::exception& e) {
      failures.push_back("level " + std::to_string(level) + " (n=" +
                         std::to_string(n) + "): failed, " + e.what());
    }
  }
  rep.eoc = compute_eoc(rep.records);

  std::ostringstream os;
  os << config_echo(cfg);
  os << "supg (eps=" << cfg.eps << ", rotation about e3, stab=" << cfg.stab
     << ")\n";
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    auto& r = rep.records[i];
    os << "level " << r.level << ": h=" << r.h << " dofs=" << r.n_active
       << " star=" << r.err_star << " (eoc " << rep.eoc.star[i] << ") L2="
       << r.err_l2 << " (eoc " << rep.eoc.l2[i] << ")\n";
  }
  for (auto& f : failures) os << f << "\n";
  rep.summary = os.str();
  return rep;
}

StudyReport study_adapt(const StudyConfig& cfg) {
  StudyReport rep;
  double r0 = cfg.surface_params.empty() ? 1.0 : cfg.surface_params[0];
  if (cfg.surface != "sphere")
    throw std::invalid_argument("adapt study: surface must be sphere");
  ProblemSpec prob = spike_problem(r0, cfg.sigma);
  AdaptOptions opt;
  opt.box_lo = Vec3::Constant(cfg.box_lo);
  opt.box_hi = Vec3::Constant(cfg.box_hi);
  opt.n0 = cfg.n0;
  opt.m = cfg.m;
  opt.k = cfg.k;
  opt.stab = stab_from_string(cfg.stab);
  opt.rho_s = cfg.rho_s;
  opt.theta = cfg.theta;
  opt.max_steps = cfg.max_steps;
  opt.dof_budget = cfg.dof_budget;
  opt.solver_tol = cfg.tol;
  if (cfg.write_vtk) opt.out_dir = cfg.out_dir;

  AdaptiveResult res = adaptive_loop(prob, opt);

  std::vector<double> eta_col, theta_col;
  for (auto& s : res.steps) {
    rep.records.push_back(s.record);
    eta_col.push_back(s.eta_global);
    theta_col.push_back(cfg.theta);
  }
  rep.eoc = compute_eoc(rep.records);

  std::ostringstream os;
  os << config_echo(cfg);
  os << "adapt (spike on sphere, theta=" << cfg.theta << ", budget="
     << cfg.dof_budget << ", budget_reached=" << res.budget_reached << ")\n";
  for (std::size_t i = 0; i < res.steps.size(); ++i) {
    auto& s = res.steps[i];
    os << "step " << i << ": dofs=" << s.record.n_active << " h="
       << s.record.h << " H1=" << s.record.err_h1 << " eta=" << s.eta_global
       << " marked=" << s.n_marked << " tets=" << s.n_tets << "\n";
  }
  rep.summary = os.str();

  std::filesystem::create_directories(cfg.out_dir);
  write_report_csv(cfg.out_dir + "/report.csv", rep.records, rep.eoc,
                   {"eta_global", "theta"}, {eta_col, theta_col});
  return rep;
}

StudyReport study_geometry(const StudyConfig& cfg) {
  StudyReport rep;
  auto surface = std::shared_ptr<const AnalyticSurface>(
      make_surface(cfg.surface, cfg.surface_params));

  std::vector<std::string> failures;
  for (int k = 1; k <= 2; ++k) {
    StudyConfig c = cfg;
    c.k = k;
    c.m = k;
    auto& recs = (k == 1) ? rep.records : rep.records_aux;
    for (int level = 0; level < cfg.levels; ++level) {
      int n = cfg.n0 << level;
      try {
        auto t0 = clock_t_::now();
        LevelPipeline p = make_pipeline(c, n, *surface);
        auto [dmax, dmean] = geometry_distance(
            *surface, p.cut, p.mesh, p.ctx.map, 2 * k + 2);
        ErrorRecord r;
        r.level = level;
        r.h = p.cut.max_active_diameter(p.mesh);
        r.n_active = p.cut.n_active();
        r.err_l2 = dmax;
        r.err_h1 = dmean;
        r.asm_ms = ms_since(t0);
        recs.push_back(r);
        if (cfg.write_vtk && k == 2)
          write_vtk_surface(cfg.out_dir + "/level_" + std::to_string(level) +
                                ".vtk",
                            p.cut);
      } catch (const std::exception& e) {
        failures.push_back("k=" + std::to_string(k) + " level " +
                           std::to_string(level) + " (n=" + std::to_string(n) +
                           "): failed, " + e.what());
      }
    }
  }
  rep.eoc = compute_eoc(rep.records);
  rep.eoc_aux = compute_eoc(rep.records_aux);

  std::ostringstream os;
  os << config_echo(cfg);
  os << "geometry distances (err_l2 column = max distance, err_h1 = mean)\n";
  for (int k = 1; k <= 2; ++k) {
    auto& recs = (k == 1) ? rep.records : rep.records_aux;
    auto& eoc = (k == 1) ? rep.eoc : rep.eoc_aux;
    for (std::size_t i = 0; i < recs.size(); ++i)
      os << "k=" << k << " level " << recs[i].level << ": h=" << recs[i].h
         << " max=" << recs[i].err_l2 << " (eoc " << eoc.l2[i] << ") mean="
         << recs[i].err_h1 << " (eoc " << eoc.h1[i] << ")\n";
  }
  for (auto& f : failures) os << f << "\n";
  rep.summary = os.str();
  return rep;
}

}  // namespace

StudyReport run_study(const StudyConfig& cfg) {
  if (cfg.k > cfg.m)
    throw std::invalid_argument(
        "run_study: geometry degree k = " + std::to_string(cfg.k) +
        " exceeds FE degree m = " + std::to_string(cfg.m));
  bool eoc_study = cfg.study == "convergence" || cfg.study == "supg" ||
                   cfg.study == "geometry";
  if (eoc_study && cfg.levels < 2)
    throw std::invalid_argument("run_study: '" + cfg.study +
                                "' needs levels >= 2 to report EOCs");
  std::filesystem::create_directories(cfg.out_dir);
  StudyReport rep;
  if (cfg.study == "convergence") {
    rep = study_convergence(cfg);
    write_report_csv(cfg.out_dir + "/report.csv", rep.records, rep.eoc);
  } else if (cfg.study == "conditioning") {
    rep = study_conditioning(cfg);
    write_report_csv(cfg.out_dir + "/report.csv", rep.records, rep.eoc);
    write_report_csv(cfg.out_dir + "/report_none.csv", rep.records_aux,
                     rep.eoc_aux);
  } else if (cfg.study == "supg") {
    rep = study_supg(cfg);
    write_report_csv(cfg.out_dir + "/report.csv", rep.records, rep.eoc);
  } else if (cfg.study == "adapt") {
    rep = study_adapt(cfg);  // writes its own CSV (extra columns)
  } else if (cfg.study == "geometry") {
    rep = study_geometry(cfg);
    write_report_csv(cfg.out_dir + "/report_k1.csv", rep.records, rep.eoc);
    write_report_csv(cfg.out_dir + "/report_k2.csv", rep.records_aux,
                     rep.eoc_aux);
    write_report_csv(cfg.out_dir + "/report.csv", rep.records_aux,
                     rep.eoc_aux);
  } else {
    throw std::invalid_argument(
        "unknown study '" + cfg.study +
        "' (valid: convergence, conditioning, supg, adapt, geometry)");
  }
  std::ofstream sum(cfg.out_dir + "/summary.txt");
  sum << rep.summary;
  return rep;
}

}  // namespace tracefem
