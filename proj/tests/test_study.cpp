// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tracefem/study.hpp"
#include "tracefem/vtk_io.hpp"

using namespace tracefem;

namespace {

const std::string kSchema =
    "level,h,n_active,err_l2,err_h1,err_star,eoc_l2,eoc_h1,eoc_star,cond,"
    "asm_ms,solve_ms";

std::filesystem::path fresh_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("tracefem_study_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(bool(in));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

// timings differ between runs; blank them before comparing reports
std::string mask_timings(const std::string& line) {
  auto f = split(line);
  if (f.size() > 10) f[10] = "x";
  if (f.size() > 11) f[11] = "x";
  std::string out;
  for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
  return out;
}

StudyConfig small_config(const std::string& study, const std::string& tag) {
  StudyConfig cfg;
  cfg.study = study;
  cfg.n0 = 4;
  cfg.levels = 2;
  cfg.write_vtk = false;
  cfg.out_dir = fresh_dir(tag).string();
  return cfg;
}

}  // namespace

TEST_CASE("config parsing applies keys, comments, and defaults") {
  std::istringstream in(
      "# study configuration\n"
      "surface = torus   # inline comment\n"
      "surface_params = 1.0, 0.6\n"
      "\n"
      "m = 2\n"
      "k=2\n"
      "stab = ghost\n"
      "levels = 3\n"
      "seed = 7\n"
      "with_cond = 0\n");
  StudyConfig cfg = parse_config(in);
  CHECK(cfg.surface == "torus");
  REQUIRE(cfg.surface_params.size() == 2);
  CHECK(cfg.surface_params[0] == 1.0);
  CHECK(cfg.surface_params[1] == 0.6);
  CHECK(cfg.m == 2);
  CHECK(cfg.k == 2);
  CHECK(cfg.stab == "ghost");
  CHECK(cfg.levels == 3);
  CHECK(cfg.seed == 7);
  CHECK(cfg.with_cond == false);
  // untouched keys keep their defaults
  CHECK(cfg.study == "convergence");
  CHECK(cfg.n0 == 8);
  CHECK(cfg.theta == 0.5);
  CHECK(cfg.tol == 1e-10);
  CHECK(cfg.box_lo == -4.0 / 3.0);
  CHECK(cfg.box_hi == 4.0 / 3.0);
}

TEST_CASE("config parsing rejects unknown keys and malformed lines") {
  std::istringstream bad_key("stabilization = ghost\n");
  CHECK_THROWS_AS(parse_config(bad_key), std::invalid_argument);
  try {
    std::istringstream again("stabilization = ghost\n");
    parse_config(again);
  } catch (const std::invalid_argument& e) {
    // the message lists the valid keys
    CHECK(std::string(e.what()).find("stab") != std::string::npos);
    CHECK(std::string(e.what()).find("valid") != std::string::npos);
  }
  std::istringstream no_eq("levels 3\n");
  CHECK_THROWS_AS(parse_config(no_eq), std::invalid_argument);
  StudyConfig cfg;
  CHECK_THROWS_AS(apply_override(cfg, "nope", "1"), std::invalid_argument);
}

TEST_CASE("configs with geometry degree above FE degree are rejected") {
  std::istringstream in("k = 2\nm = 1\n");
  CHECK_THROWS_AS(parse_config(in), std::invalid_argument);
  std::istringstream ok("k = 1\nm = 2\n");  // k < m is permitted
  CHECK_NOTHROW(parse_config(ok));

  StudyConfig cfg = small_config("convergence", "km");
  cfg.k = 2;  // overrides bypass parse_config, run_study still validates
  CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("EOC studies require at least two levels") {
  for (const char* study : {"convergence", "supg", "geometry"}) {
    StudyConfig cfg = small_config(study, std::string("lvl_") + study);
    cfg.levels = 1;
    CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
    std::filesystem::remove_all(cfg.out_dir);
  }
}

TEST_CASE("infeasible levels are recorded and the study continues") {
  StudyConfig cfg = small_config("convergence", "infeasible");
  // a sphere of radius 3 never intersects the default box: every level fails
  cfg.surface_params = {3.0};
  StudyReport rep = run_study(cfg);
  CHECK(rep.records.empty());
  CHECK(rep.summary.find("failed") != std::string::npos);
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("every advertised config key round-trips through apply_override") {
  StudyConfig cfg;
  for (const std::string& key : config_keys())
    CHECK_NOTHROW(apply_override(cfg, key, "1"));
  CHECK(config_keys().size() == 24);
}

TEST_CASE("vtk writers emit legacy version 3.0 headers") {
  auto dir = fresh_dir("vtk");
  TetMesh mesh = build_box_mesh(Vec3(0, 0, 0), Vec3(1, 1, 1), 1);

  auto mp = dir / "mesh.vtk";
  write_vtk_mesh(mp.string(), mesh, {{"q", std::vector<double>(6, 1.0)}});
  auto lines = read_lines(mp);
  REQUIRE(lines.size() > 4);
  CHECK(lines[0] == "# vtk DataFile Version 3.0");
  CHECK(lines[2] == "ASCII");
  CHECK(lines[3] == "DATASET UNSTRUCTURED_GRID");

  CHECK_THROWS_AS(
      write_vtk_mesh((dir / "bad.vtk").string(), mesh,
                     {{"q", std::vector<double>(5, 1.0)}}),
      std::invalid_argument);

  auto surf = make_surface("sphere");
  auto space = std::make_shared<FeSpace>(mesh, 1);
  DiscreteLevelSet phi = interpolate_levelset(*surf, space);
  CutTopology cut = extract_cut_topology(phi, mesh);
  auto sp = dir / "surf.vtk";
  write_vtk_surface(sp.string(), cut);
  lines = read_lines(sp);
  REQUIRE(lines.size() > 4);
  CHECK(lines[0] == "# vtk DataFile Version 3.0");
  CHECK(lines[3] == "DATASET POLYDATA");
  std::filesystem::remove_all(dir);
}

TEST_CASE("convergence study writes schema-exact report and decreasing errors") {
  StudyConfig cfg = small_config("convergence", "conv");
  cfg.write_vtk = true;
  StudyReport rep = run_study(cfg);

  REQUIRE(rep.records.size() == 2);
  CHECK(rep.records[1].err_l2 < rep.records[0].err_l2);
  CHECK(rep.records[1].err_h1 < rep.records[0].err_h1);
  CHECK(rep.records[0].h > rep.records[1].h);
  CHECK(rep.records[1].n_active > rep.records[0].n_active);
  // conditioning grows as the mesh is refined
  CHECK(rep.records[0].cond > 1.0);
  CHECK(rep.records[1].cond > rep.records[0].cond);
  CHECK(std::isnan(rep.eoc.l2[0]));
  CHECK(rep.eoc.l2[1] > 0.5);

  auto dir = std::filesystem::path(cfg.out_dir);
  auto lines = read_lines(dir / "report.csv");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == kSchema);
  for (int i = 1; i <= 2; ++i) CHECK(split(lines[i]).size() == 12);
  CHECK(std::stod(split(lines[1])[3]) == doctest::Approx(rep.records[0].err_l2));

  auto summary = read_lines(dir / "summary.txt");
  REQUIRE(!summary.empty());
  bool has_conv = false;
  for (auto& l : summary)
    if (l.find("convergence") != std::string::npos) has_conv = true;
  CHECK(has_conv);

  auto vtk = read_lines(dir / "level_0.vtk");
  REQUIRE(!vtk.empty());
  CHECK(vtk[0] == "# vtk DataFile Version 3.0");
  std::filesystem::remove_all(dir);
}

TEST_CASE("two identical study runs agree outside timing columns") {
  StudyConfig a = small_config("convergence", "det_a");
  StudyConfig b = small_config("convergence", "det_b");
  run_study(a);
  run_study(b);

  auto la = read_lines(std::filesystem::path(a.out_dir) / "report.csv");
  auto lb = read_lines(std::filesystem::path(b.out_dir) / "report.csv");
  REQUIRE(la.size() == lb.size());
  for (std::size_t i = 0; i < la.size(); ++i)
    CHECK(mask_timings(la[i]) == mask_timings(lb[i]));

  // the summary carries no timings and must match byte for byte
  auto sa = read_lines(std::filesystem::path(a.out_dir) / "summary.txt");
  auto sb = read_lines(std::filesystem::path(b.out_dir) / "summary.txt");
  CHECK(sa == sb);
  std::filesystem::remove_all(a.out_dir);
  std::filesystem::remove_all(b.out_dir);
}

TEST_CASE("geometry study reports smaller distances for k=2") {
  StudyConfig cfg = small_config("geometry", "geom");
  StudyReport rep = run_study(cfg);

  REQUIRE(rep.records.size() == 2);       // k = 1
  REQUIRE(rep.records_aux.size() == 2);   // k = 2
  for (auto* recs : {&rep.records, &rep.records_aux}) {
    CHECK((*recs)[0].err_l2 > 0.0);
    CHECK((*recs)[1].err_l2 < (*recs)[0].err_l2);
  }
  // the curved geometry is closer to the exact surface than the linear one
  CHECK(rep.records_aux[1].err_l2 < rep.records[1].err_l2);

  auto dir = std::filesystem::path(cfg.out_dir);
  CHECK(std::filesystem::exists(dir / "report_k1.csv"));
  CHECK(std::filesystem::exists(dir / "report_k2.csv"));
  auto k2 = read_lines(dir / "report_k2.csv");
  auto def = read_lines(dir / "report.csv");
  CHECK(k2 == def);  // report.csv mirrors the higher-order table
  CHECK(k2[0] == kSchema);
  std::filesystem::remove_all(dir);
}

TEST_CASE("conditioning study compares stabilized and raw spectra") {
  StudyConfig cfg = small_config("conditioning", "cond");
  cfg.offsets = 3;
  StudyReport rep = run_study(cfg);

  REQUIRE(rep.records.size() == 3);
  REQUIRE(rep.records_aux.size() == 3);
  for (auto& r : rep.records) {
    CHECK(std::isfinite(r.cond));
    CHECK(r.cond > 1.0);
  }
  CHECK(rep.summary.find("max/min") != std::string::npos);

  auto dir = std::filesystem::path(cfg.out_dir);
  auto stab = read_lines(dir / "report.csv");
  auto none = read_lines(dir / "report_none.csv");
  REQUIRE(stab.size() == 4);
  REQUIRE(none.size() == 4);
  CHECK(stab[0] == kSchema);
  CHECK(none[0] == kSchema);
  std::filesystem::remove_all(dir);
}

TEST_CASE("supg study tracks the star norm") {
  StudyConfig cfg = small_config("supg", "supg");
  StudyReport rep = run_study(cfg);

  REQUIRE(rep.records.size() == 2);
  for (auto& r : rep.records) {
    CHECK(r.err_star > 0.0);
    CHECK(std::isfinite(r.err_star));
  }
  CHECK(rep.records[1].err_star < rep.records[0].err_star);

  auto lines =
      read_lines(std::filesystem::path(cfg.out_dir) / "report.csv");
  CHECK(lines[0] == kSchema);
  CHECK(split(lines[1])[5] != "nan");  // err_star column populated
  std::filesystem::remove_all(cfg.out_dir);

  StudyConfig bad = small_config("supg", "supg_bad");
  bad.k = 2;
  CHECK_THROWS_AS(run_study(bad), std::invalid_argument);
  std::filesystem::remove_all(bad.out_dir);
}

TEST_CASE("adapt study appends estimator columns to the report") {
  StudyConfig cfg = small_config("adapt", "adapt");
  cfg.dof_budget = 800;
  cfg.max_steps = 6;
  StudyReport rep = run_study(cfg);
  REQUIRE(!rep.records.empty());

  auto lines = read_lines(std::filesystem::path(cfg.out_dir) / "report.csv");
  REQUIRE(lines.size() == rep.records.size() + 1);
  CHECK(lines[0] == kSchema + ",eta_global,theta");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split(lines[i]);
    REQUIRE(f.size() == 14);
    CHECK(std::stod(f[12]) > 0.0);               // eta_global
    CHECK(std::stod(f[13]) == doctest::Approx(0.5));  // theta
  }
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("unknown study name throws") {
  StudyConfig cfg = small_config("spectral", "bad_study");
  CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
  std::filesystem::remove_all(cfg.out_dir);
}
