// SPDX-License-Identifier: Apache-2.0
// Part of the tracefem project.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <vector>

#include "tracefem/assembly.hpp"
#include "tracefem/mesh.hpp"
#include "tracefem/surface.hpp"

using namespace tracefem;

namespace {

const Vec3 kLo(-4.0 / 3.0, -4.0 / 3.0, -4.0 / 3.0);
const Vec3 kHi(4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0);

// One reference tet; the plane z = 1/4 cuts off the top vertex, and every
// cut-point coordinate is an exact binary fraction.
TetMesh micro_mesh_one() {
  TetMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  m.tets = {{0, 1, 2, 3}};
  m.mverts = m.tets;
  m.mtag = {3};
  m.generation = {0};
  m.parent = {-1};
  return m;
}

// Two conforming tets sharing the face {1,2,3}; both are cut by z = 1/4.
TetMesh micro_mesh_two() {
  TetMesh m = micro_mesh_one();
  m.vertices.push_back(Vec3(1, 1, 1));
  m.tets.push_back({1, 2, 3, 4});
  m.mverts.push_back({1, 2, 3, 4});
  m.mtag.push_back(3);
  m.generation.push_back(0);
  m.parent.push_back(-1);
  return m;
}

struct Pipeline {
  TetMesh mesh;
  std::shared_ptr<FeSpace> space;
  DiscreteLevelSet phi;
  CutTopology cut;

  Pipeline(const AnalyticSurface& surf, TetMesh&& mm, int k)
      : mesh(std::move(mm)),
        space(std::make_shared<FeSpace>(mesh, k)),
        phi(interpolate_levelset(surf, space)),
        cut(extract_cut_topology(phi, mesh)) {}
  Pipeline(const AnalyticSurface& surf, int n, int k)
      : Pipeline(surf, build_box_mesh(kLo, kHi, n), k) {}

  AssemblyContext ctx() const { return {&mesh, space.get(), &cut, nullptr, &phi}; }
};

std::unique_ptr<AnalyticSurface> generic_sphere() {
  std::shared_ptr<const AnalyticSurface> base = make_surface("sphere");
  return offset_surface(base, Vec3(0.013, 0.021, 0.034));
}

Eigen::MatrixXd dense(const SpMat& A) { return Eigen::MatrixXd(A); }

}  // namespace

TEST_CASE("single cut tet against the hand-computed system") {
  auto plane = make_surface("plane", {0, 0, 1, 0.25});
  Pipeline p(*plane, micro_mesh_one(), 1);
  REQUIRE(p.cut.n_active() == 1);
  REQUIRE(p.cut.tris.size() == 1);
  CHECK(p.cut.tris[0].area == doctest::Approx(0.28125).epsilon(1e-14));

  ProblemSpec prob = planar_affine_problem(Vec3(0, 0, 1), 0.25, Vec3(0.3, -0.2, 0.0), 0.5);
  TraceSystem sys = assemble_lb(p.ctx(), prob);
  REQUIRE(sys.dofs.n_active == 4);
  CHECK(sys.symmetric);

  // stiffness: area * (P g_i . P g_j) with P = I - e_z e_z^T
  const double A = 0.28125;
  Eigen::MatrixXd S(4, 4);
  S << 2 * A, -A, -A, 0, -A, A, 0, 0, -A, 0, A, 0, 0, 0, 0, 0;
  // mass: int lambda_i lambda_j over the cut triangle (exact rationals)
  const double d = 0.0263671875, o = 0.01318359375, q = 0.017578125;
  Eigen::MatrixXd M(4, 4);
  M << d, o, o, q, o, d, o, q, o, o, d, q, q, q, q, q;
  Eigen::MatrixXd want = S + M;

  Eigen::MatrixXd got = dense(sys.A);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(got(i, j) - want(i, j)) <= 1e-12);

  // rhs: int f lambda_i with f = 0.3 x - 0.2 y + 0.5 on the plane
  const double rhs_want[4] = {2241.0 / 61440.0, 621.0 / 15360.0, 2079.0 / 61440.0,
                              189.0 / 5120.0};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(sys.rhs[i] - rhs_want[i]) <= 1e-12);
}

TEST_CASE("two-tet ghost penalty against the hand-computed jump") {
  auto plane = make_surface("plane", {0, 0, 1, 0.25});
  Pipeline p(*plane, micro_mesh_two(), 1);
  REQUIRE(p.cut.n_active() == 2);
  REQUIRE(p.cut.interior_faces.size() == 1);
  // quad cut of the second tet splits into two triangles
  REQUIRE(p.cut.tris.size() == 3);
  double area = 0.0;
  for (const auto& t : p.cut.tris) area += t.area;
  CHECK(area == doctest::Approx(0.65625).epsilon(1e-13));

  SpMat S = assemble_stabilization(p.ctx(), StabKind::ghost);
  // dof 0 belongs only to tet 0: jump of grad lambda_0 . n_F is
  // (-1,-1,-1).n_F against 0, face area sqrt(3)/2
  Eigen::MatrixXd Sd = dense(S);
  CHECK(std::abs(Sd(0, 0) - 3.0 * std::sqrt(3.0) / 2.0) <= 1e-12);
  CHECK((Sd - Sd.transpose()).norm() <= 1e-14);
  // affine functions have continuous gradients: zero penalty
  REQUIRE(S.rows() == 5);  // all five dofs are active
  Eigen::VectorXd aff(5);
  const Vec3 al(0.4, -0.7, 0.2);
  for (int i = 0; i < 5; ++i) aff[i] = al.dot(p.space->dof_point(i)) + 0.3;
  CHECK(std::abs(aff.dot(S * aff)) <= 1e-12);
}

TEST_CASE("stabilization vanishes on functions with zero relevant derivative") {
  auto plane = make_surface("plane", {0, 0, 1, 0.25});
  Pipeline p(*plane, micro_mesh_two(), 1);
  AssemblyContext ctx = p.ctx();

  // u affine in (x, y): grad u . n = 0 on and off the plane
  Eigen::VectorXd u(5);
  for (int i = 0; i < 5; ++i) {
    Vec3 x = p.space->dof_point(i);
    u[i] = 0.7 * x[0] - 0.4 * x[1] + 1.1;
  }
  for (StabKind kind : {StabKind::ghost, StabKind::full_grad_surface,
                        StabKind::normal_volume}) {
    SpMat S = assemble_stabilization(ctx, kind);
    CAPTURE(to_string(kind));
    CHECK(std::abs(u.dot(S * u)) <= 1e-12);
  }
  // full_grad_volume only annihilates constants
  Eigen::VectorXd c1 = Eigen::VectorXd::Constant(5, 2.5);
  SpMat Sv = assemble_stabilization(ctx, StabKind::full_grad_volume);
  CHECK(std::abs(c1.dot(Sv * c1)) <= 1e-12);
  CHECK(u.dot(Sv * u) > 1e-6);
}

TEST_CASE("row sums: LB system applied to constants equals the mass action") {
  auto surf = generic_sphere();
  Pipeline p(*surf, 6, 1);
  ProblemSpec prob = sphere_harmonic_problem();
  TraceSystem sys = assemble_lb(p.ctx(), prob);
  SpMat M = assemble_surface_mass(p.ctx());
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.dofs.n_active);
  // grad of the constant vanishes, reaction c = 1 leaves the mass
  CHECK((sys.A * ones - M * ones).cwiseAbs().maxCoeff() <= 1e-12);
  // mass total = area of Gamma_lin
  double area = 0.0;
  for (const auto& t : p.cut.tris) area += t.area;
  CHECK(ones.dot(M * ones) == doctest::Approx(area).epsilon(1e-12));
}

TEST_CASE("band mass total is the active band volume") {
  auto surf = generic_sphere();
  Pipeline p(*surf, 5, 1);
  SpMat Mb = assemble_band_mass(p.ctx());
  double vol = 0.0;
  for (int t : p.cut.active_tets) vol += p.mesh.tet_volume(t);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(Mb.rows());
  CHECK(ones.dot(Mb * ones) == doctest::Approx(vol).epsilon(1e-12));
}

TEST_CASE("all operators are symmetric positive semidefinite") {
  auto surf = generic_sphere();
  for (int k : {1, 2}) {
    Pipeline p(*surf, 4, k);
    AssemblyContext ctx = p.ctx();
    IsoMap map;
    if (k == 2) {
      map = build_isomap(p.phi, p.cut);
      ctx.map = &map;
    }
    ProblemSpec prob = sphere_harmonic_problem();
    TraceSystem sys = assemble_lb(ctx, prob);
    std::vector<SpMat> ops = {sys.A};
    for (StabKind kind : {StabKind::ghost, StabKind::full_grad_surface,
                          StabKind::full_grad_volume, StabKind::normal_volume})
      ops.push_back(assemble_stabilization(ctx, kind));
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g(0.0, 1.0);
    for (const SpMat& Op : ops) {
      Eigen::MatrixXd D = dense(Op);
      CHECK((D - D.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1 + D.cwiseAbs().maxCoeff()));
      for (int probe = 0; probe < 40; ++probe) {
        Eigen::VectorXd v(Op.rows());
        for (int i = 0; i < v.size(); ++i) v[i] = g(rng);
        CHECK(v.dot(Op * v) >= -1e-10 * v.squaredNorm() * (1 + D.cwiseAbs().maxCoeff()));
      }
    }
  }
}

TEST_CASE("quadrature degree policy") {
  auto surf = generic_sphere();
  Pipeline p1(*surf, 4, 1);
  CHECK(p1.ctx().default_degree() == 2);
  Pipeline p2(*surf, 4, 2);
  AssemblyContext c2 = p2.ctx();
  CHECK(c2.default_degree() == 4);  // identity geometry: k_eff = 1
  IsoMap map = build_isomap(p2.phi, p2.cut);
  c2.map = &map;
  CHECK(c2.default_degree() == 6);
}

TEST_CASE("assembly is deterministic") {
  auto surf = generic_sphere();
  Pipeline p(*surf, 5, 1);
  ProblemSpec prob = sphere_harmonic_problem();
  TraceSystem s1 = assemble_lb(p.ctx(), prob);
  TraceSystem s2 = assemble_lb(p.ctx(), prob);
  REQUIRE(s1.A.nonZeros() == s2.A.nonZeros());
  for (int i = 0; i < s1.A.nonZeros(); ++i)
    CHECK(s1.A.valuePtr()[i] == s2.A.valuePtr()[i]);
  CHECK((s1.rhs - s2.rhs).norm() == 0.0);
}

TEST_CASE("normal_volume requires the level set") {
  auto surf = generic_sphere();
  Pipeline p(*surf, 4, 1);
  AssemblyContext ctx = p.ctx();
  ctx.phi = nullptr;
  CHECK_THROWS_AS(assemble_stabilization(ctx, StabKind::normal_volume),
                  std::invalid_argument);
}

TEST_CASE("stab kind string round trip and default scalings") {
  for (StabKind kind : {StabKind::none, StabKind::ghost, StabKind::full_grad_surface,
                        StabKind::full_grad_volume, StabKind::normal_volume})
    CHECK(stab_from_string(to_string(kind)) == kind);
  CHECK_THROWS(stab_from_string("bogus"));
  const double h = 0.125;
  CHECK(default_rho(StabKind::ghost, h) == 1.0);
  CHECK(default_rho(StabKind::full_grad_surface, h) == 1.0);
  CHECK(default_rho(StabKind::full_grad_volume, h) == h);
  CHECK(default_rho(StabKind::normal_volume, h) == 1.0);
}

TEST_CASE("SUPG delta_T hits the engineered value exactly") {
  auto plane = make_surface("plane", {0, 0, 1, 0.25});
  Pipeline p(*plane, micro_mesh_one(), 1);
  const double hT = p.mesh.tet_diameter(0);
  CHECK(hT == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  ProblemSpec prob;
  prob.surface = std::shared_ptr<const AnalyticSurface>(
      make_surface("plane", {0, 0, 1, 0.25}));
  prob.eps = 1.0;
  prob.reaction = [](const Vec3&) { return 1.0; };
  prob.has_convection = true;
  const Vec3 w(10.0 * hT, 0.0, 0.0);  // Pe = 10, delta0 h / |w| = 0.05
  prob.convection = [w](const Vec3&) { return w; };
  prob.div_convection = [](const Vec3&) { return 0.0; };
  const Vec3 al(0.3, -0.2, 0.0);
  prob.exact_u = [al](const Vec3& x) { return al.dot(x) + 0.5; };
  prob.exact_grad = [al](const Vec3&) { return al; };
  prob.forcing = [al, w](const Vec3& x) { return w.dot(al) + al.dot(x) + 0.5; };
  prob.name = "supg_unit";

  TraceSystem sys = assemble_supg(p.ctx(), prob);
  REQUIRE(sys.delta_T.size() == 1);
  CHECK(std::abs(sys.delta_T[0] - 0.05) <= 1e-15);
  CHECK(!sys.symmetric);

  // the reaction cap: with c = 40 the bound 1/c = 0.025 wins
  auto prob2 = prob;
  prob2.reaction = [](const Vec3&) { return 40.0; };
  prob2.forcing = [al, w](const Vec3& x) { return w.dot(al) + 40.0 * (al.dot(x) + 0.5); };
  TraceSystem sys2 = assemble_supg(p.ctx(), prob2);
  CHECK(std::abs(sys2.delta_T[0] - 0.025) <= 1e-15);

  // diffusion-dominated branch: large eps gives delta1 h^2 / eps
  auto prob3 = prob;
  prob3.eps = 1000.0;
  TraceSystem sys3 = assemble_supg(p.ctx(), prob3);
  CHECK(std::abs(sys3.delta_T[0] - 0.25 * hT * hT / 1000.0) <= 1e-15);
}

TEST_CASE("SUPG rejects curved geometry and missing convection") {
  auto surf = generic_sphere();
  Pipeline p2(*surf, 4, 2);
  AssemblyContext ctx = p2.ctx();
  IsoMap map = build_isomap(p2.phi, p2.cut);
  ctx.map = &map;
  ProblemSpec prob = rotating_convection_problem(1.0, 1e-3);
  CHECK_THROWS_AS(assemble_supg(ctx, prob), std::invalid_argument);

  Pipeline p1(*surf, 4, 1);
  ProblemSpec noconv = sphere_harmonic_problem();
  CHECK_THROWS_AS(assemble_supg(p1.ctx(), noconv), std::invalid_argument);
}

TEST_CASE("matrix market round trip") {
  auto surf = generic_sphere();
  Pipeline p(*surf, 3, 1);
  ProblemSpec prob = sphere_harmonic_problem();
  TraceSystem sys = assemble_lb(p.ctx(), prob);

  auto parse = [](const std::string& path, bool expect_sym) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == std::string("%%MatrixMarket matrix coordinate real ") +
                        (expect_sym ? "symmetric" : "general"));
    std::string line;
    while (std::getline(in, line) && !line.empty() && line[0] == '%') {
    }
    std::istringstream dims(line);
    int rows, cols, nnz;
    dims >> rows >> cols >> nnz;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, cols);
    for (int k = 0; k < nnz; ++k) {
      int i, j;
      double v;
      in >> i >> j >> v;
      M(i - 1, j - 1) = v;
      if (expect_sym && i != j) M(j - 1, i - 1) = v;
    }
    return M;
  };

  const std::string sym_path = "mm_sym_test.mtx";
  const std::string gen_path = "mm_gen_test.mtx";
  write_matrix_market(sym_path, sys.A, true);
  write_matrix_market(gen_path, sys.A, false);
  Eigen::MatrixXd Ms = parse(sym_path, true);
  Eigen::MatrixXd Mg = parse(gen_path, false);
  Eigen::MatrixXd D = dense(sys.A);
  CHECK((Ms - D).cwiseAbs().maxCoeff() <= 1e-15 * D.cwiseAbs().maxCoeff());
  CHECK((Mg - D).cwiseAbs().maxCoeff() <= 1e-15 * D.cwiseAbs().maxCoeff());
  std::remove(sym_path.c_str());
  std::remove(gen_path.c_str());
}
