// SPDX-License-Identifier: Apache-2.0
// Part of the tracefem project.
#include <benchmark/benchmark.h>

#include <memory>

#include "tracefem/assembly.hpp"
#include "tracefem/levelset.hpp"
#include "tracefem/mesh.hpp"
#include "tracefem/problems.hpp"
#include "tracefem/solver.hpp"
#include "tracefem/surface.hpp"

using namespace tracefem;

namespace {

const Vec3 kLo(-4.0 / 3.0, -4.0 / 3.0, -4.0 / 3.0);
const Vec3 kHi(4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0);

struct Setup {
  TetMesh mesh;
  std::shared_ptr<FeSpace> space;
  std::unique_ptr<AnalyticSurface> surface;
  DiscreteLevelSet phi;
  CutTopology cut;

  explicit Setup(int n)
      : mesh(build_box_mesh(kLo, kHi, n)),
        space(std::make_shared<FeSpace>(mesh, 1)),
        surface(make_surface("sphere")),
        phi(interpolate_levelset(*surface, space)),
        cut(extract_cut_topology(phi, mesh)) {}
};

}  // namespace

static void BM_BuildMesh(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    TetMesh m = build_box_mesh(kLo, kHi, n);
    benchmark::DoNotOptimize(m.vertices.data());
  }
}
BENCHMARK(BM_BuildMesh)->Arg(8)->Arg(16)->Arg(32);

static void BM_ExtractCut(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  TetMesh mesh = build_box_mesh(kLo, kHi, n);
  auto space = std::make_shared<FeSpace>(mesh, 1);
  auto surface = make_surface("sphere");
  DiscreteLevelSet phi = interpolate_levelset(*surface, space);
  for (auto _ : state) {
    CutTopology cut = extract_cut_topology(phi, mesh);
    benchmark::DoNotOptimize(cut.tris.data());
  }
}
BENCHMARK(BM_ExtractCut)->Arg(8)->Arg(16)->Arg(32);

static void BM_AssembleLB(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  ProblemSpec prob = sphere_harmonic_problem();
  AssemblyContext ctx{&s.mesh, s.space.get(), &s.cut, nullptr, &s.phi};
  for (auto _ : state) {
    TraceSystem sys = assemble_lb(ctx, prob);
    benchmark::DoNotOptimize(sys.A.valuePtr());
  }
}
BENCHMARK(BM_AssembleLB)->Arg(8)->Arg(16)->Arg(32);

static void BM_AssembleStab(benchmark::State& state) {
  Setup s(16);
  AssemblyContext ctx{&s.mesh, s.space.get(), &s.cut, nullptr, &s.phi};
  const auto kind = static_cast<StabKind>(state.range(0));
  for (auto _ : state) {
    SpMat S = assemble_stabilization(ctx, kind);
    benchmark::DoNotOptimize(S.valuePtr());
  }
}
BENCHMARK(BM_AssembleStab)
    ->Arg(static_cast<int>(StabKind::ghost))
    ->Arg(static_cast<int>(StabKind::full_grad_volume))
    ->Arg(static_cast<int>(StabKind::normal_volume));

static void BM_SolveCG(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  ProblemSpec prob = sphere_harmonic_problem();
  AssemblyContext ctx{&s.mesh, s.space.get(), &s.cut, nullptr, &s.phi};
  TraceSystem sys = assemble_lb(ctx, prob);
  const double h = s.cut.max_active_diameter(s.mesh);
  sys.A += assemble_stabilization(ctx, StabKind::normal_volume,
                                  default_rho(StabKind::normal_volume, h));
  for (auto _ : state) {
    SolveReport rep = solve_cg(sys.A, sys.rhs, 1e-10);
    benchmark::DoNotOptimize(rep.x.data());
  }
}
BENCHMARK(BM_SolveCG)->Arg(8)->Arg(16);

BENCHMARK_MAIN();
