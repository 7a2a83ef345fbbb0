// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include "tracefem/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tracefem {

double DiscreteLevelSet::eval(int tet, const Vec3& ref) const {
  BasisEval b = eval_basis(*space, tet, ref);
  auto& d = space->tet_dofs(tet);
  double s = 0.0;
  for (int i = 0; i < b.count; ++i) s += coeffs[d[i]] * b.value[i];
  return s;
}

Vec3 DiscreteLevelSet::grad(int tet, const Vec3& ref) const {
  BasisEval b = eval_basis(*space, tet, ref);
  auto& d = space->tet_dofs(tet);
  Vec3 g = Vec3::Zero();
  for (int i = 0; i < b.count; ++i) g += coeffs[d[i]] * b.grad[i];
  return g;
}

DiscreteLevelSet interpolate_levelset(const AnalyticSurface& surface,
                                      std::shared_ptr<const FeSpace> space) {
  DiscreteLevelSet phi;
  phi.coeffs = nodal_interpolate(*space,
                                 [&](const Vec3& x) { return surface.phi(x); });
  phi.space = std::move(space);
  return phi;
}

double CutTopology::max_active_diameter(const TetMesh& mesh) const {
  double h = 0.0;
  for (int t : active_tets) h = std::max(h, mesh.tet_diameter(t));
  return h;
}

namespace {

constexpr double kSnapRel = 1e-12;
constexpr double kAreaDropRel = 1e-14;

struct CutPoint {
  Vec3 x;
  Vec3 ref;
};

CutPoint edge_cut(const TetMesh& mesh, const std::array<int, 4>& tv,
                  const double* ph, int a, int b) {
  // ph values are clamped so ph[a] >= 0 > ph[b] (a positive side)
  double t = ph[a] / (ph[a] - ph[b]);
  static const Vec3 ref_corner[4] = {
      {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CutPoint p;
  p.x = mesh.vertices[tv[a]] + t * (mesh.vertices[tv[b]] - mesh.vertices[tv[a]]);
  p.ref = ref_corner[a] + t * (ref_corner[b] - ref_corner[a]);
  return p;
}

void push_tri(std::vector<SurfaceTri>& tris, int tet, const CutPoint& p0,
              const CutPoint& p1, const CutPoint& p2, const Vec3& gphi,
              double hT) {
  Vec3 n = (p1.x - p0.x).cross(p2.x - p0.x);
  double a2 = n.norm();
  if (0.5 * a2 <= kAreaDropRel * hT * hT) return;
  SurfaceTri tri;
  tri.tet = tet;
  tri.x = {p0.x, p1.x, p2.x};
  tri.ref = {p0.ref, p1.ref, p2.ref};
  tri.area = 0.5 * a2;
  n /= a2;
  if (n.dot(gphi) < 0.0) n = -n;
  tri.normal = n;
  tris.push_back(tri);
}

}  // namespace

CutTopology extract_cut_topology(const DiscreteLevelSet& phi,
                                 const TetMesh& mesh) {
  if (&phi.space->mesh() != &mesh)
    throw std::invalid_argument("extract_cut_topology: mesh mismatch");

  // per-vertex snap tolerance: 1e-12 * max adjacent tet diameter, so the
  // sign classification of a vertex agrees across all tets containing it
  std::vector<double> vtol(mesh.n_vertices(), 0.0);
  for (int t = 0; t < mesh.n_tets(); ++t) {
    double d = kSnapRel * mesh.tet_diameter(t);
    for (int v : mesh.tets[t]) vtol[v] = std::max(vtol[v], d);
  }
  // snapped sign (true = negative) and clamped values for interpolation
  std::vector<char> neg(mesh.n_vertices());
  std::vector<double> pclamp(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    double p = phi.vertex_value(v);
    neg[v] = p < -vtol[v];
    pclamp[v] = neg[v] ? p : std::max(p, 0.0);
  }

  CutTopology cut;
  cut.tet_to_active.assign(mesh.n_tets(), -1);

  for (int t = 0; t < mesh.n_tets(); ++t) {
    auto& tv = mesh.tets[t];
    int nn = 0;
    for (int i = 0; i < 4; ++i) nn += neg[tv[i]];
    if (nn == 0 || nn == 4) continue;

    double ph[4];
    for (int i = 0; i < 4; ++i) ph[i] = pclamp[tv[i]];
    double hT = mesh.tet_diameter(t);

    // gradient of the P1 reduction, for normal orientation
    TetMap map = tet_map(mesh, t);
    Vec3 gref(ph[1] - ph[0], ph[2] - ph[0], ph[3] - ph[0]);
    Vec3 gphi = map.Binv.transpose() * gref;

    std::size_t before = cut.tris.size();
    if (nn == 1 || nn == 3) {
      int lone = -1;
      for (int i = 0; i < 4; ++i)
        if ((neg[tv[i]] != 0) == (nn == 1)) lone = i;
      int other[3];
      int c = 0;
      for (int i = 0; i < 4; ++i)
        if (i != lone) other[c++] = i;
      CutPoint p[3];
      for (int i = 0; i < 3; ++i)
        p[i] = (nn == 1) ? edge_cut(mesh, tv, ph, other[i], lone)
                         : edge_cut(mesh, tv, ph, lone, other[i]);
      push_tri(cut.tris, t, p[0], p[1], p[2], gphi, hT);
    } else {  // 2/2: quad, split along the shorter diagonal
      int negs[2], poss[2];
      int cn = 0, cp = 0;
      for (int i = 0; i < 4; ++i)
        (neg[tv[i]] ? negs[cn++] : poss[cp++]) = i;
      CutPoint pac = edge_cut(mesh, tv, ph, poss[0], negs[0]);
      CutPoint pad = edge_cut(mesh, tv, ph, poss[1], negs[0]);
      CutPoint pbd = edge_cut(mesh, tv, ph, poss[1], negs[1]);
      CutPoint pbc = edge_cut(mesh, tv, ph, poss[0], negs[1]);
      // cycle pac -> pad -> pbd -> pbc; diagonals (pac,pbd), (pad,pbc)
      double d1 = (pac.x - pbd.x).squaredNorm();
      double d2 = (pad.x - pbc.x).squaredNorm();
      if (d1 <= d2) {
        push_tri(cut.tris, t, pac, pad, pbd, gphi, hT);
        push_tri(cut.tris, t, pac, pbd, pbc, gphi, hT);
      } else {
        push_tri(cut.tris, t, pac, pad, pbc, gphi, hT);
        push_tri(cut.tris, t, pad, pbd, pbc, gphi, hT);
      }
    }
    if (cut.tris.size() > before) {
      cut.tet_to_active[t] = static_cast<int>(cut.active_tets.size());
      cut.active_tets.push_back(t);
      cut.tet_tri_range.emplace_back(static_cast<int>(before),
                                     static_cast<int>(cut.tris.size()));
    }
  }

  if (cut.active_tets.empty())
    throw std::runtime_error(
        "extract_cut_topology: level set does not cut the mesh");

  // interior faces of the active set
  struct FaceEntry {
    std::array<int, 3> v;
    int tet;
  };
  std::vector<FaceEntry> fe;
  fe.reserve(cut.active_tets.size() * 4);
  for (int t : cut.active_tets) {
    auto& v = mesh.tets[t];
    for (int f = 0; f < 4; ++f) {
      std::array<int, 3> fv;
      int c = 0;
      for (int i = 0; i < 4; ++i)
        if (i != f) fv[c++] = v[i];
      std::sort(fv.begin(), fv.end());
      fe.push_back({fv, t});
    }
  }
  std::sort(fe.begin(), fe.end(), [](const FaceEntry& a, const FaceEntry& b) {
    if (a.v != b.v) return a.v < b.v;
    return a.tet < b.tet;
  });
  for (std::size_t i = 0; i + 1 < fe.size(); ++i)
    if (fe[i].v == fe[i + 1].v)
      cut.interior_faces.push_back({fe[i].v, fe[i].tet, fe[i + 1].tet});

  return cut;
}

}  // namespace tracefem
