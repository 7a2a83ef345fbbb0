// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include "tracefem/isomap.hpp"

#include <cmath>
#include <stdexcept>

#include "tracefem/quadrature.hpp"

namespace tracefem {

DhResult compute_dh(const DiscreteLevelSet& phi, int tet, const Vec3& x_phys) {
  const TetMesh& mesh = phi.space->mesh();
  TetMap map = tet_map(mesh, tet);
  Vec3 ref0 = map.Binv * (x_phys - map.v0);
  Vec3 G = phi.grad(tet, ref0);
  Vec3 rG = map.Binv * G;

  auto& tv = mesh.tets[tet];
  double l0 = 1.0 - ref0[0] - ref0[1] - ref0[2];
  double philin = l0 * phi.vertex_value(tv[0]) +
                  ref0[0] * phi.vertex_value(tv[1]) +
                  ref0[1] * phi.vertex_value(tv[2]) +
                  ref0[2] * phi.vertex_value(tv[3]);

  auto g = [&](double s) { return phi.eval(tet, ref0 + s * rG) - philin; };
  auto gprime = [&](double s) { return G.dot(phi.grad(tet, ref0 + s * rG)); };

  const double hT = mesh.tet_diameter(tet);
  const double tol = 1e-12 * std::max(phi.max_abs_coeff(), 1e-300);

  DhResult res;
  double g0 = g(0.0);
  if (std::abs(g0) <= tol) {
    res.d = 0.0;
    res.ok = true;
    return res;
  }

  // bracket scan, nearest-|s| intervals first
  const int M = 32;
  const double step = hT / M;
  double lo = 0.0, hi = 0.0, glo = 0.0;
  bool found = false;
  double gpos = g0, gneg = g0;  // values at the current +/- frontier
  for (int j = 1; j <= M && !found; ++j) {
    double sp = j * step;
    double gp = g(sp);
    if (gpos * gp <= 0.0) {
      lo = (j - 1) * step;
      hi = sp;
      glo = gpos;
      found = true;
      break;
    }
    gpos = gp;
    double sn = -j * step;
    double gn = g(sn);
    if (gneg * gn <= 0.0) {
      lo = sn;
      hi = -(j - 1) * step;
      glo = gn;
      found = true;
      break;
    }
    gneg = gn;
  }
  if (!found) return res;  // ok == false

  // bisection to a narrow bracket, then safeguarded Newton
  while (hi - lo > 1e-3 * hT) {
    double mid = 0.5 * (lo + hi);
    double gm = g(mid);
    if (std::abs(gm) <= tol) {
      res.d = mid;
      res.ok = true;
      return res;
    }
    if (glo * gm <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
      glo = gm;
    }
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    double gs = g(s);
    if (std::abs(gs) <= tol) break;
    if (glo * gs <= 0.0) {
      hi = s;
    } else {
      lo = s;
      glo = gs;
    }
    double dg = gprime(s);
    double ns = (dg != 0.0) ? s - gs / dg : 0.5 * (lo + hi);
    if (!(ns > lo && ns < hi)) ns = 0.5 * (lo + hi);
    s = ns;
  }
  res.d = s;
  res.ok = true;
  return res;
}

Vec3 IsoMap::map_point(int tet, const Vec3& ref) const {
  TetMap tm = tet_map(space->mesh(), tet);
  Vec3 x = tm.v0 + tm.B * ref;
  if (identity) return x;
  BasisEval b = eval_basis(*space, tet, ref);
  auto& d = space->tet_dofs(tet);
  for (int i = 0; i < b.count; ++i) x += displacement[d[i]] * b.value[i];
  return x;
}

Mat3 IsoMap::jacobian(int tet, const Vec3& ref) const {
  Mat3 J = Mat3::Identity();
  if (identity) return J;
  BasisEval b = eval_basis(*space, tet, ref);
  auto& d = space->tet_dofs(tet);
  for (int i = 0; i < b.count; ++i)
    J += displacement[d[i]] * b.grad[i].transpose();
  return J;
}

IsoMap build_isomap(const DiscreteLevelSet& phi, const CutTopology& cut) {
  IsoMap iso;
  iso.space = phi.space;
  iso.displacement.assign(phi.space->n_dofs(), Vec3::Zero());
  if (phi.degree() == 1) {
    iso.identity = true;
    return iso;
  }
  iso.identity = false;

  const FeSpace& space = *phi.space;
  const TetMesh& mesh = space.mesh();
  std::vector<Vec3> nodes = space.local_node_ref();

  std::vector<Vec3> sum(space.n_dofs(), Vec3::Zero());
  std::vector<int> cnt(space.n_dofs(), 0);
  for (int t : cut.active_tets) {
    TetMap tm = tet_map(mesh, t);
    auto& dofs = space.tet_dofs(t);
    for (int i = 0; i < space.dofs_per_tet(); ++i) {
      Vec3 x = tm.v0 + tm.B * nodes[i];
      DhResult dh = compute_dh(phi, t, x);
      if (!dh.ok)
        throw std::runtime_error(
            "build_isomap: displacement search failed in tet " +
            std::to_string(t) + " (mesh too coarse for this level set)");
      Vec3 G = phi.grad(t, nodes[i]);
      sum[dofs[i]] += dh.d * G;
      cnt[dofs[i]] += 1;
    }
  }
  for (int i = 0; i < space.n_dofs(); ++i)
    if (cnt[i] > 0) iso.displacement[i] = sum[i] / cnt[i];

  // sanity of the map on the cut triangles
  const QuadRule& rule = get_rule(RefCell::triangle, 2);
  for (auto& tri : cut.tris) {
    double hT = mesh.tet_diameter(tri.tet);
    for (int q = 0; q < rule.size(); ++q) {
      double u = rule.points[q][0], v = rule.points[q][1];
      Vec3 ref = tri.ref[0] + u * (tri.ref[1] - tri.ref[0]) +
                 v * (tri.ref[2] - tri.ref[0]);
      Mat3 J = iso.jacobian(tri.tet, ref);
      double det = J.determinant();
      TetMap tm = tet_map(mesh, tri.tet);
      Vec3 x = tm.v0 + tm.B * ref;
      double disp = (iso.map_point(tri.tet, ref) - x).norm();
      if (det < 0.5 || det > 2.0 || disp > 0.5 * hT)
        throw std::runtime_error(
            "build_isomap: map out of bounds in tet " + std::to_string(tri.tet) +
            " (mesh too coarse for this level set)");
    }
  }
  return iso;
}

void surface_qps_for_tri(const SurfaceTri& tri, const IsoMap* map, int degree,
                         std::vector<SurfQP>& out) {
  const QuadRule& rule = get_rule(RefCell::triangle, degree);
  const bool mapped = map != nullptr && !map->identity;
  for (int q = 0; q < rule.size(); ++q) {
    double u = rule.points[q][0], v = rule.points[q][1];
    SurfQP qp;
    qp.tet = tri.tet;
    qp.ref = tri.ref[0] + u * (tri.ref[1] - tri.ref[0]) +
             v * (tri.ref[2] - tri.ref[0]);
    double w = 2.0 * tri.area * rule.weights[q];
    if (!mapped) {
      qp.x = tri.x[0] + u * (tri.x[1] - tri.x[0]) + v * (tri.x[2] - tri.x[0]);
      qp.w = w;
      qp.normal = tri.normal;
      qp.grad_transform = Mat3::Identity();
    } else {
      qp.x = map->map_point(tri.tet, qp.ref);
      Mat3 J = map->jacobian(tri.tet, qp.ref);
      Mat3 JinvT = J.inverse().transpose();
      Vec3 N = JinvT * tri.normal;
      double nrm = N.norm();
      qp.w = w * std::abs(J.determinant()) * nrm;
      qp.normal = N / nrm;
      qp.grad_transform = JinvT;
    }
    out.push_back(qp);
  }
}

void for_each_surface_qp(const CutTopology& cut, const TetMesh& mesh,
                         const IsoMap* map, int degree,
                         const std::function<void(const SurfQP&)>& fn) {
  (void)mesh;  // the cut triangles carry all geometry
  std::vector<SurfQP> buf;
  for (auto& tri : cut.tris) {
    buf.clear();
    surface_qps_for_tri(tri, map, degree, buf);
    for (auto& qp : buf) fn(qp);
  }
}

void for_each_band_qp(const CutTopology& cut, const TetMesh& mesh,
                      const IsoMap* map, int degree,
                      const std::function<void(const VolQP&)>& fn) {
  const QuadRule& rule = get_rule(RefCell::tetrahedron, degree);
  const bool mapped = map != nullptr && !map->identity;
  for (int t : cut.active_tets) {
    TetMap tm = tet_map(mesh, t);
    double scale = std::abs(tm.detB);
    for (int q = 0; q < rule.size(); ++q) {
      VolQP qp;
      qp.tet = t;
      qp.ref = rule.points[q];
      if (!mapped) {
        qp.x = tm.v0 + tm.B * qp.ref;
        qp.w = scale * rule.weights[q];
        qp.grad_transform = Mat3::Identity();
      } else {
        qp.x = map->map_point(t, qp.ref);
        Mat3 J = map->jacobian(t, qp.ref);
        qp.w = scale * rule.weights[q] * std::abs(J.determinant());
        qp.grad_transform = J.inverse().transpose();
      }
      fn(qp);
    }
  }
}

std::pair<double, double> geometry_distance(const AnalyticSurface& surface,
                                            const CutTopology& cut,
                                            const TetMesh& mesh,
                                            const IsoMap* map, int degree) {
  double dmax = 0.0, dsum = 0.0, wsum = 0.0;
  for_each_surface_qp(cut, mesh, map, degree, [&](const SurfQP& qp) {
    double d = (qp.x - surface.closest_point(qp.x)).norm();
    dmax = std::max(dmax, d);
    dsum += qp.w * d;
    wsum += qp.w;
  });
  return {dmax, dsum / wsum};
}

}  // namespace tracefem
