// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include "tracefem/estimator.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "tracefem/levelset.hpp"
#include "tracefem/quadrature.hpp"
#include "tracefem/solver.hpp"
#include "tracefem/vtk_io.hpp"

namespace tracefem {

namespace {

struct TriEdge {
  Vec3 a, b;      // physical endpoints
  Vec3 mid;
  int tri;        // index into cut.tris
  int faces;      // bitmask of tet faces containing the edge; 0 = interior
};

// barycentric coordinates of a reference point
void barycentric(const Vec3& ref, double* l) {
  l[0] = 1.0 - ref[0] - ref[1] - ref[2];
  l[1] = ref[0];
  l[2] = ref[1];
  l[3] = ref[2];
}

bool same_edge(const TriEdge& e, const TriEdge& f, double tol) {
  if ((e.mid - f.mid).squaredNorm() > tol * tol) return false;
  return ((e.a - f.a).norm() <= tol && (e.b - f.b).norm() <= tol) ||
         ((e.a - f.b).norm() <= tol && (e.b - f.a).norm() <= tol);
}

// outward co-normal of an edge within the plane of its triangle
Vec3 co_normal(const SurfaceTri& tri, const Vec3& a, const Vec3& b) {
  Vec3 e = (b - a).normalized();
  Vec3 mu = tri.normal.cross(e);
  Vec3 centroid = (tri.x[0] + tri.x[1] + tri.x[2]) / 3.0;
  if (mu.dot(centroid - 0.5 * (a + b)) > 0.0) mu = -mu;
  return mu;
}

}  // namespace

IndicatorField compute_indicators(const Eigen::VectorXd& u_active,
                                  const ActiveDofMap& dofs,
                                  const AssemblyContext& ctx,
                                  const ProblemSpec& prob) {
  if (ctx.map != nullptr && !ctx.map->identity)
    throw std::invalid_argument("compute_indicators: identity geometry only");
  const TetMesh& mesh = *ctx.mesh;
  const FeSpace& space = *ctx.space;
  const CutTopology& cut = *ctx.cut;
  int nd = space.dofs_per_tet();

  IndicatorField ind;
  ind.active_tets = cut.active_tets;
  int na = cut.n_active();
  ind.eta_r2.assign(na, 0.0);
  ind.eta_e2.assign(na, 0.0);
  ind.eta2.assign(na, 0.0);

  // ---- interior residual
  int vdeg = std::max(4, 2 * space.degree());
  std::vector<SurfQP> qps;
  for (int a = 0; a < na; ++a) {
    int t = cut.active_tets[a];
    auto& gd = space.tet_dofs(t);
    double coeff[10];
    for (int i = 0; i < nd; ++i)
      coeff[i] = u_active[dofs.global_to_active[gd[i]]];
    double hT = mesh.tet_diameter(t);
    auto hess = basis_hessians(space, t);
    double acc = 0.0;
    qps.clear();
    for (int ti = cut.tet_tri_range[a].first; ti < cut.tet_tri_range[a].second;
         ++ti)
      surface_qps_for_tri(cut.tris[ti], nullptr, vdeg, qps);
    for (auto& qp : qps) {
      BasisEval b = eval_basis(space, t, qp.ref);
      double uh = 0.0, lap = 0.0;
      Vec3 gh = Vec3::Zero();
      for (int i = 0; i < nd; ++i) {
        uh += coeff[i] * b.value[i];
        gh += coeff[i] * b.grad[i];
        lap += coeff[i] * (hess[i].trace() - qp.normal.dot(hess[i] * qp.normal));
      }
      gh -= qp.normal.dot(gh) * qp.normal;
      double conv = 0.0, divw = 0.0;
      if (prob.has_convection) {
        conv = prob.convection(qp.x).dot(gh);
        divw = prob.div_convection(qp.x);
      }
      double r = prob.forcing(qp.x) + prob.eps * lap -
                 (prob.reaction(qp.x) + divw) * uh - conv;
      acc += qp.w * r * r;
    }
    ind.eta_r2[a] = hT * hT * acc;
  }

  // ---- edge jumps
  // collect the boundary edges of every active tet's triangles
  std::vector<std::vector<TriEdge>> edges(na);
  for (int a = 0; a < na; ++a) {
    for (int ti = cut.tet_tri_range[a].first; ti < cut.tet_tri_range[a].second;
         ++ti) {
      const SurfaceTri& tri = cut.tris[ti];
      for (int e = 0; e < 3; ++e) {
        const Vec3& ra = tri.ref[e];
        const Vec3& rb = tri.ref[(e + 1) % 3];
        double la[4], lb[4];
        barycentric(ra, la);
        barycentric(rb, lb);
        int faces = 0;
        for (int f = 0; f < 4; ++f)
          if (std::abs(la[f]) < 1e-9 && std::abs(lb[f]) < 1e-9)
            faces |= (1 << f);
        if (faces == 0) continue;  // quad diagonal, no jump
        TriEdge te;
        te.a = tri.x[e];
        te.b = tri.x[(e + 1) % 3];
        te.mid = 0.5 * (te.a + te.b);
        te.tri = ti;
        te.faces = faces;
        edges[a].push_back(te);
      }
    }
  }

  VertexTetAdjacency v2t = vertex_to_tets(mesh);
  auto neighbors = tet_neighbors(mesh);
  QuadRule1d edge_rule = gauss_legendre_01(2);

  // Boundary faces of the background mesh, for classifying unmatched edges.
  // An open surface can end on the domain boundary without any face of the
  // owning tet lying in the boundary: when the cut coincides with an interior
  // lattice face, a surface edge may run along a wall that only touches the
  // tet in that edge.
  std::vector<std::array<Vec3, 3>> bfaces;
  for (const MeshFace& f : face_adjacency(mesh)) {
    if (f.t1 >= 0) continue;
    bfaces.push_back(
        {mesh.vertices[f.v[0]], mesh.vertices[f.v[1]], mesh.vertices[f.v[2]]});
  }
  auto in_face = [](const Vec3& p, const std::array<Vec3, 3>& fv) {
    Vec3 e1 = fv[1] - fv[0], e2 = fv[2] - fv[0], d = p - fv[0];
    Vec3 nrm = e1.cross(e2);
    double n2 = nrm.squaredNorm();
    if (n2 <= 0.0) return false;
    double scale =
        1.0 + std::sqrt(std::max(e1.squaredNorm(), e2.squaredNorm()));
    if (std::abs(d.dot(nrm)) > 1e-9 * scale * std::sqrt(n2)) return false;
    double a11 = e1.dot(e1), a12 = e1.dot(e2), a22 = e2.dot(e2);
    double det = a11 * a22 - a12 * a12;
    double l1 = (a22 * d.dot(e1) - a12 * d.dot(e2)) / det;
    double l2 = (a11 * d.dot(e2) - a12 * d.dot(e1)) / det;
    return l1 >= -1e-8 && l2 >= -1e-8 && l1 + l2 <= 1.0 + 1e-8;
  };
  auto edge_on_mesh_boundary = [&](const TriEdge& te) {
    for (const auto& fv : bfaces)
      if (in_face(te.a, fv) && in_face(te.b, fv)) return true;
    return false;
  };

  auto grad_at = [&](int tet, const Vec3& x, const double* coeff, int n,
                     const Vec3& ntri) {
    TetMap tm = tet_map(mesh, tet);
    Vec3 ref = tm.Binv * (x - tm.v0);
    BasisEval b = eval_basis(space, tet, ref);
    Vec3 g = Vec3::Zero();
    for (int i = 0; i < n; ++i) g += coeff[i] * b.grad[i];
    return Vec3(g - ntri.dot(g) * ntri);
  };

  for (int a = 0; a < na; ++a) {
    int t = cut.active_tets[a];
    double hT = mesh.tet_diameter(t);
    double tol = 1e-10 * (1.0 + mesh.vertices[mesh.tets[t][0]].norm());

    // active candidate tets sharing a vertex with t
    std::vector<int> cand;
    for (int v : mesh.tets[t])
      for (int o = v2t.offsets[v]; o < v2t.offsets[v + 1]; ++o) {
        int tt = v2t.items[o];
        if (tt != t && cut.tet_to_active[tt] >= 0)
          cand.push_back(cut.tet_to_active[tt]);
      }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    auto& gd = space.tet_dofs(t);
    double coeff[10];
    for (int i = 0; i < nd; ++i)
      coeff[i] = u_active[dofs.global_to_active[gd[i]]];

    for (auto& te : edges[a]) {
      int match_a = -1;
      const TriEdge* match_e = nullptr;
      for (int ca : cand) {
        for (auto& oe : edges[ca])
          if (same_edge(te, oe, tol)) {
            match_a = ca;
            match_e = &oe;
            break;
          }
        if (match_a >= 0) break;
      }
      if (match_a < 0) {
        bool on_boundary = false;
        for (int f = 0; f < 4; ++f)
          if ((te.faces & (1 << f)) && neighbors[t][f] < 0) on_boundary = true;
        if (!on_boundary) on_boundary = edge_on_mesh_boundary(te);
        if (on_boundary) continue;  // open surface ends on the mesh boundary
        throw std::runtime_error(
            "compute_indicators: unmatched surface edge inside the mesh "
            "(surface topology broken)");
      }

      int t2 = cut.active_tets[match_a];
      auto& gd2 = space.tet_dofs(t2);
      double coeff2[10];
      for (int i = 0; i < nd; ++i)
        coeff2[i] = u_active[dofs.global_to_active[gd2[i]]];

      const SurfaceTri& tri1 = cut.tris[te.tri];
      const SurfaceTri& tri2 = cut.tris[match_e->tri];
      Vec3 m1 = co_normal(tri1, te.a, te.b);
      Vec3 m2 = co_normal(tri2, te.a, te.b);
      Vec3 mj = m1 + m2;

      double len = (te.b - te.a).norm();
      double grad2 = 0.0, conv2 = 0.0;
      for (std::size_t q = 0; q < edge_rule.points.size(); ++q) {
        Vec3 x = te.a + edge_rule.points[q] * (te.b - te.a);
        Vec3 g1 = grad_at(t, x, coeff, nd, tri1.normal);
        Vec3 g2 = grad_at(t2, x, coeff2, nd, tri2.normal);
        double wq = edge_rule.weights[q] * len;
        grad2 += wq * (prob.eps * (g1 - g2)).squaredNorm();
        if (prob.has_convection) {
          double wm = prob.convection(x).dot(mj);
          conv2 += wq * wm * wm;
        }
      }
      ind.eta_e2[a] += hT * (grad2 + conv2);
    }
  }

  double sum = 0.0;
  for (int a = 0; a < na; ++a) {
    ind.eta2[a] = ind.eta_r2[a] + ind.eta_e2[a];
    sum += ind.eta2[a];
  }
  ind.eta_global = std::sqrt(sum);
  return ind;
}

std::vector<int> mark_dorfler(const IndicatorField& ind, double theta) {
  if (!(theta > 0.0) || theta > 1.0)
    throw std::invalid_argument("mark_dorfler: theta must be in (0, 1]");
  int na = static_cast<int>(ind.active_tets.size());
  std::vector<int> order(na);
  for (int i = 0; i < na; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    if (ind.eta2[x] != ind.eta2[y]) return ind.eta2[x] > ind.eta2[y];
    return ind.active_tets[x] < ind.active_tets[y];
  });
  double target = theta * ind.eta_global * ind.eta_global;
  std::vector<int> marked;
  double acc = 0.0;
  for (int i : order) {
    if (acc >= target && !marked.empty()) break;
    marked.push_back(ind.active_tets[i]);
    acc += ind.eta2[i];
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

AdaptiveResult adaptive_loop(const ProblemSpec& prob, const AdaptOptions& opt) {
  using clock = std::chrono::steady_clock;
  AdaptiveResult result;
  TetMesh mesh = build_box_mesh(opt.box_lo, opt.box_hi, opt.n0);

  for (int step = 0; step < opt.max_steps; ++step) {
    auto space = std::make_shared<FeSpace>(mesh, opt.m);
    auto phi_space =
        opt.k == opt.m ? space : std::make_shared<FeSpace>(mesh, opt.k);
    DiscreteLevelSet phi = interpolate_levelset(*prob.surface, phi_space);
    CutTopology cut = extract_cut_topology(phi, mesh);
    IsoMap map = build_isomap(phi, cut);

    AssemblyContext ctx;
    ctx.mesh = &mesh;
    ctx.space = space.get();
    ctx.cut = &cut;
    ctx.map = map.identity ? nullptr : &map;
    ctx.phi = &phi;

    auto t0 = clock::now();
    TraceSystem sys = assemble_lb(ctx, prob);
    SpMat S = assemble_stabilization(ctx, opt.stab, opt.rho_s);
    SpMat A = sys.A + S;
    auto t1 = clock::now();
    SolveReport sol = solve_cg(A, sys.rhs, opt.solver_tol);
    auto t2 = clock::now();
    if (!sol.converged)
      throw std::runtime_error("adaptive_loop: CG did not converge");

    auto [l2, h1] = surface_errors(sol.x, sys.dofs, ctx, prob);
    IndicatorField ind = compute_indicators(sol.x, sys.dofs, ctx, prob);

    AdaptiveStep rec;
    rec.record.level = step;
    rec.record.h = cut.max_active_diameter(mesh);
    rec.record.n_active = sys.dofs.n_active;
    rec.record.err_l2 = l2;
    rec.record.err_h1 = h1;
    rec.record.asm_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    rec.record.solve_ms =
        std::chrono::duration<double, std::milli>(t2 - t1).count();
    rec.eta_global = ind.eta_global;
    rec.n_tets = mesh.n_tets();

    bool stop = sys.dofs.n_active >= opt.dof_budget ||
                step == opt.max_steps - 1 || ind.eta_global == 0.0;
    if (sys.dofs.n_active >= opt.dof_budget) result.budget_reached = true;

    if (!stop) {
      std::vector<int> marked = mark_dorfler(ind, opt.theta);
      rec.n_marked = static_cast<int>(marked.size());
      if (!opt.out_dir.empty()) {
        std::vector<double> eta_tri;
        for (std::size_t ti = 0; ti < cut.tris.size(); ++ti)
          eta_tri.push_back(
              std::sqrt(ind.eta2[cut.tet_to_active[cut.tris[ti].tet]]));
        write_vtk_surface(opt.out_dir + "/level_" + std::to_string(step) +
                              ".vtk",
                          cut, {{"eta", eta_tri}});
      }
      result.steps.push_back(rec);
      mesh = bisect_refine(mesh, marked);
    } else {
      result.steps.push_back(rec);
      break;
    }
  }
  return result;
}

}  // namespace tracefem
