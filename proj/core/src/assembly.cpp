// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include "tracefem/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "tracefem/quadrature.hpp"

namespace tracefem {

StabKind stab_from_string(const std::string& s) {
  if (s == "none") return StabKind::none;
  if (s == "ghost") return StabKind::ghost;
  if (s == "full_grad_surface") return StabKind::full_grad_surface;
  if (s == "full_grad_volume") return StabKind::full_grad_volume;
  if (s == "normal_volume") return StabKind::normal_volume;
  throw std::invalid_argument(
      "unknown stabilization '" + s +
      "' (valid: none, ghost, full_grad_surface, full_grad_volume, "
      "normal_volume)");
}

std::string to_string(StabKind kind) {
  switch (kind) {
    case StabKind::none: return "none";
    case StabKind::ghost: return "ghost";
    case StabKind::full_grad_surface: return "full_grad_surface";
    case StabKind::full_grad_volume: return "full_grad_volume";
    case StabKind::normal_volume: return "normal_volume";
  }
  return "none";
}

double default_rho(StabKind kind, double h) {
  switch (kind) {
    case StabKind::full_grad_volume: return h;
    default: return 1.0;
  }
}

int AssemblyContext::default_degree() const {
  int m = space->degree();
  int k = (map != nullptr && !map->identity) ? map->space->degree() : 1;
  return 2 * m + 2 * (k - 1);
}

namespace {

void check_ctx(const AssemblyContext& ctx) {
  if (!ctx.mesh || !ctx.space || !ctx.cut)
    throw std::invalid_argument("assembly: incomplete context");
}

using Trip = Eigen::Triplet<double>;

SpMat from_triplets(int n, std::vector<Trip>& trips) {
  SpMat A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

void scatter(const AssemblyContext& ctx, const ActiveDofMap& dofs, int tet,
             const Eigen::Matrix<double, 10, 10>& local, int nd,
             std::vector<Trip>& trips) {
  auto& gd = ctx.space->tet_dofs(tet);
  for (int i = 0; i < nd; ++i) {
    int ai = dofs.global_to_active[gd[i]];
    for (int j = 0; j < nd; ++j) {
      double v = local(i, j);
      if (v != 0.0) trips.emplace_back(ai, dofs.global_to_active[gd[j]], v);
    }
  }
}

}  // namespace

TraceSystem assemble_lb(const AssemblyContext& ctx, const ProblemSpec& prob,
                        int quad_degree) {
  check_ctx(ctx);
  int deg = quad_degree < 0 ? ctx.default_degree() : quad_degree;
  const CutTopology& cut = *ctx.cut;
  const FeSpace& space = *ctx.space;
  int nd = space.dofs_per_tet();

  TraceSystem sys;
  sys.dofs = make_active_dof_map(space, cut.active_tets);
  sys.form = "laplace_beltrami";
  sys.symmetric = true;
  sys.rhs = Eigen::VectorXd::Zero(sys.dofs.n_active);

  std::vector<Trip> trips;
  trips.reserve(cut.active_tets.size() * nd * nd);
  std::vector<SurfQP> qps;
  Eigen::Matrix<double, 10, 10> local;
  Vec3 tg[10];

  for (int a = 0; a < cut.n_active(); ++a) {
    int t = cut.active_tets[a];
    local.setZero();
    Eigen::Matrix<double, 10, 1> lrhs = Eigen::Matrix<double, 10, 1>::Zero();
    qps.clear();
    for (int ti = cut.tet_tri_range[a].first; ti < cut.tet_tri_range[a].second;
         ++ti)
      surface_qps_for_tri(cut.tris[ti], ctx.map, deg, qps);
    for (auto& qp : qps) {
      BasisEval b = eval_basis(space, t, qp.ref);
      for (int i = 0; i < nd; ++i) {
        Vec3 g = qp.grad_transform * b.grad[i];
        tg[i] = g - qp.normal.dot(g) * qp.normal;
      }
      double c = prob.reaction(qp.x);
      double f = prob.forcing(qp.x);
      for (int i = 0; i < nd; ++i) {
        lrhs[i] += qp.w * f * b.value[i];
        for (int j = 0; j < nd; ++j)
          local(i, j) +=
              qp.w * (prob.eps * tg[i].dot(tg[j]) + c * b.value[i] * b.value[j]);
      }
    }
    scatter(ctx, sys.dofs, t, local, nd, trips);
    auto& gd = space.tet_dofs(t);
    for (int i = 0; i < nd; ++i)
      sys.rhs[sys.dofs.global_to_active[gd[i]]] += lrhs[i];
  }
  sys.A = from_triplets(sys.dofs.n_active, trips);
  return sys;
}

SpMat assemble_surface_mass(const AssemblyContext& ctx, int quad_degree) {
  check_ctx(ctx);
  int deg = quad_degree < 0 ? ctx.default_degree() : quad_degree;
  const CutTopology& cut = *ctx.cut;
  const FeSpace& space = *ctx.space;
  int nd = space.dofs_per_tet();
  ActiveDofMap dofs = make_active_dof_map(space, cut.active_tets);

  std::vector<Trip> trips;
  std::vector<SurfQP> qps;
  Eigen::Matrix<double, 10, 10> local;
  for (int a = 0; a < cut.n_active(); ++a) {
    int t = cut.active_tets[a];
    local.setZero();
    qps.clear();
    for (int ti = cut.tet_tri_range[a].first; ti < cut.tet_tri_range[a].second;
         ++ti)
      surface_qps_for_tri(cut.tris[ti], ctx.map, deg, qps);
    for (auto& qp : qps) {
      BasisEval b = eval_basis(space, t, qp.ref);
      for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j)
          local(i, j) += qp.w * b.value[i] * b.value[j];
    }
    scatter(ctx, dofs, t, local, nd, trips);
  }
  return from_triplets(dofs.n_active, trips);
}

SpMat assemble_band_mass(const AssemblyContext& ctx) {
  check_ctx(ctx);
  const CutTopology& cut = *ctx.cut;
  const FeSpace& space = *ctx.space;
  int nd = space.dofs_per_tet();
  ActiveDofMap dofs = make_active_dof_map(space, cut.active_tets);

  std::vector<Trip> trips;
  Eigen::Matrix<double, 10, 10> local;
  int cur = -1;
  for_each_band_qp(cut, *ctx.mesh, ctx.map, 2 * space.degree(),
                   [&](const VolQP& qp) {
                     if (qp.tet != cur) {
                       if (cur >= 0) scatter(ctx, dofs, cur, local, nd, trips);
                       cur = qp.tet;
                       local.setZero();
                     }
                     BasisEval b = eval_basis(space, qp.tet, qp.ref);
                     for (int i = 0; i < nd; ++i)
                       for (int j = 0; j < nd; ++j)
                         local(i, j) += qp.w * b.value[i] * b.value[j];
                   });
  if (cur >= 0) scatter(ctx, dofs, cur, local, nd, trips);
  return from_triplets(dofs.n_active, trips);
}

namespace {

SpMat assemble_ghost(const AssemblyContext& ctx, double rho) {
  const CutTopology& cut = *ctx.cut;
  const FeSpace& space = *ctx.space;
  const TetMesh& mesh = *ctx.mesh;
  int nd = space.dofs_per_tet();
  ActiveDofMap dofs = make_active_dof_map(space, cut.active_tets);

  int deg = std::max(0, 2 * (space.degree() - 1));
  const QuadRule& rule = get_rule(RefCell::triangle, deg);

  std::vector<Trip> trips;
  for (auto& face : cut.interior_faces) {
    const Vec3& p0 = mesh.vertices[face.v[0]];
    const Vec3& p1 = mesh.vertices[face.v[1]];
    const Vec3& p2 = mesh.vertices[face.v[2]];
    Vec3 nf = (p1 - p0).cross(p2 - p0);
    double area2 = nf.norm();
    nf /= area2;

    // union of the two tets' dofs with signed jump coefficients
    int gdof[20];
    int nu = 0;
    auto side = [&](int tet, double sign, const Vec3& x, double* coeff) {
      TetMap tm = tet_map(mesh, tet);
      Vec3 ref = tm.Binv * (x - tm.v0);
      BasisEval b = eval_basis(space, tet, ref);
      auto& gd = space.tet_dofs(tet);
      for (int i = 0; i < nd; ++i) {
        int slot = -1;
        for (int u = 0; u < nu; ++u)
          if (gdof[u] == gd[i]) slot = u;
        if (slot < 0) {
          slot = nu++;
          gdof[slot] = gd[i];
        }
        coeff[slot] += sign * nf.dot(b.grad[i]);
      }
    };

    for (int q = 0; q < rule.size(); ++q) {
      double u = rule.points[q][0], v = rule.points[q][1];
      Vec3 x = p0 + u * (p1 - p0) + v * (p2 - p0);
      double w = area2 * rule.weights[q];  // 2*area * weight
      double coeff[20] = {0.0};
      nu = 0;
      side(face.t0, 1.0, x, coeff);
      side(face.t1, -1.0, x, coeff);
      for (int i = 0; i < nu; ++i) {
        int ai = dofs.global_to_active[gdof[i]];
        for (int j = 0; j < nu; ++j) {
          double val = rho * w * coeff[i] * coeff[j];
          if (val != 0.0)
            trips.emplace_back(ai, dofs.global_to_active[gdof[j]], val);
        }
      }
    }
  }
  return from_triplets(dofs.n_active, trips);
}

}  // namespace

SpMat assemble_stabilization(const AssemblyContext& ctx, StabKind kind,
                             double rho_s) {
  check_ctx(ctx);
  const CutTopology& cut = *ctx.cut;
  const FeSpace& space = *ctx.space;
  int nd = space.dofs_per_tet();
  double h = cut.max_active_diameter(*ctx.mesh);
  double rho = rho_s < 0.0 ? default_rho(kind, h) : rho_s;

  if (kind == StabKind::none) {
    ActiveDofMap dofs = make_active_dof_map(space, cut.active_tets);
    return SpMat(dofs.n_active, dofs.n_active);
  }
  if (kind == StabKind::ghost) return assemble_ghost(ctx, rho);
  if (kind == StabKind::normal_volume && ctx.phi == nullptr)
    throw std::invalid_argument(
        "assemble_stabilization: normal_volume needs the level set");

  ActiveDofMap dofs = make_active_dof_map(space, cut.active_tets);
  std::vector<Trip> trips;
  Eigen::Matrix<double, 10, 10> local;

  if (kind == StabKind::full_grad_surface) {
    int deg = ctx.default_degree();
    std::vector<SurfQP> qps;
    for (int a = 0; a < cut.n_active(); ++a) {
      int t = cut.active_tets[a];
      local.setZero();
      qps.clear();
      for (int ti = cut.tet_tri_range[a].first;
           ti < cut.tet_tri_range[a].second; ++ti)
        surface_qps_for_tri(cut.tris[ti], ctx.map, deg, qps);
      for (auto& qp : qps) {
        BasisEval b = eval_basis(space, t, qp.ref);
        double dn[10];
        for (int i = 0; i < nd; ++i)
          dn[i] = qp.normal.dot(qp.grad_transform * b.grad[i]);
        for (int i = 0; i < nd; ++i)
          for (int j = 0; j < nd; ++j)
            local(i, j) += rho * qp.w * dn[i] * dn[j];
      }
      scatter(ctx, dofs, t, local, nd, trips);
    }
    return from_triplets(dofs.n_active, trips);
  }

  // volume kinds
  int cur = -1;
  bool normal_kind = kind == StabKind::normal_volume;
  for_each_band_qp(
      cut, *ctx.mesh, ctx.map, ctx.default_degree(), [&](const VolQP& qp) {
        if (qp.tet != cur) {
          if (cur >= 0) scatter(ctx, dofs, cur, local, nd, trips);
          cur = qp.tet;
          local.setZero();
        }
        BasisEval b = eval_basis(space, qp.tet, qp.ref);
        if (normal_kind) {
          Vec3 n = ctx.phi->grad(qp.tet, qp.ref);
          n /= n.norm();
          double dn[10];
          for (int i = 0; i < nd; ++i)
            dn[i] = n.dot(qp.grad_transform * b.grad[i]);
          for (int i = 0; i < nd; ++i)
            for (int j = 0; j < nd; ++j)
              local(i, j) += rho * qp.w * dn[i] * dn[j];
        } else {
          Vec3 g[10];
          for (int i = 0; i < nd; ++i) g[i] = qp.grad_transform * b.grad[i];
          for (int i = 0; i < nd; ++i)
            for (int j = 0; j < nd; ++j)
              local(i, j) += rho * qp.w * g[i].dot(g[j]);
        }
      });
  if (cur >= 0) scatter(ctx, dofs, cur, local, nd, trips);
  return from_triplets(dofs.n_active, trips);
}

TraceSystem assemble_supg(const AssemblyContext& ctx, const ProblemSpec& prob,
                          double delta0, double delta1, int quad_degree) {
  check_ctx(ctx);
  if (ctx.map != nullptr && !ctx.map->identity)
    throw std::invalid_argument(
        "assemble_supg: streamline stabilization requires k=1 (identity) "
        "geometry");
  if (!prob.has_convection)
    throw std::invalid_argument("assemble_supg: problem has no convection");

  int deg = quad_degree < 0 ? std::max(ctx.default_degree(), 4) : quad_degree;
  const CutTopology& cut = *ctx.cut;
  const FeSpace& space = *ctx.space;
  const TetMesh& mesh = *ctx.mesh;
  int nd = space.dofs_per_tet();
  double eps = prob.eps;

  TraceSystem sys;
  sys.dofs = make_active_dof_map(space, cut.active_tets);
  sys.form = "convection_diffusion_supg";
  sys.symmetric = false;
  sys.rhs = Eigen::VectorXd::Zero(sys.dofs.n_active);
  sys.delta_T.resize(cut.n_active());

  std::vector<Trip> trips;
  std::vector<SurfQP> qps;
  Eigen::Matrix<double, 10, 10> local;

  for (int a = 0; a < cut.n_active(); ++a) {
    int t = cut.active_tets[a];
    double hT = mesh.tet_diameter(t);
    qps.clear();
    for (int ti = cut.tet_tri_range[a].first; ti < cut.tet_tri_range[a].second;
         ++ti)
      surface_qps_for_tri(cut.tris[ti], nullptr, deg, qps);

    double wmax = 0.0, cmax = 0.0;
    for (auto& qp : qps) {
      wmax = std::max(wmax, prob.convection(qp.x).norm());
      cmax = std::max(cmax, prob.reaction(qp.x));
    }
    double peclet = wmax * hT / (2.0 * eps);
    double dtil = (peclet > 1.0) ? delta0 * hT / wmax : delta1 * hT * hT / eps;
    double dT = (cmax > 0.0) ? std::min(dtil, 1.0 / cmax) : dtil;
    sys.delta_T[a] = dT;

    auto hess = basis_hessians(space, t);
    local.setZero();
    Eigen::Matrix<double, 10, 1> lrhs = Eigen::Matrix<double, 10, 1>::Zero();
    for (auto& qp : qps) {
      BasisEval b = eval_basis(space, t, qp.ref);
      const Vec3& n = qp.normal;
      Vec3 tg[10];
      double wg[10], lap[10];
      Vec3 w = prob.convection(qp.x);
      for (int i = 0; i < nd; ++i) {
        tg[i] = b.grad[i] - n.dot(b.grad[i]) * n;
        wg[i] = w.dot(tg[i]);
        lap[i] = hess[i].trace() - n.dot(hess[i] * n);
      }
      double c = prob.reaction(qp.x);
      double f = prob.forcing(qp.x);
      for (int i = 0; i < nd; ++i) {
        lrhs[i] += qp.w * f * (b.value[i] + dT * wg[i]);
        for (int j = 0; j < nd; ++j) {
          double galerkin = eps * tg[i].dot(tg[j]) + c * b.value[i] * b.value[j] +
                            0.5 * (wg[j] * b.value[i] - wg[i] * b.value[j]);
          double stream =
              dT * (-eps * lap[j] + c * b.value[j] + wg[j]) * wg[i];
          local(i, j) += qp.w * (galerkin + stream);
        }
      }
    }
    scatter(ctx, sys.dofs, t, local, nd, trips);
    auto& gd = space.tet_dofs(t);
    for (int i = 0; i < nd; ++i)
      sys.rhs[sys.dofs.global_to_active[gd[i]]] += lrhs[i];
  }
  sys.A = from_triplets(sys.dofs.n_active, trips);
  return sys;
}

void write_matrix_market(const std::string& path, const SpMat& A,
                         bool symmetric) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp)
    throw std::runtime_error("write_matrix_market: cannot open " + path);
  long nnz = 0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      if (!symmetric || it.row() >= it.col()) ++nnz;
  std::fprintf(fp, "%%%%MatrixMarket matrix coordinate real %s\n",
               symmetric ? "symmetric" : "general");
  std::fprintf(fp, "%ld %ld %ld\n", static_cast<long>(A.rows()),
               static_cast<long>(A.cols()), nnz);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      if (!symmetric || it.row() >= it.col())
        std::fprintf(fp, "%ld %ld %.17g\n", static_cast<long>(it.row()) + 1,
                     static_cast<long>(it.col()) + 1, it.value());
  std::fclose(fp);
}

}  // namespace tracefem
