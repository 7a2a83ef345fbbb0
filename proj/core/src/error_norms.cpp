// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include "tracefem/error_norms.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tracefem {

std::pair<double, double> surface_errors(const Eigen::VectorXd& u_active,
                                         const ActiveDofMap& dofs,
                                         const AssemblyContext& ctx,
                                         const ProblemSpec& prob,
                                         int quad_degree) {
  int deg = quad_degree < 0 ? ctx.default_degree() + 2 : quad_degree;
  const FeSpace& space = *ctx.space;
  const CutTopology& cut = *ctx.cut;
  int nd = space.dofs_per_tet();
  double l2 = 0.0, h1 = 0.0;

  std::vector<SurfQP> qps;
  for (int a = 0; a < cut.n_active(); ++a) {
    int t = cut.active_tets[a];
    auto& gd = space.tet_dofs(t);
    double coeff[10];
    for (int i = 0; i < nd; ++i)
      coeff[i] = u_active[dofs.global_to_active[gd[i]]];
    qps.clear();
    for (int ti = cut.tet_tri_range[a].first; ti < cut.tet_tri_range[a].second;
         ++ti)
      surface_qps_for_tri(cut.tris[ti], ctx.map, deg, qps);
    for (auto& qp : qps) {
      BasisEval b = eval_basis(space, t, qp.ref);
      double uh = 0.0;
      Vec3 gh = Vec3::Zero();
      for (int i = 0; i < nd; ++i) {
        uh += coeff[i] * b.value[i];
        gh += coeff[i] * (qp.grad_transform * b.grad[i]);
      }
      gh -= qp.normal.dot(gh) * qp.normal;
      double ue = prob.exact_u(qp.x);
      Vec3 ge = prob.exact_grad(qp.x);
      ge -= qp.normal.dot(ge) * qp.normal;
      l2 += qp.w * (uh - ue) * (uh - ue);
      h1 += qp.w * (gh - ge).squaredNorm();
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

double star_norm(const Eigen::VectorXd& u_active, const ActiveDofMap& dofs,
                 const AssemblyContext& ctx, const ProblemSpec& prob,
                 const std::vector<double>& delta_T, int quad_degree) {
  if (ctx.map != nullptr && !ctx.map->identity)
    throw std::invalid_argument("star_norm: identity geometry required");
  if (delta_T.size() != ctx.cut->active_tets.size())
    throw std::invalid_argument("star_norm: delta_T size mismatch");
  int deg = quad_degree < 0 ? ctx.default_degree() + 2 : quad_degree;
  const FeSpace& space = *ctx.space;
  const CutTopology& cut = *ctx.cut;
  int nd = space.dofs_per_tet();
  double acc = 0.0;

  std::vector<SurfQP> qps;
  for (int a = 0; a < cut.n_active(); ++a) {
    int t = cut.active_tets[a];
    auto& gd = space.tet_dofs(t);
    double coeff[10];
    for (int i = 0; i < nd; ++i)
      coeff[i] = u_active[dofs.global_to_active[gd[i]]];
    qps.clear();
    for (int ti = cut.tet_tri_range[a].first; ti < cut.tet_tri_range[a].second;
         ++ti)
      surface_qps_for_tri(cut.tris[ti], nullptr, deg, qps);
    for (auto& qp : qps) {
      BasisEval b = eval_basis(space, t, qp.ref);
      double uh = 0.0;
      Vec3 gh = Vec3::Zero();
      for (int i = 0; i < nd; ++i) {
        uh += coeff[i] * b.value[i];
        gh += coeff[i] * b.grad[i];
      }
      gh -= qp.normal.dot(gh) * qp.normal;
      double e = uh - prob.exact_u(qp.x);
      Vec3 ge = prob.exact_grad(qp.x);
      ge -= qp.normal.dot(ge) * qp.normal;
      Vec3 gerr = gh - ge;
      double conv = 0.0;
      if (prob.has_convection) {
        Vec3 w = prob.convection(qp.x);
        w -= qp.normal.dot(w) * qp.normal;
        conv = w.dot(gerr);
      }
      double c = prob.reaction(qp.x);
      acc += qp.w * (prob.eps * gerr.squaredNorm() +
                     delta_T[a] * conv * conv + c * e * e);
    }
  }
  return std::sqrt(acc);
}

EocTable compute_eoc(const std::vector<ErrorRecord>& records) {
  auto rate = [](double e0, double e1, double h0, double h1) {
    if (!(e0 > 0.0) || !(e1 > 0.0) || !(h0 > h1) || !(h1 > 0.0))
      return std::numeric_limits<double>::quiet_NaN();
    return std::log(e0 / e1) / std::log(h0 / h1);
  };
  EocTable t;
  std::size_t n = records.size();
  t.l2.assign(n, std::numeric_limits<double>::quiet_NaN());
  t.h1.assign(n, std::numeric_limits<double>::quiet_NaN());
  t.star.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i < n; ++i) {
    const auto& p = records[i - 1];
    const auto& c = records[i];
    t.l2[i] = rate(p.err_l2, c.err_l2, p.h, c.h);
    t.h1[i] = rate(p.err_h1, c.err_h1, p.h, c.h);
    t.star[i] = rate(p.err_star, c.err_star, p.h, c.h);
  }
  return t;
}

void write_report_csv(const std::string& path,
                      const std::vector<ErrorRecord>& records,
                      const EocTable& eoc,
                      const std::vector<std::string>& extra_names,
                      const std::vector<std::vector<double>>& extra_cols) {
  if (extra_names.size() != extra_cols.size())
    throw std::invalid_argument("write_report_csv: extra column mismatch");
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("write_report_csv: cannot open " + path);
  std::fprintf(fp,
               "level,h,n_active,err_l2,err_h1,err_star,eoc_l2,eoc_h1,"
               "eoc_star,cond,asm_ms,solve_ms");
  for (auto& name : extra_names) std::fprintf(fp, ",%s", name.c_str());
  std::fprintf(fp, "\n");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    std::fprintf(fp, "%d,%.17g,%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                     "%.17g,%.17g",
                 r.level, r.h, r.n_active, r.err_l2, r.err_h1, r.err_star,
                 eoc.l2[i], eoc.h1[i], eoc.star[i], r.cond, r.asm_ms,
                 r.solve_ms);
    for (auto& col : extra_cols)
      std::fprintf(fp, ",%.17g",
                   i < col.size() ? col[i]
                                  : std::numeric_limits<double>::quiet_NaN());
    std::fprintf(fp, "\n");
  }
  std::fclose(fp);
}

}  // namespace tracefem
