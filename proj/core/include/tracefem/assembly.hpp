// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "tracefem/isomap.hpp"
#include "tracefem/problems.hpp"

namespace tracefem {

enum class StabKind {
  none,
  ghost,
  full_grad_surface,
  full_grad_volume,
  normal_volume
};

StabKind stab_from_string(const std::string& s);
std::string to_string(StabKind kind);

/// Default scaling: ghost 1, full_grad_surface 1, full_grad_volume h,
/// normal_volume 1 (admissible range h <= rho_s <= 1/h).
double default_rho(StabKind kind, double h);

using SpMat = Eigen::SparseMatrix<double>;

/// Everything the assemblers need about the discretization. `map` may be
/// null (identity geometry); `phi` is required for normal_volume.
struct AssemblyContext {
  const TetMesh* mesh = nullptr;
  const FeSpace* space = nullptr;
  const CutTopology* cut = nullptr;
  const IsoMap* map = nullptr;
  const DiscreteLevelSet* phi = nullptr;

  /// Surface quadrature degree policy 2m + 2(k-1).
  int default_degree() const;
};

/// Linear system over the active dofs (all dofs of cut tets).
struct TraceSystem {
  SpMat A;
  Eigen::VectorXd rhs;
  ActiveDofMap dofs;
  std::string form;
  StabKind stab = StabKind::none;
  double rho_s = 0.0;
  std::vector<double> delta_T;  // per active tet, SUPG only
  bool symmetric = true;
  std::string note;
};

/// a_h(u,v) = int_Gamma_h eps grad_G u . grad_G v + c u v, rhs = int f_h v.
/// No stabilization included. quad_degree < 0 selects the policy degree.
TraceSystem assemble_lb(const AssemblyContext& ctx, const ProblemSpec& prob,
                        int quad_degree = -1);

/// Stabilization matrix s_h for the given kind, scaled by rho_s
/// (rho_s < 0 selects the default for the kind). Requires ctx.phi for
/// normal_volume; ghost integrates over the interior faces of the band.
SpMat assemble_stabilization(const AssemblyContext& ctx, StabKind kind,
                             double rho_s = -1.0);

/// Surface mass matrix int_Gamma_h u v (may be singular on its own).
SpMat assemble_surface_mass(const AssemblyContext& ctx, int quad_degree = -1);

/// Volume mass matrix over the (mapped) band.
SpMat assemble_band_mass(const AssemblyContext& ctx);

/// Streamline-diffusion (SUPG) convection-diffusion system in skew form.
/// Requires identity geometry (k = 1); throws std::invalid_argument with a
/// curved map. delta_T per tet: min(delta_tilde, 1/c) with
/// delta_tilde = delta0 h_T / ||w||_inf  if Pe_T > 1, else delta1 h_T^2/eps,
/// Pe_T = ||w||_inf h_T / (2 eps).
TraceSystem assemble_supg(const AssemblyContext& ctx, const ProblemSpec& prob,
                          double delta0 = 0.5, double delta1 = 0.25,
                          int quad_degree = -1);

/// MatrixMarket coordinate format; writes the lower triangle when symmetric.
void write_matrix_market(const std::string& path, const SpMat& A,
                         bool symmetric);

}  // namespace tracefem
