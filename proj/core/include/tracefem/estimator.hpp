// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "tracefem/error_norms.hpp"

namespace tracefem {

/// Residual a posteriori indicators per active tet:
///   eta_R^2 = h_T^2 || f + eps lap_G u_h - (c + div_G w) u_h
///                     - w . grad_G u_h ||^2_{Gamma_T}
///   eta_E^2 = sum_E h_T ( ||[eps grad_G u_h]||^2_E + ||w . [m]||^2_E )
/// with [m] the sum of the two outward co-normals of an edge.
struct IndicatorField {
  std::vector<int> active_tets;
  std::vector<double> eta_r2, eta_e2, eta2;  // squared, per active tet
  double eta_global = 0.0;                   // sqrt of the sum
};

/// Identity-geometry residual estimator. Edges without a matched partner
/// are accepted (zero jump) only when they lie on a mesh boundary face
/// (open surface); otherwise throws std::runtime_error (broken topology).
IndicatorField compute_indicators(const Eigen::VectorXd& u_active,
                                  const ActiveDofMap& dofs,
                                  const AssemblyContext& ctx,
                                  const ProblemSpec& prob);

/// Smallest prefix of tets (eta descending, id ascending on ties) whose
/// squared sum reaches theta * eta_global^2. Returns mesh tet ids.
std::vector<int> mark_dorfler(const IndicatorField& ind, double theta);

struct AdaptOptions {
  Vec3 box_lo = Vec3(-4.0 / 3.0, -4.0 / 3.0, -4.0 / 3.0);
  Vec3 box_hi = Vec3(4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0);
  int n0 = 8;
  int m = 1, k = 1;
  StabKind stab = StabKind::normal_volume;
  double rho_s = -1.0;  // auto
  double theta = 0.5;
  int max_steps = 25;
  long dof_budget = 20000;
  double solver_tol = 1e-10;
  std::string out_dir;  // empty: no VTK output
};

struct AdaptiveStep {
  ErrorRecord record;
  double eta_global = 0.0;
  int n_marked = 0;
  int n_tets = 0;
};

struct AdaptiveResult {
  std::vector<AdaptiveStep> steps;
  bool budget_reached = false;
};

/// Solve-estimate-mark-refine loop with Dorfler marking and Maubach
/// bisection, stopping at the dof budget or max_steps.
AdaptiveResult adaptive_loop(const ProblemSpec& prob, const AdaptOptions& opt);

}  // namespace tracefem
