// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tracefem/assembly.hpp"

namespace tracefem {

/// One study level for the CSV report. Unused entries are NaN.
struct ErrorRecord {
  int level = 0;
  double h = 0.0;
  long n_active = 0;  // active dofs (system size)
  double err_l2 = std::numeric_limits<double>::quiet_NaN();
  double err_h1 = std::numeric_limits<double>::quiet_NaN();
  double err_star = std::numeric_limits<double>::quiet_NaN();
  double cond = std::numeric_limits<double>::quiet_NaN();
  double asm_ms = std::numeric_limits<double>::quiet_NaN();
  double solve_ms = std::numeric_limits<double>::quiet_NaN();
};

/// {L2, H1-seminorm} error of the trace solution against the exact surface
/// solution, integrated over Gamma_h with a rule two degrees above the
/// assembly policy. Gradients are compared tangentially.
std::pair<double, double> surface_errors(const Eigen::VectorXd& u_active,
                                         const ActiveDofMap& dofs,
                                         const AssemblyContext& ctx,
                                         const ProblemSpec& prob,
                                         int quad_degree = -1);

/// SUPG norm (eps |grad_G e|^2 + delta_T |w . grad_G e|^2 + c e^2)^(1/2);
/// identity geometry, delta_T per active tet as in assemble_supg.
double star_norm(const Eigen::VectorXd& u_active, const ActiveDofMap& dofs,
                 const AssemblyContext& ctx, const ProblemSpec& prob,
                 const std::vector<double>& delta_T, int quad_degree = -1);

/// EOC between consecutive levels with respect to h; first entry NaN.
struct EocTable {
  std::vector<double> l2, h1, star;
};
EocTable compute_eoc(const std::vector<ErrorRecord>& records);

/// Plain CSV with the fixed schema
///   level,h,n_active,err_l2,err_h1,err_star,eoc_l2,eoc_h1,eoc_star,cond,asm_ms,solve_ms
/// plus optional extra columns (adaptive studies append eta_global,theta).
void write_report_csv(const std::string& path,
                      const std::vector<ErrorRecord>& records,
                      const EocTable& eoc,
                      const std::vector<std::string>& extra_names = {},
                      const std::vector<std::vector<double>>& extra_cols = {});

}  // namespace tracefem
