// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <functional>

namespace tracefem {

using SpMat = Eigen::SparseMatrix<double>;

struct SolveReport {
  Eigen::VectorXd x;
  int iterations = 0;
  double rel_residual = 0.0;  // true residual |b - Ax| / |b| at exit
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients. Stops when the true relative
/// residual is <= tol (verified explicitly, not just by recurrence).
/// `observer`, when set, receives (iteration, current iterate).
SolveReport solve_cg(
    const SpMat& A, const Eigen::VectorXd& b, double tol = 1e-10,
    int max_iter = -1,
    const std::function<void(int, const Eigen::VectorXd&)>& observer = {});

/// BiCGSTAB with diagonal preconditioning for the nonsymmetric systems.
SolveReport solve_bicgstab(const SpMat& A, const Eigen::VectorXd& b,
                           double tol = 1e-10, int max_iter = -1);

/// Spectral condition estimate of the Jacobi-scaled matrix D^{-1/2} A D^{-1/2}
/// by Lanczos with full reorthogonalization.
struct CondEstimate {
  double lambda_max = 0.0;
  double lambda_min = 0.0;  // smallest Ritz value above the kernel threshold
  int kernel_dim = 0;       // Ritz values below 1e-10 * lambda_max
  int excluded_zero_diag = 0;
  int steps = 0;
  bool reliable = false;

  double cond() const {
    return lambda_min > 0.0 ? lambda_max / lambda_min : 0.0;
  }
};

/// `steps` Lanczos iterations (capped at the matrix size; the estimate is
/// then exact). Restarts with a fresh seeded vector on early breakdown, up
/// to 3 times. A must be symmetric.
CondEstimate estimate_condition(const SpMat& A, std::uint64_t seed = 42,
                                int steps = 200);

}  // namespace tracefem
