// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include "tracefem/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace tracefem {

SolveReport solve_cg(
    const SpMat& A, const Eigen::VectorXd& b, double tol, int max_iter,
    const std::function<void(int, const Eigen::VectorXd&)>& observer) {
  const int n = static_cast<int>(A.rows());
  if (max_iter < 0) max_iter = 4 * n + 100;
  SolveReport rep;
  rep.x = Eigen::VectorXd::Zero(n);
  double bnorm = b.norm();
  if (bnorm == 0.0) {
    rep.converged = true;
    return rep;
  }

  Eigen::VectorXd dinv(n);
  for (int i = 0; i < n; ++i) {
    double d = A.coeff(i, i);
    dinv[i] = d > 0.0 ? 1.0 / d : 1.0;
  }

  Eigen::VectorXd r = b;
  Eigen::VectorXd z = dinv.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  int it = 0;
  while (it < max_iter) {
    Eigen::VectorXd Ap = A * p;
    double pAp = p.dot(Ap);
    if (pAp <= 0.0) break;  // matrix not SPD on this subspace
    double alpha = rz / pAp;
    rep.x += alpha * p;
    r -= alpha * Ap;
    ++it;
    if (observer) observer(it, rep.x);
    if (r.norm() <= tol * bnorm) {
      // recurrence says done; confirm with the true residual
      Eigen::VectorXd rt = b - A * rep.x;
      if (rt.norm() <= tol * bnorm) break;
      r = rt;
    }
    z = dinv.cwiseProduct(r);
    double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  rep.iterations = it;
  rep.rel_residual = (b - A * rep.x).norm() / bnorm;
  rep.converged = rep.rel_residual <= tol;
  return rep;
}

SolveReport solve_bicgstab(const SpMat& A, const Eigen::VectorXd& b, double tol,
                           int max_iter) {
  SolveReport rep;
  Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<double>> solver;
  solver.setTolerance(tol);
  if (max_iter > 0) solver.setMaxIterations(max_iter);
  solver.compute(A);
  rep.x = solver.solve(b);
  rep.iterations = static_cast<int>(solver.iterations());
  double bnorm = b.norm();
  rep.rel_residual = bnorm > 0.0 ? (b - A * rep.x).norm() / bnorm : 0.0;
  rep.converged = rep.rel_residual <= tol;
  return rep;
}

CondEstimate estimate_condition(const SpMat& A, std::uint64_t seed,
                                int steps) {
  const int n = static_cast<int>(A.rows());
  CondEstimate est;

  // Jacobi scaling; (near-)zero diagonal entries are excluded
  Eigen::VectorXd diag(n);
  double dmax = 0.0;
  for (int i = 0; i < n; ++i) {
    diag[i] = A.coeff(i, i);
    dmax = std::max(dmax, std::abs(diag[i]));
  }
  std::vector<int> keep;
  keep.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (diag[i] > 1e-14 * dmax)
      keep.push_back(i);
  }
  est.excluded_zero_diag = n - static_cast<int>(keep.size());
  const int m = static_cast<int>(keep.size());
  if (m == 0) return est;

  std::vector<int> pos(n, -1);
  for (int i = 0; i < m; ++i) pos[keep[i]] = i;
  Eigen::VectorXd scale(m);
  for (int i = 0; i < m; ++i) scale[i] = 1.0 / std::sqrt(diag[keep[i]]);

  auto apply = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) full[keep[i]] = scale[i] * v[i];
    Eigen::VectorXd Af = A * full;
    Eigen::VectorXd out(m);
    for (int i = 0; i < m; ++i) out[i] = scale[i] * Af[keep[i]];
    return out;
  };

  int want = std::min(steps, m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int attempt = 0; attempt < 3; ++attempt) {
    std::vector<Eigen::VectorXd> V;
    Eigen::VectorXd alpha(want), beta(want);
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v[i] = gauss(rng);
    v /= v.norm();
    V.push_back(v);
    int k = 0;
    bool breakdown = false;
    for (; k < want; ++k) {
      Eigen::VectorXd w = apply(V[k]);
      alpha[k] = V[k].dot(w);
      w -= alpha[k] * V[k];
      if (k > 0) w -= beta[k - 1] * V[k - 1];
      // full reorthogonalization, two passes
      for (int pass = 0; pass < 2; ++pass)
        for (auto& u : V) w -= u.dot(w) * u;
      double nw = w.norm();
      if (k + 1 == want || k + 1 == m) {
        beta[k] = nw;
        ++k;
        break;
      }
      if (nw < 1e-12) {
        beta[k] = 0.0;
        ++k;
        breakdown = true;
        break;
      }
      beta[k] = nw;
      V.push_back(w / nw);
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const auto& ritz = es.eigenvalues();
    est.steps = k;
    est.lambda_max = ritz(k - 1);
    double thresh = 1e-10 * std::max(est.lambda_max, 0.0);
    est.kernel_dim = 0;
    est.lambda_min = 0.0;
    for (int i = 0; i < k; ++i) {
      if (ritz(i) <= thresh) {
        est.kernel_dim++;
      } else if (est.lambda_min == 0.0) {
        est.lambda_min = ritz(i);
      }
    }

    bool exhausted = (k == m);
    double resid_lo = std::abs(beta[k - 1] * es.eigenvectors()(k - 1, 0));
    double resid_hi = std::abs(beta[k - 1] * es.eigenvectors()(k - 1, k - 1));
    bool tight = est.lambda_max > 0.0 &&
                 resid_lo <= 1e-6 * est.lambda_max &&
                 resid_hi <= 1e-6 * est.lambda_max;
    est.reliable = exhausted || tight;

    if (breakdown && !exhausted && k < want && attempt + 1 < 3) continue;
    break;
  }
  return est;
}

}  // namespace tracefem
