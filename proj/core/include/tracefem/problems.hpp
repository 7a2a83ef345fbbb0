// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <string>

#include "tracefem/surface.hpp"

namespace tracefem {

/// Surface PDE  -eps Laplace_Gamma u + w . grad_Gamma u + c u = f  with all
/// data given as ambient extensions (constant along normals up to the band
/// width), so they can be evaluated at points of the discrete surface.
struct ProblemSpec {
  std::shared_ptr<const AnalyticSurface> surface;
  double eps = 1.0;
  std::function<double(const Vec3&)> reaction;     // c
  std::function<Vec3(const Vec3&)> convection;     // w, tangential on Gamma
  std::function<double(const Vec3&)> div_convection;  // div_Gamma w
  bool has_convection = false;
  std::function<double(const Vec3&)> exact_u;      // u^e = u o p
  std::function<Vec3(const Vec3&)> exact_grad;     // ambient grad of u^e
  std::function<double(const Vec3&)> forcing;      // f^e = f o p
  std::string name;
};

/// Tangential differential operators of a scalar/vector field given on the
/// surface, via 4th-order finite differences of the closest-point
/// composition. `step` <= 0 selects 1e-3 * feature_size. `x` must lie on
/// (or near) the surface; derivatives are taken at closest_point(x).
double fd_surface_laplacian(const AnalyticSurface& surface,
                            const std::function<double(const Vec3&)>& u,
                            const Vec3& x, double step = -1.0);
Vec3 fd_surface_gradient(const AnalyticSurface& surface,
                         const std::function<double(const Vec3&)>& u,
                         const Vec3& x, double step = -1.0);
double fd_surface_divergence(const AnalyticSurface& surface,
                             const std::function<Vec3(const Vec3&)>& w,
                             const Vec3& x, double step = -1.0);

/// -Laplace_Gamma u + u = f on a sphere of radius r with u = x1 x2 / r^2
/// (a degree-2 spherical harmonic); everything closed-form.
ProblemSpec sphere_harmonic_problem(double r = 1.0);

/// Convection-diffusion on the sphere: w = axis x position (a tangential
/// rigid rotation, div_Gamma w = 0), c = 1, same harmonic exact solution.
ProblemSpec rotating_convection_problem(double r, double eps,
                                        const Vec3& axis = Vec3(0, 0, 1));

/// -Laplace_Gamma u + u = f on a sphere with a Gaussian spike of width
/// sigma centered at x0 on the surface; f via the FD oracle. sigma <= 0
/// selects 0.1 r; x0 defaults to r * (1,1,1)/sqrt(3).
ProblemSpec spike_problem(double r = 1.0, double sigma = -1.0,
                          const Vec3& x0 = Vec3(0, 0, 0));

/// -Laplace_Gamma u + u = f on the plane n.x = offset with affine exact
/// solution u = alpha . x + beta: zero surface curvature and zero residual,
/// the estimator exactness case.
ProblemSpec planar_affine_problem(const Vec3& n = Vec3(0, 0, 1),
                                  double offset = 0.1,
                                  const Vec3& alpha = Vec3(0.3, -0.2, 0.0),
                                  double beta = 0.5);

/// -eps Laplace_Gamma u + c u = f on an arbitrary surface with prescribed
/// u (restricted to the surface); forcing and gradients via the FD oracle.
ProblemSpec manufactured_problem(std::shared_ptr<const AnalyticSurface> surface,
                                 const std::function<double(const Vec3&)>& u,
                                 double eps = 1.0, double c = 1.0);

}  // namespace tracefem
