// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include "tracefem/problems.hpp"

#include <cmath>

namespace tracefem {

namespace {

double pick_step(const AnalyticSurface& s, double step) {
  return step > 0.0 ? step : 1e-3 * s.feature_size();
}

// 4th-order central first and second derivative stencils of the
// closest-point composition g(y) = u(p(y)).
template <typename F>
double d2_axis(const F& g, const Vec3& x, int ax, double h) {
  Vec3 e = Vec3::Zero();
  e[ax] = 1.0;
  return (-g(x + 2 * h * e) + 16.0 * g(x + h * e) - 30.0 * g(x) +
          16.0 * g(x - h * e) - g(x - 2 * h * e)) /
         (12.0 * h * h);
}

template <typename F>
double d1_axis(const F& g, const Vec3& x, int ax, double h) {
  Vec3 e = Vec3::Zero();
  e[ax] = 1.0;
  return (g(x - 2 * h * e) - 8.0 * g(x - h * e) + 8.0 * g(x + h * e) -
          g(x + 2 * h * e)) /
         (12.0 * h);
}

}  // namespace

double fd_surface_laplacian(const AnalyticSurface& surface,
                            const std::function<double(const Vec3&)>& u,
                            const Vec3& x, double step) {
  double h = pick_step(surface, step);
  Vec3 p = surface.closest_point(x);
  auto g = [&](const Vec3& y) { return u(surface.closest_point(y)); };
  double s = 0.0;
  for (int ax = 0; ax < 3; ++ax) s += d2_axis(g, p, ax, h);
  return s;
}

Vec3 fd_surface_gradient(const AnalyticSurface& surface,
                         const std::function<double(const Vec3&)>& u,
                         const Vec3& x, double step) {
  double h = pick_step(surface, step);
  Vec3 p = surface.closest_point(x);
  auto g = [&](const Vec3& y) { return u(surface.closest_point(y)); };
  Vec3 grad;
  for (int ax = 0; ax < 3; ++ax) grad[ax] = d1_axis(g, p, ax, h);
  Vec3 n = surface.normal(p);
  return grad - n.dot(grad) * n;
}

double fd_surface_divergence(const AnalyticSurface& surface,
                             const std::function<Vec3(const Vec3&)>& w,
                             const Vec3& x, double step) {
  double h = pick_step(surface, step);
  Vec3 p = surface.closest_point(x);
  double div = 0.0;
  for (int ax = 0; ax < 3; ++ax) {
    auto gc = [&](const Vec3& y) { return w(surface.closest_point(y))[ax]; };
    div += d1_axis(gc, p, ax, h);
  }
  return div;
}

ProblemSpec sphere_harmonic_problem(double r) {
  ProblemSpec p;
  auto sphere = std::shared_ptr<const AnalyticSurface>(make_surface("sphere", {r}));
  p.surface = sphere;
  p.eps = 1.0;
  p.reaction = [](const Vec3&) { return 1.0; };
  p.div_convection = [](const Vec3&) { return 0.0; };
  p.has_convection = false;
  // u = x1 x2 on the unit sphere scaled to radius r; the closest-point
  // extension is homogeneous of degree 0
  p.exact_u = [](const Vec3& x) { return x[0] * x[1] / x.squaredNorm(); };
  p.exact_grad = [](const Vec3& x) {
    double n2 = x.squaredNorm();
    Vec3 g(x[1] / n2, x[0] / n2, 0.0);
    return Vec3(g - (2.0 * x[0] * x[1] / (n2 * n2)) * x);
  };
  // -Laplace_Gamma u = (6 / r^2) u for this degree-2 harmonic
  double c2 = 6.0 / (r * r) + 1.0;
  p.forcing = [c2](const Vec3& x) { return c2 * x[0] * x[1] / x.squaredNorm(); };
  p.name = "sphere_harmonic";
  return p;
}

ProblemSpec rotating_convection_problem(double r, double eps,
                                        const Vec3& axis) {
  ProblemSpec p = sphere_harmonic_problem(r);
  p.eps = eps;
  p.has_convection = true;
  Vec3 a = axis;
  p.convection = [a](const Vec3& x) { return a.cross(x); };
  p.div_convection = [](const Vec3&) { return 0.0; };
  auto ue = p.exact_u;
  auto gue = p.exact_grad;
  auto conv = p.convection;
  auto sphere = p.surface;
  double r2 = r * r;
  p.forcing = [=](const Vec3& x) {
    Vec3 q = sphere->closest_point(x);
    // w is tangential, grad u^e has no normal part to first order at Gamma
    double wgrad = conv(q).dot(gue(q));
    return eps * (6.0 / r2) * ue(q) + wgrad + ue(q);
  };
  p.name = "rotating_convection";
  return p;
}

ProblemSpec spike_problem(double r, double sigma, const Vec3& x0) {
  ProblemSpec p;
  auto sphere = std::shared_ptr<const AnalyticSurface>(make_surface("sphere", {r}));
  p.surface = sphere;
  p.eps = 1.0;
  p.reaction = [](const Vec3&) { return 1.0; };
  p.div_convection = [](const Vec3&) { return 0.0; };
  p.has_convection = false;
  double sg = sigma > 0.0 ? sigma : 0.1 * r;
  Vec3 center = x0.norm() > 0.0 ? Vec3((r / x0.norm()) * x0)
                                : Vec3(r / std::sqrt(3.0) * Vec3(1, 1, 1));
  auto spike = [center, sg](const Vec3& x) {
    return std::exp(-(x - center).squaredNorm() / (sg * sg));
  };
  p.exact_u = [spike, sphere](const Vec3& x) {
    return spike(sphere->closest_point(x));
  };
  p.exact_grad = [spike, center, sg, sphere](const Vec3& x) {
    Vec3 q = sphere->closest_point(x);
    return Vec3(-2.0 / (sg * sg) * spike(q) * (q - center));
  };
  p.forcing = [spike, sphere](const Vec3& x) {
    Vec3 q = sphere->closest_point(x);
    return -fd_surface_laplacian(*sphere, spike, q) + spike(q);
  };
  p.name = "spike";
  return p;
}

ProblemSpec planar_affine_problem(const Vec3& n, double offset,
                                  const Vec3& alpha, double beta) {
  ProblemSpec p;
  auto plane = std::shared_ptr<const AnalyticSurface>(
      make_surface("plane", {n[0], n[1], n[2], offset}));
  p.surface = plane;
  p.eps = 1.0;
  p.reaction = [](const Vec3&) { return 1.0; };
  p.div_convection = [](const Vec3&) { return 0.0; };
  p.has_convection = false;
  p.exact_u = [plane, alpha, beta](const Vec3& x) {
    return alpha.dot(plane->closest_point(x)) + beta;
  };
  p.exact_grad = [plane, alpha](const Vec3& x) {
    Vec3 nn = plane->normal(x);
    return Vec3(alpha - nn.dot(alpha) * nn);
  };
  // affine on a plane: Laplace_Gamma u = 0, so f = c u
  p.forcing = p.exact_u;
  p.name = "planar_affine";
  return p;
}

ProblemSpec manufactured_problem(std::shared_ptr<const AnalyticSurface> surface,
                                 const std::function<double(const Vec3&)>& u,
                                 double eps, double c) {
  ProblemSpec p;
  p.surface = surface;
  p.eps = eps;
  p.reaction = [c](const Vec3&) { return c; };
  p.div_convection = [](const Vec3&) { return 0.0; };
  p.has_convection = false;
  auto s = surface;
  p.exact_u = [s, u](const Vec3& x) { return u(s->closest_point(x)); };
  p.exact_grad = [s, u](const Vec3& x) { return fd_surface_gradient(*s, u, x); };
  p.forcing = [s, u, eps, c](const Vec3& x) {
    Vec3 q = s->closest_point(x);
    return -eps * fd_surface_laplacian(*s, u, q) + c * u(q);
  };
  p.name = "manufactured_" + surface->name();
  return p;
}

}  // namespace tracefem
