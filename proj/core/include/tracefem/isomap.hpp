// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <utility>

#include "tracefem/levelset.hpp"

namespace tracefem {

/// Result of the quasi-normal displacement search at one point.
struct DhResult {
  double d = 0.0;
  bool ok = false;
};

/// Solves E_T phi_h(x + d * G) = phi_h^lin(x) for d along G = grad phi_h(x),
/// where E_T is the polynomial extension of phi_h from tet `tet`. Brackets on
/// [-h_T, h_T] (nearest interval first), then bisection plus safeguarded
/// Newton to residual 1e-12 * max|phi_h|. ok == false when no sign change
/// exists within the search radius.
DhResult compute_dh(const DiscreteLevelSet& phi, int tet, const Vec3& x_phys);

/// Isoparametric mesh transformation Theta_h of degree k: identity outside
/// the active band, nodal average of the quasi-normal displacement inside.
struct IsoMap {
  std::shared_ptr<const FeSpace> space;
  std::vector<Vec3> displacement;  // per dof of `space`, zero off the band
  bool identity = true;

  Vec3 map_point(int tet, const Vec3& ref) const;
  Mat3 jacobian(int tet, const Vec3& ref) const;
};

/// Builds Theta_h from the level set of the cut. Displacements are averaged
/// over adjacent active tets at every dof of an active tet; all other dofs
/// stay put. Throws std::runtime_error (mesh too coarse) when the root
/// search fails at a node or the map fails det DTheta in [0.5, 2] or
/// |Theta - id| <= 0.5 h_T at surface quadrature points.
IsoMap build_isomap(const DiscreteLevelSet& phi, const CutTopology& cut);

/// One surface quadrature point of Gamma_h (mapped when `map` is present).
struct SurfQP {
  int tet;
  Vec3 ref;             // reference coordinates in the background tet
  Vec3 x;               // physical point on Gamma_h
  double w;             // weight including area and the mapped Jacobian
  Vec3 normal;          // unit normal of Gamma_h at x
  Mat3 grad_transform;  // DTheta^{-T}; identity without a map
};

void for_each_surface_qp(const CutTopology& cut, const TetMesh& mesh,
                         const IsoMap* map, int degree,
                         const std::function<void(const SurfQP&)>& fn);

/// Appends the quadrature points of one cut triangle (building block of
/// for_each_surface_qp, useful for per-tet assembly loops).
void surface_qps_for_tri(const SurfaceTri& tri, const IsoMap* map, int degree,
                         std::vector<SurfQP>& out);

/// One volume quadrature point of the (mapped) active band.
struct VolQP {
  int tet;
  Vec3 ref;
  Vec3 x;
  double w;
  Mat3 grad_transform;
};

void for_each_band_qp(const CutTopology& cut, const TetMesh& mesh,
                      const IsoMap* map, int degree,
                      const std::function<void(const VolQP&)>& fn);

/// {max, area-weighted mean} distance of the surface quadrature points to
/// the exact surface.
std::pair<double, double> geometry_distance(const AnalyticSurface& surface,
                                            const CutTopology& cut,
                                            const TetMesh& mesh,
                                            const IsoMap* map, int degree);

}  // namespace tracefem
