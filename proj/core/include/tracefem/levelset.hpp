// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "tracefem/fe_space.hpp"
#include "tracefem/surface.hpp"

namespace tracefem {

/// Nodal interpolant phi_h of a level-set function in a degree-k space.
/// Its piecewise linear reduction phi_h^lin (the vertex values) defines the
/// cut geometry; eval/grad extend each tet's polynomial to all of space.
struct DiscreteLevelSet {
  std::shared_ptr<const FeSpace> space;
  Eigen::VectorXd coeffs;

  int degree() const { return space->degree(); }
  double vertex_value(int v) const { return coeffs[v]; }
  double eval(int tet, const Vec3& ref) const;
  Vec3 grad(int tet, const Vec3& ref) const;
  double max_abs_coeff() const { return coeffs.cwiseAbs().maxCoeff(); }
};

DiscreteLevelSet interpolate_levelset(const AnalyticSurface& surface,
                                      std::shared_ptr<const FeSpace> space);

/// One triangle of the piecewise planar surface Gamma^lin inside tet `tet`.
struct SurfaceTri {
  int tet;
  std::array<Vec3, 3> x;    // physical vertices
  std::array<Vec3, 3> ref;  // reference coordinates in `tet`
  Vec3 normal;              // unit, aligned with grad of phi_h^lin
  double area;
};

struct CutFace {
  std::array<int, 3> v;  // sorted vertex ids
  int t0, t1;            // both active
};

/// Cut topology of phi_h^lin: active tets, their surface triangles, and the
/// interior faces of the active set (the ghost-penalty face set).
struct CutTopology {
  std::vector<int> active_tets;  // ascending
  std::vector<SurfaceTri> tris;  // grouped by tet, tet-ascending
  std::vector<std::pair<int, int>> tet_tri_range;  // per active tet index
  std::vector<CutFace> interior_faces;
  std::vector<int> tet_to_active;  // mesh tet -> active index or -1

  int n_active() const { return static_cast<int>(active_tets.size()); }
  double max_active_diameter(const TetMesh& mesh) const;
};

/// Marching-tets extraction. Vertex sign tie-break: |phi| below
/// 1e-12 * (max adjacent tet diameter) counts as positive, which makes a
/// surface coinciding with a mesh face belong to the tet on its negative
/// side. Degenerate triangles (area <= 1e-14 h_T^2) are dropped. Throws
/// std::runtime_error when no tet is cut.
CutTopology extract_cut_topology(const DiscreteLevelSet& phi,
                                 const TetMesh& mesh);

/// Max / mean distance of surface-quadrature points to the exact surface,
/// measured via |phi| / |grad phi| at mapped points. With map == nullptr the
/// points are the Gamma^lin quadrature points. (Declared in isomap.hpp to
/// avoid a cycle; see geometry_distance there.)

}  // namespace tracefem
