// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "tracefem/common.hpp"
#include "tracefem/mesh.hpp"

namespace tracefem {

/// Continuous nodal Lagrange space of degree 1 or 2 on a TetMesh.
/// Dof order: all mesh vertices first (dof id == vertex id), then for degree 2
/// one dof per edge, edges sorted lexicographically as (min,max) vertex pairs.
class FeSpace {
 public:
  FeSpace(const TetMesh& mesh, int degree);

  int degree() const { return degree_; }
  const TetMesh& mesh() const { return *mesh_; }
  int n_dofs() const { return n_dofs_; }
  int dofs_per_tet() const { return degree_ == 1 ? 4 : 10; }

  /// Global dofs of tet t: 4 vertex dofs then 6 edge dofs for the local
  /// edges (0,1),(0,2),(0,3),(1,2),(1,3),(2,3) of `tets[t]`.
  const std::array<int, 10>& tet_dofs(int t) const { return tet_dofs_[t]; }

  /// Coordinates of dof node i.
  Vec3 dof_point(int i) const;

  /// Reference coordinates of the local nodes of a tet (same for all tets).
  std::vector<Vec3> local_node_ref() const;

 private:
  const TetMesh* mesh_;
  int degree_;
  int n_dofs_;
  std::vector<std::array<int, 2>> edges_;  // degree 2 only, sorted pairs
  std::vector<std::array<int, 10>> tet_dofs_;
};

/// Basis values and physical gradients of one tet at a reference point.
/// Valid also outside the reference simplex (polynomial extension).
struct BasisEval {
  std::array<double, 10> value;
  std::array<Vec3, 10> grad;  // gradients w.r.t. physical coordinates
  int count;
};

BasisEval eval_basis(const FeSpace& space, int tet, const Vec3& ref);

/// Constant per-tet physical Hessians of the basis (zero for degree 1).
std::array<Mat3, 10> basis_hessians(const FeSpace& space, int tet);

/// Affine reference-to-physical map data of a tet.
struct TetMap {
  Vec3 v0;
  Mat3 B;     // columns v_i - v_0
  Mat3 Binv;  // reference = Binv * (x - v0)
  double detB;
};
TetMap tet_map(const TetMesh& mesh, int t);

/// Nodal interpolant of f.
Eigen::VectorXd nodal_interpolate(const FeSpace& space,
                                  const std::function<double(const Vec3&)>& f);

/// Restriction of a space to an active tet set: the active dofs are all dofs
/// of active tets, in ascending global order.
struct ActiveDofMap {
  std::vector<int> active_to_global;
  std::vector<int> global_to_active;  // -1 when inactive
  int n_active = 0;
};
ActiveDofMap make_active_dof_map(const FeSpace& space,
                                 const std::vector<int>& active_tets);

}  // namespace tracefem
