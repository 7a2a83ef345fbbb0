// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "tracefem/common.hpp"

namespace tracefem {

/// Conforming tetrahedral mesh refined by Maubach bisection.
///
/// `tets` holds positively oriented vertex tuples used for geometry and FE
/// assembly. `mverts`/`mtag` hold the bisection bookkeeping: the ordered
/// Maubach tuple and the tag k in {1,2,3}; the refinement edge of a tet is
/// (mverts[0], mverts[k]). The two orderings contain the same four vertices.
struct TetMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> tets;
  std::vector<std::array<int, 4>> mverts;
  std::vector<std::int8_t> mtag;
  std::vector<std::int32_t> generation;  // bisections from the root tet
  std::vector<std::int32_t> parent;      // tet id in the pre-refinement mesh,
                                         // -1 for root tets

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_tets() const { return static_cast<int>(tets.size()); }

  double tet_volume(int t) const;    // > 0 by the orientation invariant
  double tet_diameter(int t) const;  // longest edge
  double tet_inradius(int t) const;
  double max_diameter() const;
};

/// Kuhn triangulation of the box [lo, hi]^3 into 6 n^3 tets (n subdivisions
/// per axis). Every tet carries tag 3 with the cube diagonal as refinement
/// edge. Throws std::invalid_argument for n < 1 or hi <= lo in any component.
TetMesh build_box_mesh(const Vec3& lo, const Vec3& hi, int n);

/// Bisects every tet in `marked` once, then restores conformity by closure
/// bisections. Tet ids in `marked` refer to `mesh`; out-of-range ids throw
/// std::invalid_argument. The result is conforming with positively oriented
/// tets. `parent` in the result maps to ids of `mesh`.
TetMesh bisect_refine(const TetMesh& mesh, const std::vector<int>& marked);

/// Three rounds of bisecting every tet; halves the mesh size h.
TetMesh uniform_refine(const TetMesh& mesh);

struct MeshFace {
  std::array<int, 3> v;  // sorted vertex ids
  int t0;
  int t1;  // -1 on the mesh boundary
};

/// All faces with their one or two adjacent tets.
std::vector<MeshFace> face_adjacency(const TetMesh& mesh);

/// For each tet, the neighbor tet across each of its four faces
/// (face f is opposite local vertex f of `tets[t]`); -1 on the boundary.
std::vector<std::array<int, 4>> tet_neighbors(const TetMesh& mesh);

/// Vertex-to-tet adjacency in CSR layout: tets adjacent to vertex v are
/// items[offsets[v] .. offsets[v+1[).
struct VertexTetAdjacency {
  std::vector<int> offsets;
  std::vector<int> items;
};
VertexTetAdjacency vertex_to_tets(const TetMesh& mesh);

}  // namespace tracefem
