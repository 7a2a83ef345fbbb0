// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include "tracefem/fe_space.hpp"

#include <algorithm>
#include <stdexcept>

namespace tracefem {

namespace {

constexpr int kLocalEdges[6][2] = {{0, 1}, {0, 2}, {0, 3},
                                   {1, 2}, {1, 3}, {2, 3}};

}  // namespace

FeSpace::FeSpace(const TetMesh& mesh, int degree)
    : mesh_(&mesh), degree_(degree) {
  if (degree != 1 && degree != 2)
    throw std::invalid_argument("FeSpace: degree must be 1 or 2");
  tet_dofs_.resize(mesh.n_tets());
  if (degree == 1) {
    n_dofs_ = mesh.n_vertices();
    for (int t = 0; t < mesh.n_tets(); ++t) {
      auto& v = mesh.tets[t];
      tet_dofs_[t] = {v[0], v[1], v[2], v[3], -1, -1, -1, -1, -1, -1};
    }
    return;
  }
  edges_.reserve(static_cast<std::size_t>(mesh.n_tets()) * 6);
  for (int t = 0; t < mesh.n_tets(); ++t) {
    auto& v = mesh.tets[t];
    for (auto& e : kLocalEdges) {
      int a = v[e[0]], b = v[e[1]];
      if (a > b) std::swap(a, b);
      edges_.push_back({a, b});
    }
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  n_dofs_ = mesh.n_vertices() + static_cast<int>(edges_.size());

  for (int t = 0; t < mesh.n_tets(); ++t) {
    auto& v = mesh.tets[t];
    auto& d = tet_dofs_[t];
    for (int i = 0; i < 4; ++i) d[i] = v[i];
    for (int le = 0; le < 6; ++le) {
      int a = v[kLocalEdges[le][0]], b = v[kLocalEdges[le][1]];
      if (a > b) std::swap(a, b);
      std::array<int, 2> key{a, b};
      auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
      d[4 + le] = mesh.n_vertices() + static_cast<int>(it - edges_.begin());
    }
  }
}

Vec3 FeSpace::dof_point(int i) const {
  if (i < mesh_->n_vertices()) return mesh_->vertices[i];
  auto& e = edges_[i - mesh_->n_vertices()];
  return 0.5 * (mesh_->vertices[e[0]] + mesh_->vertices[e[1]]);
}

std::vector<Vec3> FeSpace::local_node_ref() const {
  std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  if (degree_ == 2)
    for (auto& e : kLocalEdges)
      pts.push_back(0.5 * (pts[e[0]] + pts[e[1]]));
  return pts;
}

TetMap tet_map(const TetMesh& mesh, int t) {
  TetMap m;
  auto& v = mesh.tets[t];
  m.v0 = mesh.vertices[v[0]];
  for (int c = 0; c < 3; ++c) m.B.col(c) = mesh.vertices[v[c + 1]] - m.v0;
  m.detB = m.B.determinant();
  m.Binv = m.B.inverse();
  return m;
}

BasisEval eval_basis(const FeSpace& space, int tet, const Vec3& ref) {
  BasisEval out;
  TetMap map = tet_map(space.mesh(), tet);
  double l[4] = {1.0 - ref[0] - ref[1] - ref[2], ref[0], ref[1], ref[2]};
  Vec3 gl[4];
  gl[0] = map.Binv.transpose() * Vec3(-1, -1, -1);
  for (int i = 0; i < 3; ++i) gl[i + 1] = map.Binv.row(i).transpose();

  if (space.degree() == 1) {
    out.count = 4;
    for (int i = 0; i < 4; ++i) {
      out.value[i] = l[i];
      out.grad[i] = gl[i];
    }
    return out;
  }
  out.count = 10;
  for (int i = 0; i < 4; ++i) {
    out.value[i] = l[i] * (2.0 * l[i] - 1.0);
    out.grad[i] = (4.0 * l[i] - 1.0) * gl[i];
  }
  for (int le = 0; le < 6; ++le) {
    int i = kLocalEdges[le][0], j = kLocalEdges[le][1];
    out.value[4 + le] = 4.0 * l[i] * l[j];
    out.grad[4 + le] = 4.0 * (l[j] * gl[i] + l[i] * gl[j]);
  }
  return out;
}

std::array<Mat3, 10> basis_hessians(const FeSpace& space, int tet) {
  std::array<Mat3, 10> h;
  for (auto& m : h) m.setZero();
  if (space.degree() == 1) return h;
  TetMap map = tet_map(space.mesh(), tet);
  Vec3 gl[4];
  gl[0] = map.Binv.transpose() * Vec3(-1, -1, -1);
  for (int i = 0; i < 3; ++i) gl[i + 1] = map.Binv.row(i).transpose();
  for (int i = 0; i < 4; ++i) h[i] = 4.0 * gl[i] * gl[i].transpose();
  for (int le = 0; le < 6; ++le) {
    int i = kLocalEdges[le][0], j = kLocalEdges[le][1];
    h[4 + le] = 4.0 * (gl[i] * gl[j].transpose() + gl[j] * gl[i].transpose());
  }
  return h;
}

Eigen::VectorXd nodal_interpolate(
    const FeSpace& space, const std::function<double(const Vec3&)>& f) {
  Eigen::VectorXd u(space.n_dofs());
  for (int i = 0; i < space.n_dofs(); ++i) u[i] = f(space.dof_point(i));
  return u;
}

ActiveDofMap make_active_dof_map(const FeSpace& space,
                                 const std::vector<int>& active_tets) {
  ActiveDofMap map;
  map.active_to_global.reserve(active_tets.size() * 10);
  for (int t : active_tets) {
    auto& d = space.tet_dofs(t);
    for (int i = 0; i < space.dofs_per_tet(); ++i)
      map.active_to_global.push_back(d[i]);
  }
  std::sort(map.active_to_global.begin(), map.active_to_global.end());
  map.active_to_global.erase(
      std::unique(map.active_to_global.begin(), map.active_to_global.end()),
      map.active_to_global.end());
  map.n_active = static_cast<int>(map.active_to_global.size());
  map.global_to_active.assign(space.n_dofs(), -1);
  for (int a = 0; a < map.n_active; ++a)
    map.global_to_active[map.active_to_global[a]] = a;
  return map;
}

}  // namespace tracefem
