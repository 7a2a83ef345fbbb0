// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include "tracefem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace tracefem {

namespace {

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c,
                     const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

std::int64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// Stores mverts into tets with positive orientation (swap last two if needed).
std::array<int, 4> oriented(const std::vector<Vec3>& verts,
                            const std::array<int, 4>& mv) {
  std::array<int, 4> t = mv;
  if (signed_volume(verts[t[0]], verts[t[1]], verts[t[2]], verts[t[3]]) < 0.0)
    std::swap(t[2], t[3]);
  return t;
}

}  // namespace

double TetMesh::tet_volume(int t) const {
  auto& v = tets[t];
  return signed_volume(vertices[v[0]], vertices[v[1]], vertices[v[2]],
                       vertices[v[3]]);
}

double TetMesh::tet_diameter(int t) const {
  auto& v = tets[t];
  double d2 = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      d2 = std::max(d2, (vertices[v[i]] - vertices[v[j]]).squaredNorm());
  return std::sqrt(d2);
}

double TetMesh::tet_inradius(int t) const {
  auto& v = tets[t];
  const Vec3& a = vertices[v[0]];
  const Vec3& b = vertices[v[1]];
  const Vec3& c = vertices[v[2]];
  const Vec3& d = vertices[v[3]];
  double area = 0.0;
  area += 0.5 * (c - b).cross(d - b).norm();
  area += 0.5 * (c - a).cross(d - a).norm();
  area += 0.5 * (b - a).cross(d - a).norm();
  area += 0.5 * (b - a).cross(c - a).norm();
  return 3.0 * std::abs(signed_volume(a, b, c, d)) / area;
}

double TetMesh::max_diameter() const {
  double h = 0.0;
  for (int t = 0; t < n_tets(); ++t) h = std::max(h, tet_diameter(t));
  return h;
}

TetMesh build_box_mesh(const Vec3& lo, const Vec3& hi, int n) {
  if (n < 1) throw std::invalid_argument("build_box_mesh: n must be >= 1");
  for (int c = 0; c < 3; ++c)
    if (!(hi[c] > lo[c]))
      throw std::invalid_argument("build_box_mesh: hi must exceed lo");

  TetMesh m;
  int np = n + 1;
  auto vid = [np](int i, int j, int k) { return i + np * (j + np * k); };
  m.vertices.resize(static_cast<std::size_t>(np) * np * np);
  for (int k = 0; k < np; ++k)
    for (int j = 0; j < np; ++j)
      for (int i = 0; i < np; ++i) {
        Vec3 t(static_cast<double>(i) / n, static_cast<double>(j) / n,
               static_cast<double>(k) / n);
        m.vertices[vid(i, j, k)] =
            lo + (hi - lo).cwiseProduct(t);
      }

  // Six Kuhn tets per cube: lattice paths corner -> opposite corner. The
  // Maubach tuple is the path order; the refinement edge (tag 3) is the
  // cube diagonal shared by all six.
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  m.tets.reserve(static_cast<std::size_t>(6) * n * n * n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (auto& p : perms) {
          int c[3] = {i, j, k};
          std::array<int, 4> mv;
          mv[0] = vid(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            c[p[s]] += 1;
            mv[s + 1] = vid(c[0], c[1], c[2]);
          }
          m.mverts.push_back(mv);
          m.mtag.push_back(3);
          m.tets.push_back(oriented(m.vertices, mv));
          m.generation.push_back(0);
          m.parent.push_back(-1);
        }
  return m;
}

namespace {

// Splits slot t of the working mesh at its refinement edge; child 1 replaces
// the slot, child 2 is appended. `origin` tracks the pre-call tet id.
void bisect_one(TetMesh& m, std::vector<int>& origin, int t,
                std::unordered_map<std::int64_t, int>& midpoint) {
  const std::array<int, 4> mv = m.mverts[t];
  const int tag = m.mtag[t];
  const int a = mv[0];
  const int b = mv[tag];
  std::int64_t key = edge_key(a, b);
  auto it = midpoint.find(key);
  int z;
  if (it != midpoint.end()) {
    z = it->second;
  } else {
    z = m.n_vertices();
    m.vertices.push_back(0.5 * (m.vertices[a] + m.vertices[b]));
    midpoint.emplace(key, z);
  }

  std::array<int, 4> c1 = mv;
  c1[tag] = z;
  std::array<int, 4> c2;
  for (int i = 0; i < tag; ++i) c2[i] = mv[i + 1];
  c2[tag] = z;
  for (int i = tag + 1; i < 4; ++i) c2[i] = mv[i];
  std::int8_t ntag = (tag == 1) ? 3 : static_cast<std::int8_t>(tag - 1);

  std::int32_t gen = m.generation[t] + 1;
  int org = origin[t];

  m.mverts[t] = c1;
  m.mtag[t] = ntag;
  m.tets[t] = oriented(m.vertices, c1);
  m.generation[t] = gen;
  origin[t] = org;

  m.mverts.push_back(c2);
  m.mtag.push_back(ntag);
  m.tets.push_back(oriented(m.vertices, c2));
  m.generation.push_back(gen);
  m.parent.push_back(-1);  // rewritten from origin at the end
  origin.push_back(org);
}

}  // namespace

TetMesh bisect_refine(const TetMesh& mesh, const std::vector<int>& marked) {
  for (int t : marked)
    if (t < 0 || t >= mesh.n_tets())
      throw std::invalid_argument("bisect_refine: marked tet id out of range");

  TetMesh m = mesh;
  std::vector<int> origin(m.n_tets());
  for (int t = 0; t < m.n_tets(); ++t) origin[t] = t;

  std::unordered_map<std::int64_t, int> midpoint;

  std::vector<int> work = marked;
  std::sort(work.begin(), work.end());
  work.erase(std::unique(work.begin(), work.end()), work.end());
  for (int t : work) bisect_one(m, origin, t, midpoint);

  // Closure: any tet with an already-split edge gets bisected (at its own
  // refinement edge) until no hanging edges remain. Terminates for meshes
  // descended from a Kuhn triangulation.
  const int max_rounds = 200;
  int round = 0;
  for (;; ++round) {
    if (round >= max_rounds)
      throw std::runtime_error("bisect_refine: closure did not terminate");
    bool changed = false;
    for (int t = 0; t < m.n_tets(); ++t) {
      auto& v = m.tets[t];
      bool split = false;
      for (int i = 0; i < 4 && !split; ++i)
        for (int j = i + 1; j < 4 && !split; ++j)
          if (midpoint.count(edge_key(v[i], v[j]))) split = true;
      if (split) {
        bisect_one(m, origin, t, midpoint);
        --t;  // the slot now holds child 1, re-examine it
        changed = true;
      }
    }
    if (!changed) break;
  }

  // parent = pre-call tet id for every tet (identity for untouched slots)
  m.parent = origin;
  return m;
}

TetMesh uniform_refine(const TetMesh& mesh) {
  TetMesh m = mesh;
  for (int r = 0; r < 3; ++r) {
    std::vector<int> all(m.n_tets());
    for (int t = 0; t < m.n_tets(); ++t) all[t] = t;
    m = bisect_refine(m, all);
  }
  return m;
}

std::vector<MeshFace> face_adjacency(const TetMesh& mesh) {
  struct Entry {
    std::array<int, 3> v;
    int tet;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(mesh.n_tets()) * 4);
  for (int t = 0; t < mesh.n_tets(); ++t) {
    auto& v = mesh.tets[t];
    for (int f = 0; f < 4; ++f) {
      std::array<int, 3> fv;
      int c = 0;
      for (int i = 0; i < 4; ++i)
        if (i != f) fv[c++] = v[i];
      std::sort(fv.begin(), fv.end());
      entries.push_back({fv, t});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.v != b.v) return a.v < b.v;
    return a.tet < b.tet;
  });
  std::vector<MeshFace> faces;
  faces.reserve(entries.size() / 2 + 1);
  for (std::size_t i = 0; i < entries.size();) {
    if (i + 1 < entries.size() && entries[i + 1].v == entries[i].v) {
      faces.push_back({entries[i].v, entries[i].tet, entries[i + 1].tet});
      i += 2;
    } else {
      faces.push_back({entries[i].v, entries[i].tet, -1});
      i += 1;
    }
  }
  return faces;
}

std::vector<std::array<int, 4>> tet_neighbors(const TetMesh& mesh) {
  std::vector<std::array<int, 4>> nb(mesh.n_tets(), {-1, -1, -1, -1});
  auto faces = face_adjacency(mesh);
  auto local_face = [&](int t, const std::array<int, 3>& fv) {
    auto& v = mesh.tets[t];
    for (int f = 0; f < 4; ++f) {
      bool in = false;
      for (int i = 0; i < 3; ++i)
        if (fv[i] == v[f]) in = true;
      if (!in) return f;
    }
    return -1;
  };
  for (auto& f : faces) {
    if (f.t1 < 0) continue;
    nb[f.t0][local_face(f.t0, f.v)] = f.t1;
    nb[f.t1][local_face(f.t1, f.v)] = f.t0;
  }
  return nb;
}

VertexTetAdjacency vertex_to_tets(const TetMesh& mesh) {
  VertexTetAdjacency adj;
  adj.offsets.assign(mesh.n_vertices() + 1, 0);
  for (int t = 0; t < mesh.n_tets(); ++t)
    for (int v : mesh.tets[t]) adj.offsets[v + 1]++;
  for (int v = 0; v < mesh.n_vertices(); ++v)
    adj.offsets[v + 1] += adj.offsets[v];
  adj.items.resize(adj.offsets.back());
  std::vector<int> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
  for (int t = 0; t < mesh.n_tets(); ++t)
    for (int v : mesh.tets[t]) adj.items[cursor[v]++] = t;
  return adj;
}

}  // namespace tracefem
