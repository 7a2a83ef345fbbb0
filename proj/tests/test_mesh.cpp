// SPDX-License-Identifier: Apache-2.0
// Part of the tracefem project.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "tracefem/mesh.hpp"

using namespace tracefem;

namespace {

const Vec3 kLo(-4.0 / 3.0, -4.0 / 3.0, -4.0 / 3.0);
const Vec3 kHi(4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0);

// Brute-force face multiset, independent of face_adjacency().
std::map<std::array<int, 3>, std::vector<int>> face_map(const TetMesh& m) {
  std::map<std::array<int, 3>, std::vector<int>> faces;
  for (int t = 0; t < m.n_tets(); ++t) {
    const auto& tet = m.tets[t];
    for (int f = 0; f < 4; ++f) {
      std::array<int, 3> key;
      int j = 0;
      for (int i = 0; i < 4; ++i)
        if (i != f) key[j++] = tet[i];
      std::sort(key.begin(), key.end());
      faces[key].push_back(t);
    }
  }
  return faces;
}

bool on_box_boundary(const TetMesh& m, const std::array<int, 3>& face) {
  for (int axis = 0; axis < 3; ++axis) {
    for (double plane : {kLo[axis], kHi[axis]}) {
      bool all = true;
      for (int v : face)
        if (std::abs(m.vertices[v][axis] - plane) > 1e-12) all = false;
      if (all) return true;
    }
  }
  return false;
}

// Every face is shared by exactly two tets unless it lies on the box boundary.
void check_conforming(const TetMesh& m) {
  auto faces = face_map(m);
  for (const auto& [key, owners] : faces) {
    REQUIRE(owners.size() <= 2);
    if (owners.size() == 1) REQUIRE(on_box_boundary(m, key));
  }
}

void check_oriented(const TetMesh& m) {
  for (int t = 0; t < m.n_tets(); ++t) REQUIRE(m.tet_volume(t) > 0.0);
}

double total_volume(const TetMesh& m) {
  double s = 0.0;
  for (int t = 0; t < m.n_tets(); ++t) s += m.tet_volume(t);
  return s;
}

double min_quality(const TetMesh& m) {
  double q = 1e300;
  for (int t = 0; t < m.n_tets(); ++t)
    q = std::min(q, m.tet_inradius(t) / m.tet_diameter(t));
  return q;
}

}  // namespace

TEST_CASE("box mesh: counts, orientation, conformity, volume") {
  for (int n : {1, 2, 3}) {
    TetMesh m = build_box_mesh(kLo, kHi, n);
    CHECK(m.n_tets() == 6 * n * n * n);
    CHECK(m.n_vertices() == (n + 1) * (n + 1) * (n + 1));
    check_oriented(m);
    check_conforming(m);
    const double box_vol = std::pow(8.0 / 3.0, 3);
    CHECK(total_volume(m) == doctest::Approx(box_vol).epsilon(1e-12));
    // Kuhn tets keep the cube diagonal as the tag-3 refinement edge.
    for (int t = 0; t < m.n_tets(); ++t) {
      CHECK(m.mtag[t] == 3);
      std::array<int, 4> a = m.tets[t], b = m.mverts[t];
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
      const Vec3 d = m.vertices[m.mverts[t][3]] - m.vertices[m.mverts[t][0]];
      const double hcube = (8.0 / 3.0) / n;
      CHECK(d.norm() == doctest::Approx(std::sqrt(3.0) * hcube).epsilon(1e-12));
    }
  }
}

TEST_CASE("invalid box arguments throw") {
  CHECK_THROWS(build_box_mesh(kLo, kHi, 0));
  CHECK_THROWS(build_box_mesh(kHi, kLo, 2));
}

TEST_CASE("uniform refinement: 8x tets, halved h, conforming, volume kept") {
  TetMesh m = build_box_mesh(kLo, kHi, 2);
  const double h0 = m.max_diameter();
  const double v0 = total_volume(m);
  TetMesh r = uniform_refine(m);
  CHECK(r.n_tets() == 8 * m.n_tets());
  CHECK(r.max_diameter() == doctest::Approx(0.5 * h0).epsilon(1e-12));
  CHECK(total_volume(r) == doctest::Approx(v0).epsilon(1e-12));
  check_oriented(r);
  check_conforming(r);
  for (int t = 0; t < r.n_tets(); ++t) CHECK(r.generation[t] == 3);
}

TEST_CASE("shape regularity is preserved under uniform refinement") {
  TetMesh m = build_box_mesh(kLo, kHi, 1);
  const double q0 = min_quality(m);
  TetMesh r = m;
  for (int round = 0; round < 2; ++round) {
    r = uniform_refine(r);
    // Kuhn bisection cycles through 3 similarity classes, so quality after a
    // full cycle matches the coarse mesh exactly.
    CHECK(min_quality(r) == doctest::Approx(q0).epsilon(1e-12));
  }
}

TEST_CASE("local refinement stays conforming and tracks parents") {
  TetMesh m = build_box_mesh(kLo, kHi, 2);
  std::vector<int> marked = {0, 7, 11, 30};
  TetMesh r = bisect_refine(m, marked);
  CHECK(r.n_tets() > m.n_tets());
  check_oriented(r);
  check_conforming(r);
  CHECK(total_volume(r) == doctest::Approx(total_volume(m)).epsilon(1e-12));
  REQUIRE(static_cast<int>(r.parent.size()) == r.n_tets());
  // every marked tet got bisected: its slot must carry a higher generation
  std::vector<char> seen(m.n_tets(), 0);
  for (int t = 0; t < r.n_tets(); ++t) {
    REQUIRE(r.parent[t] >= 0);
    REQUIRE(r.parent[t] < m.n_tets());
    seen[r.parent[t]] = 1;
    CHECK(r.generation[t] >= m.generation[r.parent[t]]);
  }
  for (int t = 0; t < m.n_tets(); ++t) CHECK(seen[t] == 1);
  for (int t : marked) {
    bool bisected = false;
    for (int s = 0; s < r.n_tets(); ++s)
      if (r.parent[s] == t && r.generation[s] == m.generation[t] + 1)
        bisected = true;
    CHECK(bisected);
  }
}

TEST_CASE("bisect_refine rejects bad ids") {
  TetMesh m = build_box_mesh(kLo, kHi, 1);
  CHECK_THROWS(bisect_refine(m, {-1}));
  CHECK_THROWS(bisect_refine(m, {m.n_tets()}));
}

TEST_CASE("repeated local refinement keeps quality bounded") {
  TetMesh m = build_box_mesh(kLo, kHi, 1);
  const double q0 = min_quality(m);
  // refine around one corner repeatedly; Maubach guarantees finitely many
  // similarity classes, so quality cannot degenerate
  for (int round = 0; round < 8; ++round) {
    std::vector<int> marked;
    for (int t = 0; t < m.n_tets(); ++t) {
      bool corner = false;
      for (int v : m.tets[t])
        if ((m.vertices[v] - kLo).norm() < 1e-12) corner = true;
      if (corner) marked.push_back(t);
    }
    REQUIRE(!marked.empty());
    m = bisect_refine(m, marked);
    check_oriented(m);
    check_conforming(m);
  }
  CHECK(min_quality(m) >= 0.3 * q0);
}

TEST_CASE("face_adjacency matches brute force") {
  TetMesh m = uniform_refine(build_box_mesh(kLo, kHi, 1));
  auto faces = face_adjacency(m);
  auto brute = face_map(m);
  REQUIRE(faces.size() == brute.size());
  for (const auto& f : faces) {
    auto it = brute.find(f.v);
    REQUIRE(it != brute.end());
    std::set<int> got = {f.t0};
    if (f.t1 >= 0) got.insert(f.t1);
    std::set<int> want(it->second.begin(), it->second.end());
    CHECK(got == want);
  }
}

TEST_CASE("tet_neighbors matches brute force") {
  TetMesh m = uniform_refine(build_box_mesh(kLo, kHi, 1));
  auto nb = tet_neighbors(m);
  auto brute = face_map(m);
  REQUIRE(static_cast<int>(nb.size()) == m.n_tets());
  for (int t = 0; t < m.n_tets(); ++t) {
    for (int f = 0; f < 4; ++f) {
      std::array<int, 3> key;
      int j = 0;
      for (int i = 0; i < 4; ++i)
        if (i != f) key[j++] = m.tets[t][i];
      std::sort(key.begin(), key.end());
      const auto& owners = brute.at(key);
      int want = -1;
      for (int o : owners)
        if (o != t) want = o;
      CHECK(nb[t][f] == want);
    }
  }
}

TEST_CASE("vertex_to_tets matches brute force") {
  TetMesh m = build_box_mesh(kLo, kHi, 2);
  auto adj = vertex_to_tets(m);
  REQUIRE(static_cast<int>(adj.offsets.size()) == m.n_vertices() + 1);
  for (int v = 0; v < m.n_vertices(); ++v) {
    std::set<int> got(adj.items.begin() + adj.offsets[v],
                      adj.items.begin() + adj.offsets[v + 1]);
    std::set<int> want;
    for (int t = 0; t < m.n_tets(); ++t)
      for (int w : m.tets[t])
        if (w == v) want.insert(t);
    CHECK(got == want);
  }
}
