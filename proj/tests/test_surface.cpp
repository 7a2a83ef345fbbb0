// SPDX-License-Identifier: Apache-2.0
// Part of the tracefem project.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "tracefem/surface.hpp"

using namespace tracefem;

namespace {

// Random point within |phi| <~ feature_size/2 of the surface, by shooting
// from a random direction and walking to the band.
Vec3 band_point(const AnalyticSurface& s, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int tries = 0; tries < 100; ++tries) {
    Vec3 dir(g(rng), g(rng), g(rng));
    dir.normalize();
    Vec3 x = dir * 1.2;  // works for all factory defaults, may be off-band
    Vec3 p = s.closest_point(x);
    Vec3 q = p + s.normal(p) * (u(rng) * s.feature_size());
    if (std::abs(s.phi(q)) < 0.5 * s.feature_size()) return q;
  }
  return Vec3(1, 0, 0);
}

void check_surface_properties(const AnalyticSurface& s) {
  std::mt19937_64 rng(42);
  CHECK(s.feature_size() > 0.0);
  const double fs = s.feature_size();
  for (int trial = 0; trial < 200; ++trial) {
    Vec3 x = band_point(s, rng);
    Vec3 p = s.closest_point(x);

    // closest point lies on the surface
    CHECK(std::abs(s.phi(p)) <= 1e-10 * fs);

    // x - p is parallel to the surface normal at p
    Vec3 n = s.normal(p);
    CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-10));
    double dist = (x - p).norm();
    if (dist > 1e-12 * fs) {
      Vec3 d = (x - p) / dist;
      CHECK(std::abs(std::abs(d.dot(n)) - 1.0) <= 1e-8);
    }

    // local minimality: p beats nearby surface points
    for (int k = 0; k < 4; ++k) {
      std::normal_distribution<double> g(0.0, 1.0);
      Vec3 t(g(rng), g(rng), g(rng));
      t -= t.dot(n) * n;
      if (t.norm() < 1e-12) continue;
      t.normalize();
      Vec3 q = s.closest_point(p + 0.05 * fs * t);
      CHECK((x - q).norm() >= dist - 1e-9 * fs);
    }

    // gradient consistency with central differences
    const double h = 1e-5 * fs;
    Vec3 grad_fd;
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 e = Vec3::Zero();
      e[axis] = h;
      grad_fd[axis] = (s.phi(x + e) - s.phi(x - e)) / (2 * h);
    }
    CHECK((s.grad_phi(x) - grad_fd).norm() <= 1e-7 * (1 + s.grad_phi(x).norm()));

    // phi sign convention: outside along the normal is positive
    CHECK(s.phi(p + 0.1 * fs * n) > 0.0);
    CHECK(s.phi(p - 0.1 * fs * n) < 0.0);
  }
}

}  // namespace

TEST_CASE("sphere properties and exact values") {
  auto s = make_surface("sphere", {2.0});
  check_surface_properties(*s);
  CHECK(s->phi(Vec3(3, 0, 0)) == doctest::Approx(1.0));
  CHECK(s->phi(Vec3(0, 0, 0)) == doctest::Approx(-2.0));
  Vec3 p = s->closest_point(Vec3(5, 0, 0));
  CHECK((p - Vec3(2, 0, 0)).norm() <= 1e-12);
  CHECK(s->name() == "sphere");
}

TEST_CASE("torus properties") {
  auto s = make_surface("torus", {1.0, 0.5});
  check_surface_properties(*s);
  // point on the outer equator
  CHECK(std::abs(s->phi(Vec3(1.5, 0, 0))) <= 1e-12);
  CHECK(std::abs(s->phi(Vec3(0, 0.5, 0))) <= 1e-12);
  CHECK(s->feature_size() == doctest::Approx(0.5));
}

TEST_CASE("ellipsoid properties") {
  auto s = make_surface("ellipsoid", {1.5, 1.0, 0.5});
  check_surface_properties(*s);
  for (Vec3 axis_pt : {Vec3(1.5, 0, 0), Vec3(0, 1.0, 0), Vec3(0, 0, 0.5)})
    CHECK(std::abs(s->phi(axis_pt)) <= 1e-10);
  // closest point from far out on the long axis
  Vec3 p = s->closest_point(Vec3(4, 0, 0));
  CHECK((p - Vec3(1.5, 0, 0)).norm() <= 1e-9);
}

TEST_CASE("plane properties") {
  auto s = make_surface("plane", {0, 0, 1, 0.25});
  CHECK(std::abs(s->phi(Vec3(3, -2, 0.25))) <= 1e-14);
  CHECK(s->phi(Vec3(0, 0, 1.25)) == doctest::Approx(1.0));
  Vec3 p = s->closest_point(Vec3(0.3, 0.4, 2.0));
  CHECK((p - Vec3(0.3, 0.4, 0.25)).norm() <= 1e-13);
}

TEST_CASE("factory defaults and errors") {
  CHECK(make_surface("sphere")->name() == "sphere");
  CHECK(std::abs(make_surface("sphere")->phi(Vec3(1, 0, 0))) <= 1e-14);
  CHECK(make_surface("torus")->name() == "torus");
  CHECK(make_surface("ellipsoid")->name() == "ellipsoid");
  CHECK(make_surface("plane")->name() == "plane");
  CHECK_THROWS(make_surface("klein_bottle"));
}

TEST_CASE("offset surface shifts phi rigidly") {
  std::shared_ptr<const AnalyticSurface> base = make_surface("sphere");
  Vec3 shift(0.03, -0.02, 0.011);
  auto off = offset_surface(base, shift);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vec3 x(g(rng), g(rng), g(rng));
    CHECK(off->phi(x) == doctest::Approx(base->phi(x - shift)).epsilon(1e-14));
    CHECK((off->grad_phi(x) - base->grad_phi(x - shift)).norm() <= 1e-14);
    CHECK((off->closest_point(x) - (base->closest_point(x - shift) + shift)).norm() <=
          1e-12);
  }
  CHECK(off->feature_size() == base->feature_size());
}
