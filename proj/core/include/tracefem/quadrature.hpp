// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "tracefem/common.hpp"

namespace tracefem {

enum class RefCell { triangle, tetrahedron };

/// Quadrature rule on the reference triangle {x,y >= 0, x+y <= 1} (z == 0)
/// or reference tetrahedron {x,y,z >= 0, x+y+z <= 1}.
/// All weights are strictly positive and sum to the reference measure
/// (1/2 for the triangle, 1/6 for the tetrahedron).
struct QuadRule {
  RefCell cell;
  int degree;  // polynomial exactness, >= the requested degree
  std::vector<Vec3> points;
  std::vector<double> weights;

  int size() const { return static_cast<int>(points.size()); }
};

/// Returns a positive-weight rule exact for polynomials up to `degree`.
/// Low degrees come from classical tables, higher degrees from a
/// conical-product construction. Supported range: 0 <= degree <= 14.
/// Throws std::invalid_argument outside that range.
const QuadRule& get_rule(RefCell cell, int degree);

/// n-point Gauss-Legendre rule on [0,1], exact to degree 2n-1.
struct QuadRule1d {
  std::vector<double> points;
  std::vector<double> weights;
};
QuadRule1d gauss_legendre_01(int n);

}  // namespace tracefem
