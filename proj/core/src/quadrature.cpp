// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include "tracefem/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace tracefem {

namespace {

// Gauss rule on [-1,1] for the Jacobi weight (1-x)^a (1+x)^b via the
// Golub-Welsch eigenvalue method on the symmetrized recurrence matrix.
void gauss_jacobi(int n, double a, double b, std::vector<double>& x,
                  std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double s = 2.0 * k + a + b;
    double diag;
    if (k == 0)
      diag = (b - a) / (a + b + 2.0);
    else
      diag = (b * b - a * a) / (s * (s + 2.0));
    J(k, k) = diag;
    if (k >= 1) {
      double num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
      double den = s * s * (s + 1.0) * (s - 1.0);
      double off = std::sqrt(num / den);
      J(k, k - 1) = J(k - 1, k) = off;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  double mu0 = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) *
               std::tgamma(b + 1.0) / std::tgamma(a + b + 2.0);
  x.resize(n);
  w.resize(n);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()(k);
    double v = es.eigenvectors()(0, k);
    w[k] = mu0 * v * v;
  }
}

// Gauss rule on [0,1] with weight (1-t)^alpha, exact to degree 2n-1.
void gauss_jacobi_01(int n, double alpha, std::vector<double>& t,
                     std::vector<double>& w) {
  std::vector<double> x, wx;
  gauss_jacobi(n, 0.0, alpha, x, wx);
  t.resize(n);
  w.resize(n);
  double scale = std::pow(2.0, alpha + 1.0);
  for (int k = 0; k < n; ++k) {
    t[k] = 0.5 * (1.0 - x[k]);
    w[k] = wx[k] / scale;
  }
}

// Conical-product rule on the reference triangle, exact to `degree`.
QuadRule conical_triangle(int degree) {
  int n = (degree + 2) / 2;  // ceil((degree+1)/2)
  std::vector<double> t1, w1, t2, w2;
  gauss_jacobi_01(n, 1.0, t1, w1);  // weight (1-x)
  gauss_jacobi_01(n, 0.0, t2, w2);  // Legendre
  QuadRule r;
  r.cell = RefCell::triangle;
  r.degree = degree;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double x = t1[i];
      double y = t2[j] * (1.0 - t1[i]);
      r.points.emplace_back(x, y, 0.0);
      r.weights.push_back(w1[i] * w2[j]);
    }
  return r;
}

// Conical-product rule on the reference tetrahedron.
QuadRule conical_tetrahedron(int degree) {
  int n = (degree + 2) / 2;
  std::vector<double> t1, w1, t2, w2, t3, w3;
  gauss_jacobi_01(n, 2.0, t1, w1);  // weight (1-x)^2
  gauss_jacobi_01(n, 1.0, t2, w2);  // weight (1-x)
  gauss_jacobi_01(n, 0.0, t3, w3);  // Legendre
  QuadRule r;
  r.cell = RefCell::tetrahedron;
  r.degree = degree;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double x = t1[i];
        double y = t2[j] * (1.0 - t1[i]);
        double z = t3[k] * (1.0 - t1[i]) * (1.0 - t2[j]);
        r.points.emplace_back(x, y, z);
        r.weights.push_back(w1[i] * w2[j] * w3[k]);
      }
  return r;
}

// Appends the three permutations of (1-2a, a, a) in barycentric form,
// stored as reference coordinates (x,y) = (l1, l2) with l0 = 1-x-y.
void tri_perm3(QuadRule& r, double a, double w) {
  double b = 1.0 - 2.0 * a;
  r.points.emplace_back(b, a, 0.0);
  r.points.emplace_back(a, b, 0.0);
  r.points.emplace_back(a, a, 0.0);
  for (int i = 0; i < 3; ++i) r.weights.push_back(w);
}

// Appends the six permutations of (a, b, 1-a-b).
void tri_perm6(QuadRule& r, double a, double b, double w) {
  double c = 1.0 - a - b;
  const double l[6][3] = {{a, b, c}, {a, c, b}, {b, a, c},
                          {b, c, a}, {c, a, b}, {c, b, a}};
  for (auto& p : l) {
    r.points.emplace_back(p[1], p[2], 0.0);
    r.weights.push_back(w);
  }
}

// Classical all-positive triangle tables (weights normalized to sum 1/2).
QuadRule table_triangle(int degree) {
  QuadRule r;
  r.cell = RefCell::triangle;
  r.degree = degree;
  switch (degree) {
    case 0:
    case 1:
      r.degree = 1;
      r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0, 0.0);
      r.weights.push_back(0.5);
      break;
    case 2:
      tri_perm3(r, 1.0 / 6.0, 1.0 / 6.0);
      break;
    case 3:  // the classical degree-3 table has a negative weight; use degree 4
    case 4:
      r.degree = 4;
      tri_perm3(r, 0.445948490915965, 0.5 * 0.223381589678011);
      tri_perm3(r, 0.091576213509771, 0.5 * 0.109951743655322);
      break;
    case 5:
      r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0, 0.0);
      r.weights.push_back(0.5 * 0.225);
      tri_perm3(r, 0.470142064105115, 0.5 * 0.132394152788506);
      tri_perm3(r, 0.101286507323456, 0.5 * 0.125939180544827);
      break;
    case 6:
      tri_perm3(r, 0.249286745170910, 0.5 * 0.116786275726379);
      tri_perm3(r, 0.063089014491502, 0.5 * 0.050844906370207);
      tri_perm6(r, 0.310352451033785, 0.053145049844816,
                0.5 * 0.082851075618374);
      break;
    default:
      return conical_triangle(degree);
  }
  return r;
}

QuadRule table_tetrahedron(int degree) {
  QuadRule r;
  r.cell = RefCell::tetrahedron;
  r.degree = degree;
  switch (degree) {
    case 0:
    case 1:
      r.degree = 1;
      r.points.emplace_back(0.25, 0.25, 0.25);
      r.weights.push_back(1.0 / 6.0);
      break;
    case 2: {
      double a = 0.585410196624969;
      double b = 0.138196601125011;
      r.points.emplace_back(a, b, b);
      r.points.emplace_back(b, a, b);
      r.points.emplace_back(b, b, a);
      r.points.emplace_back(b, b, b);
      for (int i = 0; i < 4; ++i) r.weights.push_back(1.0 / 24.0);
      break;
    }
    default:
      return conical_tetrahedron(degree);
  }
  return r;
}

}  // namespace

const QuadRule& get_rule(RefCell cell, int degree) {
  if (degree < 0 || degree > 14)
    throw std::invalid_argument("get_rule: degree must be in [0, 14], got " +
                                std::to_string(degree));
  static std::map<std::pair<int, int>, QuadRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(static_cast<int>(cell), degree);
  auto it = cache.find(key);
  if (it == cache.end()) {
    QuadRule r = (cell == RefCell::triangle) ? table_triangle(degree)
                                             : table_tetrahedron(degree);
    it = cache.emplace(key, std::move(r)).first;
  }
  return it->second;
}

QuadRule1d gauss_legendre_01(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_01: n must be >= 1");
  QuadRule1d r;
  std::vector<double> x, w;
  gauss_jacobi(n, 0.0, 0.0, x, w);
  r.points.resize(n);
  r.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    r.points[k] = 0.5 * (1.0 + x[k]);
    r.weights[k] = 0.5 * w[k];
  }
  return r;
}

}  // namespace tracefem
