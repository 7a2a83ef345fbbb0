// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include "tracefem/surface.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tracefem {

Vec3 AnalyticSurface::normal(const Vec3& x) const {
  Vec3 g = grad_phi(closest_point(x));
  return g / g.norm();
}

namespace {

class Sphere final : public AnalyticSurface {
 public:
  explicit Sphere(double r) : r_(r) {
    if (r <= 0.0) throw std::invalid_argument("sphere: radius must be > 0");
  }
  double phi(const Vec3& x) const override { return x.norm() - r_; }
  Vec3 grad_phi(const Vec3& x) const override { return x / x.norm(); }
  Vec3 closest_point(const Vec3& x) const override {
    return (r_ / x.norm()) * x;
  }
  double feature_size() const override { return r_; }
  std::string name() const override { return "sphere"; }

 private:
  double r_;
};

class Torus final : public AnalyticSurface {
 public:
  Torus(double R, double rho) : R_(R), rho_(rho) {
    if (R <= 0.0 || rho <= 0.0 || rho >= R)
      throw std::invalid_argument("torus: need 0 < rho < R");
  }
  double phi(const Vec3& x) const override {
    double q = std::hypot(x[0], x[1]) - R_;
    return std::hypot(q, x[2]) - rho_;
  }
  Vec3 grad_phi(const Vec3& x) const override {
    double rxy = std::hypot(x[0], x[1]);
    double q = rxy - R_;
    double s = std::hypot(q, x[2]);
    return Vec3(q * x[0] / (rxy * s), q * x[1] / (rxy * s), x[2] / s);
  }
  Vec3 closest_point(const Vec3& x) const override {
    double rxy = std::hypot(x[0], x[1]);
    Vec3 core(R_ * x[0] / rxy, R_ * x[1] / rxy, 0.0);
    Vec3 d = x - core;
    return core + (rho_ / d.norm()) * d;
  }
  double feature_size() const override { return rho_; }
  std::string name() const override { return "torus"; }

 private:
  double R_, rho_;
};

class Ellipsoid final : public AnalyticSurface {
 public:
  Ellipsoid(double a, double b, double c) : ax_{a, b, c} {
    for (double s : ax_)
      if (s <= 0.0)
        throw std::invalid_argument("ellipsoid: semi-axes must be > 0");
  }
  double phi(const Vec3& x) const override {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += x[i] * x[i] / (ax_[i] * ax_[i]);
    return s - 1.0;
  }
  Vec3 grad_phi(const Vec3& x) const override {
    Vec3 g;
    for (int i = 0; i < 3; ++i) g[i] = 2.0 * x[i] / (ax_[i] * ax_[i]);
    return g;
  }
  // Lagrange condition: p_i = x_i / (1 + mu d_i), d_i = 1/a_i^2, with mu
  // chosen so phi(p) = 0. g(mu) is monotone decreasing; safeguarded Newton.
  Vec3 closest_point(const Vec3& x) const override {
    double d[3];
    for (int i = 0; i < 3; ++i) d[i] = 1.0 / (ax_[i] * ax_[i]);
    auto eval = [&](double mu, double& g, double& dg) {
      g = -1.0;
      dg = 0.0;
      for (int i = 0; i < 3; ++i) {
        double den = 1.0 + mu * d[i];
        double t = x[i] / den;
        g += d[i] * t * t;
        dg += -2.0 * d[i] * d[i] * t * t / den;
      }
    };
    double mu = 0.0, g, dg;
    eval(mu, g, dg);
    // bracket [lo, hi] with g(lo) >= 0 >= g(hi)
    double lo = mu, hi = mu;
    if (g > 0.0) {
      double step = 0.1;
      while (g > 0.0) {
        lo = hi;
        hi += step;
        step *= 2.0;
        eval(hi, g, dg);
        if (hi > 1e6) throw std::runtime_error("ellipsoid: projection failed");
      }
    } else {
      double dmax = *std::max_element(d, d + 3);
      double step = 0.1;
      double bound = -1.0 / dmax;
      while (g < 0.0) {
        hi = lo;
        lo = std::max(lo - step, 0.5 * (lo + bound));
        step *= 2.0;
        eval(lo, g, dg);
        if (hi - lo < 1e-15 && g < 0.0)
          throw std::runtime_error("ellipsoid: projection failed");
      }
    }
    mu = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
      eval(mu, g, dg);
      if (std::abs(g) < 1e-14) break;
      if (g > 0.0)
        lo = mu;
      else
        hi = mu;
      double nmu = mu - g / dg;
      mu = (nmu > lo && nmu < hi) ? nmu : 0.5 * (lo + hi);
    }
    Vec3 p;
    for (int i = 0; i < 3; ++i) p[i] = x[i] / (1.0 + mu * d[i]);
    return p;
  }
  double feature_size() const override {
    // smallest curvature radius: min(b^2, c^2)/a over suitable pairings;
    // min over axes of (min other axis)^2 / (max axis) is a safe lower bound
    double amax = std::max({ax_[0], ax_[1], ax_[2]});
    double amin = std::min({ax_[0], ax_[1], ax_[2]});
    return amin * amin / amax;
  }
  std::string name() const override { return "ellipsoid"; }

 private:
  double ax_[3];
};

class Plane final : public AnalyticSurface {
 public:
  Plane(const Vec3& n, double offset) : n_(n / n.norm()), off_(offset) {
    if (n.norm() < 1e-14)
      throw std::invalid_argument("plane: zero normal");
  }
  double phi(const Vec3& x) const override { return n_.dot(x) - off_; }
  Vec3 grad_phi(const Vec3&) const override { return n_; }
  Vec3 closest_point(const Vec3& x) const override {
    return x - (n_.dot(x) - off_) * n_;
  }
  double feature_size() const override { return 1.0; }
  std::string name() const override { return "plane"; }

 private:
  Vec3 n_;
  double off_;
};

class OffsetSurface final : public AnalyticSurface {
 public:
  OffsetSurface(std::shared_ptr<const AnalyticSurface> base, const Vec3& shift)
      : base_(std::move(base)), shift_(shift) {}
  double phi(const Vec3& x) const override { return base_->phi(x - shift_); }
  Vec3 grad_phi(const Vec3& x) const override {
    return base_->grad_phi(x - shift_);
  }
  Vec3 closest_point(const Vec3& x) const override {
    return base_->closest_point(x - shift_) + shift_;
  }
  double feature_size() const override { return base_->feature_size(); }
  std::string name() const override { return base_->name() + "+offset"; }

 private:
  std::shared_ptr<const AnalyticSurface> base_;
  Vec3 shift_;
};

double param(const std::vector<double>& p, std::size_t i, double dflt) {
  return i < p.size() ? p[i] : dflt;
}

}  // namespace

std::unique_ptr<AnalyticSurface> make_surface(const std::string& name,
                                              const std::vector<double>& p) {
  if (name == "sphere") return std::make_unique<Sphere>(param(p, 0, 1.0));
  if (name == "torus")
    return std::make_unique<Torus>(param(p, 0, 1.0), param(p, 1, 0.5));
  if (name == "ellipsoid")
    return std::make_unique<Ellipsoid>(param(p, 0, 1.5), param(p, 1, 1.0),
                                       param(p, 2, 0.5));
  if (name == "plane")
    return std::make_unique<Plane>(
        Vec3(param(p, 0, 0.0), param(p, 1, 0.0), param(p, 2, 1.0)),
        param(p, 3, 0.0));
  throw std::invalid_argument(
      "make_surface: unknown surface '" + name +
      "' (valid: sphere, torus, ellipsoid, plane)");
}

std::unique_ptr<AnalyticSurface> offset_surface(
    std::shared_ptr<const AnalyticSurface> base, const Vec3& shift) {
  return std::make_unique<OffsetSurface>(std::move(base), shift);
}

}  // namespace tracefem
