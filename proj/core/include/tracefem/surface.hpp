// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tracefem/common.hpp"

namespace tracefem {

/// Closed (or planar) surface given by a smooth level-set function phi,
/// negative inside. `closest_point` must be exact to ~1e-12 * feature_size
/// in the band |phi| <= feature_size / 2 around the surface.
class AnalyticSurface {
 public:
  virtual ~AnalyticSurface() = default;

  virtual double phi(const Vec3& x) const = 0;
  virtual Vec3 grad_phi(const Vec3& x) const = 0;
  virtual Vec3 closest_point(const Vec3& x) const = 0;

  /// Smallest curvature radius scale; bounds usable band widths and FD steps.
  virtual double feature_size() const = 0;
  virtual std::string name() const = 0;

  /// Outward unit normal at (the closest point of) x.
  Vec3 normal(const Vec3& x) const;
};

/// Factory. Names: "sphere" (params: r), "torus" (R, rho), "ellipsoid"
/// (a, b, c), "plane" (nx, ny, nz, offset). Missing params take defaults
/// (sphere r=1; torus 1, 0.5; ellipsoid 1.5, 1, 0.5; plane z = offset 0).
/// Unknown names throw std::invalid_argument.
std::unique_ptr<AnalyticSurface> make_surface(const std::string& name,
                                              const std::vector<double>& params = {});

/// phi shifted by a rigid offset: phi_off(x) = phi(x - shift). Used by the
/// conditioning sweeps to move the surface relative to the mesh.
std::unique_ptr<AnalyticSurface> offset_surface(
    std::shared_ptr<const AnalyticSurface> base, const Vec3& shift);

}  // namespace tracefem
