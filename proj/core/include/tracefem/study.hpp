// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tracefem/error_norms.hpp"
#include "tracefem/estimator.hpp"

namespace tracefem {

/// Configuration of a study run. Every field has a CLI flag and a config
/// file key of the same name.
struct StudyConfig {
  std::string study = "convergence";
  std::string surface = "sphere";
  std::vector<double> surface_params;  // defaults applied by make_surface
  int m = 1;
  int k = 1;
  std::string stab = "normal_volume";
  double rho_s = -1.0;  // < 0: default for the kind
  int levels = 4;
  int n0 = 8;
  double box_lo = -4.0 / 3.0;
  double box_hi = 4.0 / 3.0;
  double eps = 1e-3;     // supg diffusion
  double sigma = -1.0;   // spike width, < 0: 0.1 r
  double theta = 0.5;    // Dorfler
  int max_steps = 25;
  long dof_budget = 20000;
  int offsets = 20;      // conditioning sweeps
  double tol = 1e-10;    // iterative solver
  std::uint64_t seed = 42;
  double delta0 = 0.5, delta1 = 0.25;  // SUPG
  std::string out_dir = "out";
  bool with_cond = true;   // Lanczos estimates in convergence studies
  bool write_vtk = true;
};

/// Parses `key = value` lines ('#' comments, blank lines ignored) on top of
/// the defaults. Unknown keys throw std::invalid_argument listing the valid
/// keys. apply_override sets a single key programmatically (CLI flags).
StudyConfig parse_config(std::istream& in);
void apply_override(StudyConfig& cfg, const std::string& key,
                    const std::string& value);
std::vector<std::string> config_keys();

struct StudyReport {
  std::vector<ErrorRecord> records;
  EocTable eoc;
  std::vector<ErrorRecord> records_aux;  // unstabilized / second order
  EocTable eoc_aux;
  std::string summary;
};

/// Runs the configured study ("convergence", "conditioning", "supg",
/// "adapt", "geometry"), writes report.csv (and study-specific files) plus
/// summary.txt into out_dir, and returns the same data.
StudyReport run_study(const StudyConfig& cfg);

}  // namespace tracefem
