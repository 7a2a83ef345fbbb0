// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "tracefem/levelset.hpp"

namespace tracefem {

/// Legacy ASCII VTK ("# vtk DataFile Version 3.0") unstructured grid of the
/// tet mesh with optional per-tet cell scalars.
void write_vtk_mesh(
    const std::string& path, const TetMesh& mesh,
    const std::map<std::string, std::vector<double>>& cell_data = {});

/// Legacy ASCII VTK polydata of the cut triangles with optional per-triangle
/// cell scalars (sizes must equal cut.tris.size()).
void write_vtk_surface(
    const std::string& path, const CutTopology& cut,
    const std::map<std::string, std::vector<double>>& cell_data = {});

}  // namespace tracefem
