// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include "tracefem/vtk_io.hpp"

#include <cstdio>
#include <stdexcept>

namespace tracefem {

namespace {

std::FILE* open_or_throw(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("vtk_io: cannot open " + path);
  return fp;
}

void write_cell_data(std::FILE* fp, std::size_t n,
                     const std::map<std::string, std::vector<double>>& data) {
  if (data.empty()) return;
  std::fprintf(fp, "CELL_DATA %zu\n", n);
  for (auto& [name, values] : data) {
    if (values.size() != n)
      throw std::invalid_argument("vtk_io: cell data '" + name +
                                  "' has wrong size");
    std::fprintf(fp, "SCALARS %s double 1\nLOOKUP_TABLE default\n",
                 name.c_str());
    for (double v : values) std::fprintf(fp, "%.17g\n", v);
  }
}

}  // namespace

void write_vtk_mesh(const std::string& path, const TetMesh& mesh,
                    const std::map<std::string, std::vector<double>>& cell_data) {
  std::FILE* fp = open_or_throw(path);
  std::fprintf(fp, "# vtk DataFile Version 3.0\n");
  std::fprintf(fp, "tracefem mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
  std::fprintf(fp, "POINTS %d double\n", mesh.n_vertices());
  for (auto& v : mesh.vertices)
    std::fprintf(fp, "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
  std::fprintf(fp, "CELLS %d %d\n", mesh.n_tets(), 5 * mesh.n_tets());
  for (auto& t : mesh.tets)
    std::fprintf(fp, "4 %d %d %d %d\n", t[0], t[1], t[2], t[3]);
  std::fprintf(fp, "CELL_TYPES %d\n", mesh.n_tets());
  for (int t = 0; t < mesh.n_tets(); ++t) std::fprintf(fp, "10\n");
  write_cell_data(fp, mesh.tets.size(), cell_data);
  std::fclose(fp);
}

void write_vtk_surface(
    const std::string& path, const CutTopology& cut,
    const std::map<std::string, std::vector<double>>& cell_data) {
  std::FILE* fp = open_or_throw(path);
  std::size_t nt = cut.tris.size();
  std::fprintf(fp, "# vtk DataFile Version 3.0\n");
  std::fprintf(fp, "tracefem surface\nASCII\nDATASET POLYDATA\n");
  std::fprintf(fp, "POINTS %zu double\n", 3 * nt);
  for (auto& tri : cut.tris)
    for (auto& x : tri.x)
      std::fprintf(fp, "%.17g %.17g %.17g\n", x[0], x[1], x[2]);
  std::fprintf(fp, "POLYGONS %zu %zu\n", nt, 4 * nt);
  for (std::size_t i = 0; i < nt; ++i)
    std::fprintf(fp, "3 %zu %zu %zu\n", 3 * i, 3 * i + 1, 3 * i + 2);
  write_cell_data(fp, nt, cell_data);
  std::fclose(fp);
}

}  // namespace tracefem
