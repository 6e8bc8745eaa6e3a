// SPDX-License-Identifier: Apache-2.0

#include "ksafem/vtk.hpp"

#include <cstdio>

#include "ksafem/error.hpp"

namespace ksafem {

void write_vtk(const std::string& path, const TetMesh& mesh,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& point_data,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& cell_data) {
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw InvalidInput("write_vtk: cannot open " + path);
  std::fprintf(f, "# vtk DataFile Version 3.0\n");
  std::fprintf(f, "ksafem mesh\n");
  std::fprintf(f, "ASCII\n");
  std::fprintf(f, "DATASET UNSTRUCTURED_GRID\n");
  std::fprintf(f, "POINTS %d double\n", mesh.n_vertices());
  for (const Vec3& p : mesh.vertices)
    std::fprintf(f, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
  std::fprintf(f, "CELLS %d %d\n", mesh.n_tets(), 5 * mesh.n_tets());
  for (const auto& t : mesh.tets)
    std::fprintf(f, "4 %d %d %d %d\n", t.v[0], t.v[1], t.v[2], t.v[3]);
  std::fprintf(f, "CELL_TYPES %d\n", mesh.n_tets());
  for (int t = 0; t < mesh.n_tets(); ++t) std::fprintf(f, "10\n");
  if (!point_data.empty()) {
    std::fprintf(f, "POINT_DATA %d\n", mesh.n_vertices());
    for (const auto& [name, values] : point_data) {
      if (values.size() != mesh.n_vertices()) {
        std::fclose(f);
        throw InvalidInput("write_vtk: point data size mismatch for " + name);
      }
      std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name.c_str());
      for (Eigen::Index i = 0; i < values.size(); ++i)
        std::fprintf(f, "%.17g\n", values(i));
    }
  }
  if (!cell_data.empty()) {
    std::fprintf(f, "CELL_DATA %d\n", mesh.n_tets());
    for (const auto& [name, values] : cell_data) {
      if (values.size() != mesh.n_tets()) {
        std::fclose(f);
        throw InvalidInput("write_vtk: cell data size mismatch for " + name);
      }
      std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name.c_str());
      for (Eigen::Index i = 0; i < values.size(); ++i)
        std::fprintf(f, "%.17g\n", values(i));
    }
  }
  std::fclose(f);
}

}  // namespace ksafem
