// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "ksafem/mesh.hpp"

namespace ksafem {

/// Legacy ASCII unstructured-grid export (POINTS, CELLS type 10).
/// point_data vectors are per mesh vertex, cell_data per tet.
void write_vtk(const std::string& path, const TetMesh& mesh,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& point_data = {},
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& cell_data = {});

}  // namespace ksafem
