#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "avsfe/mesh.hpp"

namespace avsfe {

// %.17g so equal doubles print identically across runs.
std::string fmt_double(double v);

// Legacy ASCII unstructured-grid file. Point fields carry one value per
// vertex, cell fields one per triangle.
void write_vtk(const std::string& path, const Mesh& mesh,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& point_fields = {},
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& cell_fields = {});

// Reads files produced by write_vtk: geometry and connectivity only;
// boundary edges come back tagged inflow.
Mesh read_vtk(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

} // namespace avsfe
