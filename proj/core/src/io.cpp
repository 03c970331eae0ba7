#include "avsfe/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace avsfe {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

} // namespace

void write_vtk(const std::string& path, const Mesh& mesh,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& point_fields,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>& cell_fields) {
  for (const auto& [name, v] : point_fields)
    if (v.size() != mesh.n_vertices())
      throw std::invalid_argument("write_vtk: point field '" + name + "' has wrong size");
  for (const auto& [name, v] : cell_fields)
    if (v.size() != mesh.n_triangles())
      throw std::invalid_argument("write_vtk: cell field '" + name + "' has wrong size");

  std::ofstream out = open_out(path);
  out << "# vtk DataFile Version 3.0\n";
  out << "triangle mesh\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const Vec2& v : mesh.vertices)
    out << fmt_double(v.x()) << " " << fmt_double(v.y()) << " 0\n";
  out << "CELLS " << mesh.n_triangles() << " " << 4 * mesh.n_triangles() << "\n";
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.n_triangles() << "\n";
  for (int t = 0; t < mesh.n_triangles(); ++t) out << "5\n";

  if (!point_fields.empty()) {
    out << "POINT_DATA " << mesh.n_vertices() << "\n";
    for (const auto& [name, v] : point_fields) {
      out << "SCALARS " << name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (int i = 0; i < v.size(); ++i) out << fmt_double(v[i]) << "\n";
    }
  }
  if (!cell_fields.empty()) {
    out << "CELL_DATA " << mesh.n_triangles() << "\n";
    for (const auto& [name, v] : cell_fields) {
      out << "SCALARS " << name << " double 1\n";
      out << "LOOKUP_TABLE default\n";
      for (int i = 0; i < v.size(); ++i) out << fmt_double(v[i]) << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Mesh read_vtk(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);

  int n_points = -1, n_cells = -1;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;

  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "POINTS") {
      ls >> n_points;
      if (n_points < 0) throw std::runtime_error("read_vtk: bad POINTS count in " + path);
      vertices.reserve(n_points);
      double x, y, z;
      for (int i = 0; i < n_points; ++i) {
        if (!(in >> x >> y >> z)) throw std::runtime_error("read_vtk: short POINTS in " + path);
        vertices.emplace_back(x, y);
      }
    } else if (key == "CELLS") {
      ls >> n_cells;
      if (n_cells < 0) throw std::runtime_error("read_vtk: bad CELLS count in " + path);
      triangles.reserve(n_cells);
      for (int i = 0; i < n_cells; ++i) {
        int n, a, b, c;
        if (!(in >> n >> a >> b >> c) || n != 3)
          throw std::runtime_error("read_vtk: expected triangles in " + path);
        triangles.push_back({a, b, c});
      }
    }
  }
  if (n_points < 0 || n_cells < 0)
    throw std::runtime_error("read_vtk: missing POINTS or CELLS in " + path);
  return make_mesh(vertices, triangles,
                   [](const Vec2&, const Vec2&) { return BoundaryTag::inflow; });
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out = open_out(path);
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("write_csv: row width does not match the header");
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace avsfe
