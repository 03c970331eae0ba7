#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace avsfe {

using Vec2 = Eigen::Vector2d;

// Role of a mesh edge. "interior" is reserved for edges shared by two
// triangles; every boundary edge must carry one of the other tags.
enum class BoundaryTag : std::uint8_t {
  interior = 0,
  inflow,
  outflow,
  initial_time,
  final_time,
};

const char* to_string(BoundaryTag tag);

struct Edge {
  std::array<int, 2> v{-1, -1};   // endpoints, v[0] < v[1]
  std::array<int, 2> tri{-1, -1}; // adjacent triangles, tri[1] < 0 on the boundary
  BoundaryTag tag = BoundaryTag::interior;
};

// Conforming triangle mesh. Triangles are stored counterclockwise; local
// edge i of a triangle is the edge opposite local vertex i. Meshes are
// immutable after construction: bisect() returns a new mesh.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> triangle_edges; // edge id per local edge
  std::vector<int> refinement_edge;               // local edge index per triangle
  std::vector<int> parent;                        // triangle id before the last bisect()

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  // Triangle across local edge le of triangle t, or -1 on the boundary.
  int neighbor(int t, int le) const;
  int boundary_edge_count() const;
  double total_area() const;
  double triangle_area(int t) const;
  double h_max() const;
};

// Tag assigned to a boundary edge given its endpoints.
using EdgeTagger = std::function<BoundaryTag(const Vec2&, const Vec2&)>;

// Builds the edge table, checks orientation and conformity, tags boundary
// edges, and assigns initial refinement edges (longest edge, ties broken by
// lowest endpoint ids).
Mesh make_mesh(std::vector<Vec2> vertices,
               std::vector<std::array<int, 3>> triangles,
               const EdgeTagger& tag_boundary);

struct RectTags {
  BoundaryTag left = BoundaryTag::inflow;
  BoundaryTag right = BoundaryTag::outflow;
  BoundaryTag bottom = BoundaryTag::initial_time;
  BoundaryTag top = BoundaryTag::final_time;
};

// Structured triangulation of (x0,x1) x (y0,y1) with nx * ny cells, each cell
// split along its lower-left to upper-right diagonal.
Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1,
                          int nx, int ny, const RectTags& tags = {});

// Newest-vertex bisection of the marked triangles plus the conforming
// closure. Children carry parent ids that refer to triangles of the input
// mesh; boundary tags are inherited by split boundary edges.
Mesh bisect(const Mesh& mesh, const std::vector<int>& marked);

struct ElementGeometry {
  std::array<Vec2, 3> v;
  double area = 0.0;
  double h = 0.0;                  // longest edge
  Eigen::Matrix2d jac;             // [v1 - v0, v2 - v0]
  Eigen::Matrix2d inv_jac_t;
  std::array<double, 3> edge_length{};
  std::array<Vec2, 3> normal{};    // outward unit normal of local edge i
};

ElementGeometry element_geometry(const Mesh& mesh, int t);

} // namespace avsfe
