#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "avsfe/mesh.hpp"
#include "avsfe/quadrature.hpp"

namespace avsfe {

enum class Family { continuous, broken };

// Lagrange space of degree 1 or 2 on a mesh, scalar or with two components.
// Component dofs of a node are interleaved: dof = scalar_dof * components + c.
struct FESpace {
  const Mesh* mesh = nullptr;
  Family family = Family::continuous;
  int degree = 1;
  int components = 1;
  int n_local = 3; // scalar nodes per triangle: 3 (P1) or 6 (P2)
  int dof_count = 0;

  int scalar_dof(int t, int local_node) const;
  int dof(int t, int local_node, int c) const { return scalar_dof(t, local_node) * components + c; }
  // All dofs of a triangle, node major and component minor.
  std::vector<int> element_dofs(int t) const;
  Vec2 node_position(int t, int local_node) const;
};

FESpace make_space(const Mesh& mesh, Family family, int degree, int components = 1);

// Reference basis values and derivatives at a set of reference points,
// one row per local node.
struct BasisTable {
  Eigen::MatrixXd val, dx, dy;
  int n_local = 0;
};

BasisTable eval_basis(int degree, const std::vector<Vec2>& points);

// Reference coordinates of points on local edge le, parameterized by
// s in [0,1] running from vertex (le+1)%3 to vertex (le+2)%3.
std::vector<Vec2> edge_ref_points(int le, const std::vector<double>& s);

struct Field {
  const FESpace* space = nullptr;
  Eigen::VectorXd coeffs;
};

Field make_field(const FESpace& space);

// Nodal interpolation. The vector form requires components == 2.
Field interpolate(const FESpace& space, const std::function<double(const Vec2&)>& fn);
Field interpolate2(const FESpace& space, const std::function<Vec2(const Vec2&)>& fn);

// Point evaluation at a reference location inside triangle t.
double field_value(const Field& f, int t, const Vec2& ref, int c = 0);
Vec2 field_gradient(const Field& f, int t, const Vec2& ref, int c = 0);

// Trace of component c along local edge le of triangle t at parameters s.
std::vector<double> trace_eval(const Field& f, int t, int le, const std::vector<double>& s, int c = 0);

// Normal trace of a flux field: value . n for two components, value * n_x for
// a single component (spatial flux over a space-time mesh).
std::vector<double> normal_trace_eval(const Field& f, int t, int le, const std::vector<double>& s);

// Scalar dofs of a continuous space whose nodes lie on boundary edges with
// the given tag, with node positions, deduplicated and sorted by dof.
std::vector<std::pair<int, Vec2>> boundary_scalar_dofs(const FESpace& space, BoundaryTag tag);

} // namespace avsfe
