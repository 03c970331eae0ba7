#include "avsfe/femspace.hpp"

#include <map>
#include <stdexcept>

namespace avsfe {

int FESpace::scalar_dof(int t, int local_node) const {
  if (family == Family::broken) return t * n_local + local_node;
  if (local_node < 3) return mesh->triangles[t][local_node];
  return mesh->n_vertices() + mesh->triangle_edges[t][local_node - 3];
}

std::vector<int> FESpace::element_dofs(int t) const {
  std::vector<int> dofs(static_cast<size_t>(n_local) * components);
  for (int i = 0; i < n_local; ++i)
    for (int c = 0; c < components; ++c)
      dofs[static_cast<size_t>(i) * components + c] = dof(t, i, c);
  return dofs;
}

Vec2 FESpace::node_position(int t, int local_node) const {
  const auto& tri = mesh->triangles[t];
  if (local_node < 3) return mesh->vertices[tri[local_node]];
  const int le = local_node - 3; // midpoint of the edge opposite vertex le
  return 0.5 * (mesh->vertices[tri[(le + 1) % 3]] + mesh->vertices[tri[(le + 2) % 3]]);
}

FESpace make_space(const Mesh& mesh, Family family, int degree, int components) {
  if (degree != 1 && degree != 2)
    throw std::invalid_argument("make_space: degree must be 1 or 2");
  if (components != 1 && components != 2)
    throw std::invalid_argument("make_space: components must be 1 or 2");

  FESpace s;
  s.mesh = &mesh;
  s.family = family;
  s.degree = degree;
  s.components = components;
  s.n_local = degree == 1 ? 3 : 6;

  int scalar_count = 0;
  if (family == Family::broken) {
    scalar_count = mesh.n_triangles() * s.n_local;
  } else {
    scalar_count = mesh.n_vertices() + (degree == 2 ? mesh.n_edges() : 0);
  }
  s.dof_count = scalar_count * components;
  return s;
}

BasisTable eval_basis(int degree, const std::vector<Vec2>& points) {
  if (degree != 1 && degree != 2)
    throw std::invalid_argument("eval_basis: degree must be 1 or 2");
  const int np = static_cast<int>(points.size());
  BasisTable b;
  b.n_local = degree == 1 ? 3 : 6;
  b.val.resize(b.n_local, np);
  b.dx.resize(b.n_local, np);
  b.dy.resize(b.n_local, np);

  for (int p = 0; p < np; ++p) {
    const double x = points[p].x(), y = points[p].y();
    const double l0 = 1.0 - x - y, l1 = x, l2 = y;
    if (degree == 1) {
      b.val.col(p) << l0, l1, l2;
      b.dx.col(p) << -1.0, 1.0, 0.0;
      b.dy.col(p) << -1.0, 0.0, 1.0;
    } else {
      // Vertex functions, then midpoint functions of local edges 0,1,2
      // (edge i opposite vertex i).
      b.val.col(p) << l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
          4.0 * l1 * l2, 4.0 * l2 * l0, 4.0 * l0 * l1;
      b.dx.col(p) << -(4.0 * l0 - 1.0), 4.0 * l1 - 1.0, 0.0,
          4.0 * l2, -4.0 * l2, 4.0 * (l0 - l1);
      b.dy.col(p) << -(4.0 * l0 - 1.0), 0.0, 4.0 * l2 - 1.0,
          4.0 * l1, 4.0 * (l0 - l2), -4.0 * l1;
    }
  }
  return b;
}

std::vector<Vec2> edge_ref_points(int le, const std::vector<double>& s) {
  if (le < 0 || le > 2) throw std::invalid_argument("edge_ref_points: bad local edge");
  static const Vec2 ref[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const Vec2 a = ref[(le + 1) % 3], b = ref[(le + 2) % 3];
  std::vector<Vec2> pts;
  pts.reserve(s.size());
  for (double si : s) pts.push_back(a + si * (b - a));
  return pts;
}

Field make_field(const FESpace& space) {
  Field f;
  f.space = &space;
  f.coeffs = Eigen::VectorXd::Zero(space.dof_count);
  return f;
}

Field interpolate(const FESpace& space, const std::function<double(const Vec2&)>& fn) {
  if (space.components != 1)
    throw std::invalid_argument("interpolate: scalar interpolation on a vector space");
  Field f = make_field(space);
  const Mesh& m = *space.mesh;
  for (int t = 0; t < m.n_triangles(); ++t)
    for (int i = 0; i < space.n_local; ++i)
      f.coeffs[space.dof(t, i, 0)] = fn(space.node_position(t, i));
  return f;
}

Field interpolate2(const FESpace& space, const std::function<Vec2(const Vec2&)>& fn) {
  if (space.components != 2)
    throw std::invalid_argument("interpolate2: vector interpolation on a scalar space");
  Field f = make_field(space);
  const Mesh& m = *space.mesh;
  for (int t = 0; t < m.n_triangles(); ++t)
    for (int i = 0; i < space.n_local; ++i) {
      const Vec2 v = fn(space.node_position(t, i));
      f.coeffs[space.dof(t, i, 0)] = v.x();
      f.coeffs[space.dof(t, i, 1)] = v.y();
    }
  return f;
}

double field_value(const Field& f, int t, const Vec2& ref, int c) {
  const FESpace& s = *f.space;
  const BasisTable b = eval_basis(s.degree, {ref});
  double v = 0.0;
  for (int i = 0; i < s.n_local; ++i) v += f.coeffs[s.dof(t, i, c)] * b.val(i, 0);
  return v;
}

Vec2 field_gradient(const Field& f, int t, const Vec2& ref, int c) {
  const FESpace& s = *f.space;
  const BasisTable b = eval_basis(s.degree, {ref});
  const ElementGeometry g = element_geometry(*s.mesh, t);
  Vec2 grad_ref(0.0, 0.0);
  for (int i = 0; i < s.n_local; ++i) {
    const double ci = f.coeffs[s.dof(t, i, c)];
    grad_ref.x() += ci * b.dx(i, 0);
    grad_ref.y() += ci * b.dy(i, 0);
  }
  return g.inv_jac_t * grad_ref;
}

std::vector<double> trace_eval(const Field& f, int t, int le, const std::vector<double>& s, int c) {
  const FESpace& sp = *f.space;
  const BasisTable b = eval_basis(sp.degree, edge_ref_points(le, s));
  std::vector<double> out(s.size(), 0.0);
  for (size_t p = 0; p < s.size(); ++p)
    for (int i = 0; i < sp.n_local; ++i)
      out[p] += f.coeffs[sp.dof(t, i, c)] * b.val(i, static_cast<int>(p));
  return out;
}

std::vector<double> normal_trace_eval(const Field& f, int t, int le, const std::vector<double>& s) {
  const FESpace& sp = *f.space;
  const ElementGeometry g = element_geometry(*sp.mesh, t);
  const Vec2 n = g.normal[le];
  std::vector<double> out = trace_eval(f, t, le, s, 0);
  if (sp.components == 1) {
    for (double& v : out) v *= n.x();
  } else {
    const std::vector<double> y = trace_eval(f, t, le, s, 1);
    for (size_t p = 0; p < out.size(); ++p) out[p] = out[p] * n.x() + y[p] * n.y();
  }
  return out;
}

std::vector<std::pair<int, Vec2>> boundary_scalar_dofs(const FESpace& space, BoundaryTag tag) {
  if (space.family != Family::continuous)
    throw std::invalid_argument("boundary_scalar_dofs: needs a continuous space");
  const Mesh& m = *space.mesh;
  std::map<int, Vec2> found;
  for (int t = 0; t < m.n_triangles(); ++t)
    for (int le = 0; le < 3; ++le) {
      const Edge& e = m.edges[m.triangle_edges[t][le]];
      if (e.tri[1] >= 0 || e.tag != tag) continue;
      // local vertices (le+1)%3 and (le+2)%3 span edge le; degree 2 adds node 3+le
      for (int k = 1; k <= 2; ++k) {
        const int ln = (le + k) % 3;
        found.emplace(space.scalar_dof(t, ln), space.node_position(t, ln));
      }
      if (space.degree == 2) found.emplace(space.scalar_dof(t, 3 + le), space.node_position(t, 3 + le));
    }
  return {found.begin(), found.end()};
}

} // namespace avsfe
