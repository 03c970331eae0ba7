#include "avsfe/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace avsfe {

namespace {

using VPair = std::pair<int, int>;

VPair sorted_pair(int a, int b) { return a < b ? VPair{a, b} : VPair{b, a}; }

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

// Longest edge of (v0,v1,v2); ties resolved toward the lowest endpoint ids so
// refinement-edge assignment is independent of construction order.
int longest_edge_local(const std::vector<Vec2>& verts, const std::array<int, 3>& tri) {
  int best = -1;
  double best_len = -1.0;
  VPair best_ids{-1, -1};
  for (int le = 0; le < 3; ++le) {
    const int a = tri[(le + 1) % 3];
    const int b = tri[(le + 2) % 3];
    const double len = (verts[a] - verts[b]).norm();
    const VPair ids = sorted_pair(a, b);
    const bool tie = std::abs(len - best_len) <= 1e-12 * std::max(len, best_len);
    if (len > best_len && !tie) {
      best = le;
      best_len = len;
      best_ids = ids;
    } else if (tie && ids < best_ids) {
      best = le;
      best_ids = ids;
    }
  }
  return best;
}

} // namespace

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::interior: return "interior";
    case BoundaryTag::inflow: return "inflow";
    case BoundaryTag::outflow: return "outflow";
    case BoundaryTag::initial_time: return "initial_time";
    case BoundaryTag::final_time: return "final_time";
  }
  return "unknown";
}

int Mesh::neighbor(int t, int le) const {
  const Edge& e = edges[triangle_edges[t][le]];
  return e.tri[0] == t ? e.tri[1] : e.tri[0];
}

int Mesh::boundary_edge_count() const {
  int n = 0;
  for (const Edge& e : edges)
    if (e.tri[1] < 0) ++n;
  return n;
}

double Mesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  return signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < n_triangles(); ++t) a += triangle_area(t);
  return a;
}

double Mesh::h_max() const {
  double h = 0.0;
  for (const Edge& e : edges) h = std::max(h, (vertices[e.v[0]] - vertices[e.v[1]]).norm());
  return h;
}

Mesh make_mesh(std::vector<Vec2> vertices,
               std::vector<std::array<int, 3>> triangles,
               const EdgeTagger& tag_boundary) {
  Mesh m;
  m.vertices = std::move(vertices);
  m.triangles = std::move(triangles);

  const int nt = m.n_triangles();
  if (nt == 0) throw std::invalid_argument("make_mesh: empty triangle list");

  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const int v = m.triangles[t][k];
      if (v < 0 || v >= m.n_vertices())
        throw std::invalid_argument("make_mesh: vertex id out of range in triangle " + std::to_string(t));
    }
    const double a = m.triangle_area(t);
    if (!(a > 0.0))
      throw std::invalid_argument("make_mesh: triangle " + std::to_string(t) +
                                  " is degenerate or not counterclockwise");
  }

  // Edge table in first-seen order; deterministic for a fixed triangle list.
  std::map<VPair, int> edge_ids;
  m.triangle_edges.assign(nt, {-1, -1, -1});
  for (int t = 0; t < nt; ++t) {
    for (int le = 0; le < 3; ++le) {
      const int a = m.triangles[t][(le + 1) % 3];
      const int b = m.triangles[t][(le + 2) % 3];
      const VPair key = sorted_pair(a, b);
      auto it = edge_ids.find(key);
      if (it == edge_ids.end()) {
        Edge e;
        e.v = {key.first, key.second};
        e.tri = {t, -1};
        edge_ids.emplace(key, m.n_edges());
        m.triangle_edges[t][le] = m.n_edges();
        m.edges.push_back(e);
      } else {
        Edge& e = m.edges[it->second];
        if (e.tri[1] >= 0)
          throw std::invalid_argument("make_mesh: edge shared by more than two triangles");
        e.tri[1] = t;
        m.triangle_edges[t][le] = it->second;
      }
    }
  }

  for (Edge& e : m.edges) {
    if (e.tri[1] < 0) {
      e.tag = tag_boundary(m.vertices[e.v[0]], m.vertices[e.v[1]]);
      if (e.tag == BoundaryTag::interior)
        throw std::invalid_argument("make_mesh: boundary edge tagged interior");
    }
  }

  m.refinement_edge.resize(nt);
  for (int t = 0; t < nt; ++t)
    m.refinement_edge[t] = longest_edge_local(m.vertices, m.triangles[t]);

  m.parent.resize(nt);
  for (int t = 0; t < nt; ++t) m.parent[t] = t;
  return m;
}

Mesh build_rectangle_mesh(double x0, double x1, double y0, double y1,
                          int nx, int ny, const RectTags& tags) {
  if (!(x1 > x0) || !(y1 > y0))
    throw std::invalid_argument("build_rectangle_mesh: degenerate bounds");
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("build_rectangle_mesh: nx and ny must be >= 1");

  std::vector<Vec2> verts;
  verts.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      verts.emplace_back(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny);

  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  std::vector<std::array<int, 3>> tris;
  tris.reserve(2 * static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      tris.push_back({a, b, c});
      tris.push_back({a, c, d});
    }
  }

  const double tol = 1e-12 * std::max({x1 - x0, y1 - y0, 1.0});
  auto tagger = [=](const Vec2& a, const Vec2& b) {
    if (std::abs(a.x() - x0) < tol && std::abs(b.x() - x0) < tol) return tags.left;
    if (std::abs(a.x() - x1) < tol && std::abs(b.x() - x1) < tol) return tags.right;
    if (std::abs(a.y() - y0) < tol && std::abs(b.y() - y0) < tol) return tags.bottom;
    if (std::abs(a.y() - y1) < tol && std::abs(b.y() - y1) < tol) return tags.top;
    return BoundaryTag::interior; // unreachable for a rectangle
  };
  return make_mesh(std::move(verts), std::move(tris), tagger);
}

namespace {

// Mutable triangle soup used during bisection. Adjacency and boundary tags
// are kept incrementally; the result is compacted into a fresh Mesh.
struct BisectWork {
  struct Tri {
    std::array<int, 3> v;
    int ref_le;      // local refinement edge
    int orig;        // triangle id in the input mesh
    bool alive = true;
    bool in_progress = false;
  };

  std::vector<Vec2> verts;
  std::vector<Tri> tris;
  std::map<VPair, std::array<int, 2>> adj; // alive triangles per edge
  std::map<VPair, BoundaryTag> tags;       // current boundary edges only
  std::map<VPair, int> midpoints;

  VPair ref_pair(int t) const {
    const Tri& tr = tris[t];
    return sorted_pair(tr.v[(tr.ref_le + 1) % 3], tr.v[(tr.ref_le + 2) % 3]);
  }

  void adj_add(int t) {
    for (int le = 0; le < 3; ++le) {
      const VPair key = sorted_pair(tris[t].v[(le + 1) % 3], tris[t].v[(le + 2) % 3]);
      auto& slots = adj.try_emplace(key, std::array<int, 2>{-1, -1}).first->second;
      if (slots[0] < 0 || !tris[slots[0]].alive) slots[0] = t;
      else if (slots[1] < 0 || !tris[slots[1]].alive) slots[1] = t;
      else throw std::logic_error("bisect: edge acquired a third triangle");
    }
  }

  void adj_remove(int t) {
    for (int le = 0; le < 3; ++le) {
      const VPair key = sorted_pair(tris[t].v[(le + 1) % 3], tris[t].v[(le + 2) % 3]);
      auto it = adj.find(key);
      if (it == adj.end()) continue;
      if (it->second[0] == t) it->second[0] = it->second[1];
      if (it->second[1] == t || it->second[0] == it->second[1]) it->second[1] = -1;
      if (it->second[0] < 0) adj.erase(it);
    }
  }

  int other_adjacent(const VPair& e, int t) const {
    auto it = adj.find(e);
    if (it == adj.end()) return -1;
    const auto& slots = it->second;
    if (slots[0] != t && slots[0] >= 0 && tris[slots[0]].alive) return slots[0];
    if (slots[1] != t && slots[1] >= 0 && tris[slots[1]].alive) return slots[1];
    return -1;
  }

  int midpoint(const VPair& e) {
    auto it = midpoints.find(e);
    if (it != midpoints.end()) return it->second;
    const int m = static_cast<int>(verts.size());
    verts.push_back(0.5 * (verts[e.first] + verts[e.second]));
    midpoints.emplace(e, m);
    auto tg = tags.find(e);
    if (tg != tags.end()) {
      tags.emplace(sorted_pair(e.first, m), tg->second);
      tags.emplace(sorted_pair(m, e.second), tg->second);
      tags.erase(tg);
    }
    return m;
  }

  // Splits t across its refinement edge, midpoint m. Children are stored with
  // the new vertex last, so their refinement edge is local edge 2: the two
  // non-split edges of the parent, which is the newest-vertex rule.
  void split(int t, int m) {
    Tri& tr = tris[t];
    const int k = tr.ref_le;
    const int peak = tr.v[k], p = tr.v[(k + 1) % 3], q = tr.v[(k + 2) % 3];
    adj_remove(t);
    tr.alive = false;
    const int c1 = static_cast<int>(tris.size());
    tris.push_back({{peak, p, m}, 2, tr.orig, true, false});
    tris.push_back({{q, peak, m}, 2, tr.orig, true, false});
    adj_add(c1);
    adj_add(c1 + 1);
  }

  void refine(int t, int depth) {
    if (!tris[t].alive) return;
    if (depth > 128)
      throw std::runtime_error("bisect: refinement recursion exceeded depth limit");
    if (tris[t].in_progress)
      throw std::runtime_error("bisect: incompatible refinement-edge cycle");
    tris[t].in_progress = true;

    const VPair e = ref_pair(t);
    int n = other_adjacent(e, t);
    if (n >= 0 && ref_pair(n) != e) {
      // One bisection of the neighbor exposes a child whose refinement edge
      // is e; deeper incompatibilities are handled by the recursion.
      refine(n, depth + 1);
      n = other_adjacent(e, t);
      if (n >= 0 && ref_pair(n) != e)
        throw std::logic_error("bisect: neighbor still incompatible after closure");
    }
    const int m = midpoint(e);
    split(t, m);
    if (n >= 0) split(n, m);
  }
};

} // namespace

Mesh bisect(const Mesh& mesh, const std::vector<int>& marked) {
  for (int t : marked)
    if (t < 0 || t >= mesh.n_triangles())
      throw std::invalid_argument("bisect: marked triangle id out of range");

  BisectWork w;
  w.verts = mesh.vertices;
  w.tris.reserve(mesh.triangles.size() * 2);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    w.tris.push_back({mesh.triangles[t], mesh.refinement_edge[t], t, true, false});
    w.adj_add(t);
  }
  for (const Edge& e : mesh.edges)
    if (e.tri[1] < 0) w.tags.emplace(sorted_pair(e.v[0], e.v[1]), e.tag);

  std::vector<int> order(marked);
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  for (int t : order) w.refine(t, 0);

  std::vector<std::array<int, 3>> tris;
  std::vector<int> ref_le, parents;
  for (const auto& tr : w.tris) {
    if (!tr.alive) continue;
    tris.push_back(tr.v);
    ref_le.push_back(tr.ref_le);
    parents.push_back(tr.orig);
  }

  // make_mesh re-validates conformity; its longest-edge refinement edges and
  // placeholder tags are then overwritten with the inherited data.
  Mesh out = make_mesh(w.verts, tris,
                       [](const Vec2&, const Vec2&) { return BoundaryTag::inflow; });
  out.refinement_edge = std::move(ref_le);
  out.parent = std::move(parents);
  for (Edge& e : out.edges) {
    if (e.tri[1] >= 0) continue;
    auto it = w.tags.find(sorted_pair(e.v[0], e.v[1]));
    if (it == w.tags.end())
      throw std::logic_error("bisect: boundary edge lost its tag");
    e.tag = it->second;
  }
  return out;
}

ElementGeometry element_geometry(const Mesh& mesh, int t) {
  if (t < 0 || t >= mesh.n_triangles())
    throw std::invalid_argument("element_geometry: triangle id out of range");
  ElementGeometry g;
  const auto& tri = mesh.triangles[t];
  for (int k = 0; k < 3; ++k) g.v[k] = mesh.vertices[tri[k]];

  g.jac.col(0) = g.v[1] - g.v[0];
  g.jac.col(1) = g.v[2] - g.v[0];
  const double det = g.jac.determinant();
  if (!(det > 0.0))
    throw std::invalid_argument("element_geometry: degenerate triangle");
  g.area = 0.5 * det;
  g.inv_jac_t = g.jac.inverse().transpose();

  for (int le = 0; le < 3; ++le) {
    const Vec2 a = g.v[(le + 1) % 3];
    const Vec2 b = g.v[(le + 2) % 3];
    const Vec2 d = b - a;
    g.edge_length[le] = d.norm();
    g.normal[le] = Vec2(d.y(), -d.x()) / g.edge_length[le];
    g.h = std::max(g.h, g.edge_length[le]);
  }
  return g;
}

} // namespace avsfe
