#include "avsfe/slices.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace avsfe {

namespace {

struct TraceInterval {
  double xlo, xhi;
  int tri, le;
  double xa, xb; // x of the edge endpoints in parameter order
};

struct TraceHolder {
  Mesh mesh; // private copy
  FESpace space;
  Eigen::VectorXd coeffs;
  std::vector<TraceInterval> table;
};

} // namespace

TraceFn top_trace(const SpacesBundle& sb, const Eigen::VectorXd& u) {
  if (u.size() != sb.u.dof_count)
    throw std::invalid_argument("top_trace: coefficient size does not match the scalar space");

  auto holder = std::make_shared<TraceHolder>();
  holder->mesh = *sb.u.mesh;
  holder->space = make_space(holder->mesh, sb.u.family, sb.u.degree, 1);
  holder->coeffs = u;

  const Mesh& m = holder->mesh;
  double t_top = 0.0;
  for (int t = 0; t < m.n_triangles(); ++t)
    for (int le = 0; le < 3; ++le) {
      const Edge& e = m.edges[m.triangle_edges[t][le]];
      if (e.tri[1] >= 0 || e.tag != BoundaryTag::final_time) continue;
      const Vec2 a = m.vertices[m.triangles[t][(le + 1) % 3]];
      const Vec2 b = m.vertices[m.triangles[t][(le + 2) % 3]];
      holder->table.push_back(
          {std::min(a.x(), b.x()), std::max(a.x(), b.x()), t, le, a.x(), b.x()});
      t_top = a.y();
    }
  if (holder->table.empty())
    throw std::invalid_argument("top_trace: the mesh has no final-time edges");
  std::sort(holder->table.begin(), holder->table.end(),
            [](const TraceInterval& a, const TraceInterval& b) { return a.xlo < b.xlo; });

  TraceFn fn;
  fn.x0 = holder->table.front().xlo;
  fn.x1 = holder->table.back().xhi;
  fn.t = t_top;
  fn.eval = [holder](double x) {
    const auto& tab = holder->table;
    // last interval starting at or before x
    auto it = std::upper_bound(tab.begin(), tab.end(), x,
                               [](double v, const TraceInterval& iv) { return v < iv.xlo; });
    if (it != tab.begin()) --it;
    const TraceInterval& iv = *it;
    double s = (x - iv.xa) / (iv.xb - iv.xa);
    s = std::clamp(s, 0.0, 1.0);
    const BasisTable bt = eval_basis(holder->space.degree, edge_ref_points(iv.le, {s}));
    double v = 0.0;
    for (int i = 0; i < holder->space.n_local; ++i)
      v += holder->coeffs[holder->space.dof(iv.tri, i, 0)] * bt.val(i, 0);
    return v;
  };
  return fn;
}

namespace {

struct SlabState {
  Mesh mesh;
  ProblemSpec spec; // time extent and initial data rewritten per slab
  SliceRecord rec;
};

void record_solution(SlabState& slab, const SpacesBundle& sb, const Solution& sol,
                     const IndicatorSet& ind) {
  slab.rec.max_dofs = std::max<long long>(slab.rec.max_dofs, sb.n_trial() + sb.n_test());
  slab.rec.energy_estimate = ind.total;
  if (slab.spec.exact) {
    const ExactErrors ee = exact_errors(slab.spec, sb, sol.x.head(sb.u.dof_count),
                                        sol.x.tail(sb.q.dof_count));
    slab.rec.l2_u = ee.l2_u;
    slab.rec.h1_u = ee.h1_u;
  }
}

// Give the next slab its initial data and report the node-wise jump against
// the source trace.
void hand_forward(const TraceFn& trace, SlabState& next) {
  if (std::abs(trace.x0 - next.spec.domain[0]) > 1e-12 ||
      std::abs(trace.x1 - next.spec.domain[1]) > 1e-12)
    throw std::invalid_argument("sweep: slab spatial extents do not match");
  auto eval = trace.eval;
  next.spec.u0 = [eval](const Vec2& p) { return eval(p.x()); };

  const FESpace us = make_space(next.mesh, Family::continuous, 1, 1);
  double jump = 0.0;
  for (const auto& [dof, pos] : boundary_scalar_dofs(us, BoundaryTag::initial_time))
    jump = std::max(jump, std::abs(next.spec.u0(pos) - trace.eval(pos.x())));
  next.rec.transfer_jump = jump;
}

} // namespace

SweepResult sweep(const ProblemSpec& spec, const SliceConfig& config) {
  if (spec.mode != ProblemMode::spacetime)
    throw std::invalid_argument("sweep: slabs are space-time problems");
  const auto& tb = config.boundaries;
  if (tb.size() < 2) throw std::invalid_argument("sweep: need at least two slice boundaries");
  for (size_t i = 0; i + 1 < tb.size(); ++i)
    if (!(tb[i] < tb[i + 1]))
      throw std::invalid_argument("sweep: slice boundaries must increase strictly");
  if (std::abs(tb.front() - spec.domain[2]) > 1e-12 ||
      std::abs(tb.back() - spec.domain[3]) > 1e-12)
    throw std::invalid_argument("sweep: slice boundaries must span the problem's time extent");
  if (config.adapt_steps < 0) throw std::invalid_argument("sweep: adapt_steps must be >= 0");

  const int K = static_cast<int>(tb.size()) - 1;
  const RectTags tags = default_tags(spec);

  std::vector<SlabState> slabs(K);
  for (int k = 0; k < K; ++k) {
    slabs[k].spec = spec;
    slabs[k].spec.domain[2] = tb[k];
    slabs[k].spec.domain[3] = tb[k + 1];
    slabs[k].mesh = build_rectangle_mesh(spec.domain[0], spec.domain[1], tb[k], tb[k + 1],
                                         config.nx, config.nt, tags);
    slabs[k].rec.slice = k;
    slabs[k].rec.t0 = tb[k];
    slabs[k].rec.t1 = tb[k + 1];
  }

  SweepResult res;
  std::vector<Eigen::VectorXd> u_final(K);

  if (config.strategy == SliceStrategy::adapt_between) {
    AdaptiveOptions aopts;
    aopts.p = config.p;
    aopts.theta = config.theta;
    aopts.max_steps = config.adapt_steps + 1;
    aopts.form = config.form;
    for (int k = 0; k < K; ++k) {
      res.log.push_back("solve slice " + std::to_string(k));
      const AdaptiveResult ar = adaptive_loop(slabs[k].spec, slabs[k].mesh, aopts);
      slabs[k].mesh = ar.mesh;
      const SpacesBundle sb = make_spaces(slabs[k].mesh, ProblemMode::spacetime, config.p);
      record_solution(slabs[k], sb, ar.last, indicators(sb, ar.last.e));
      u_final[k] = ar.last.x.head(sb.u.dof_count).head(slabs[k].mesh.n_vertices());
      for (const LevelRecord& lr : ar.report.levels)
        slabs[k].rec.max_dofs = std::max(slabs[k].rec.max_dofs, lr.dofs);
      if (k + 1 < K) {
        res.log.push_back("transfer " + std::to_string(k) + "->" + std::to_string(k + 1));
        hand_forward(top_trace(sb, ar.last.x.head(sb.u.dof_count)), slabs[k + 1]);
      }
    }
  } else {
    const int rounds = config.adapt_steps + 1;
    for (int r = 0; r < rounds; ++r) {
      std::vector<IndicatorSet> inds(K);
      for (int k = 0; k < K; ++k) {
        res.log.push_back("solve slice " + std::to_string(k) + " round " + std::to_string(r));
        const SpacesBundle sb = make_spaces(slabs[k].mesh, ProblemMode::spacetime, config.p);
        const Solution sol = solve(spacetime_system(slabs[k].spec, sb, config.form));
        inds[k] = indicators(sb, sol.e);
        record_solution(slabs[k], sb, sol, inds[k]);
        u_final[k] = sol.x.head(sb.u.dof_count).head(slabs[k].mesh.n_vertices());
        if (k + 1 < K) {
          res.log.push_back("transfer " + std::to_string(k) + "->" + std::to_string(k + 1) +
                            " round " + std::to_string(r));
          hand_forward(top_trace(sb, sol.x.head(sb.u.dof_count)), slabs[k + 1]);
        }
      }
      if (r + 1 == rounds) break;
      for (int k = 0; k < K; ++k) {
        const std::vector<int> marked = dorfler_mark(inds[k].eta, config.theta);
        if (!marked.empty()) slabs[k].mesh = bisect(slabs[k].mesh, marked);
      }
    }
  }

  double sq = 0.0;
  for (SlabState& s : slabs) {
    res.slices.push_back(s.rec);
    sq += s.rec.l2_u * s.rec.l2_u;
    res.meshes.push_back(std::move(s.mesh));
  }
  res.u_vertex = std::move(u_final);
  res.l2_total = std::sqrt(sq);
  return res;
}

} // namespace avsfe
