#include "avsfe/error_adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace avsfe {

IndicatorSet indicators(const SpacesBundle& sb, const Eigen::VectorXd& error_rep,
                        GramKind kind, double zeta) {
  if (error_rep.size() != sb.n_test())
    throw std::invalid_argument("indicators: error representation size mismatch");
  const int nt = sb.u.mesh->n_triangles();
  IndicatorSet set;
  set.eta.resize(nt);
  double total_sq = 0.0;
  for (int t = 0; t < nt; ++t) {
    const std::vector<int> dofs = sb.test_dofs(t);
    Eigen::VectorXd el(dofs.size());
    for (size_t i = 0; i < dofs.size(); ++i) el[i] = error_rep[dofs[i]];
    const Eigen::MatrixXd G = v_inner_product_local(sb, t, kind, zeta);
    const double sq = std::max(0.0, el.dot(G * el));
    set.eta[t] = std::sqrt(sq);
    total_sq += sq;
  }
  set.total = std::sqrt(total_sq);
  return set;
}

ExactErrors exact_errors(const ProblemSpec& spec, const SpacesBundle& sb,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& q, double time,
                         int quad_order) {
  if (!spec.exact) throw std::invalid_argument("exact_errors: problem has no exact bundle");
  if (u.size() != sb.u.dof_count || q.size() != sb.q.dof_count)
    throw std::invalid_argument("exact_errors: coefficient sizes do not match the spaces");
  const ExactBundle& ex = *spec.exact;
  const Mesh& mesh = *sb.u.mesh;
  const bool st = sb.mode == ProblemMode::spacetime;
  const int qc = sb.q.components;
  const double eps = spec.epsilon;

  const QuadratureRule qr = triangle_quadrature(quad_order);
  const BasisTable bu = eval_basis(sb.u.degree, qr.points);
  const BasisTable bq = eval_basis(sb.q.degree, qr.points);

  double l2u = 0, semi = 0, l2q = 0, divq = 0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    const std::vector<int> udofs = sb.u.element_dofs(t);
    const std::vector<int> qdofs = sb.q.element_dofs(t);

    for (size_t p = 0; p < qr.points.size(); ++p) {
      const int pi = static_cast<int>(p);
      const double xw = qr.weights[p] * 2.0 * g.area;
      const Vec2 P = g.v[0] + g.jac * qr.points[p];
      const double te = st ? P.y() : time;

      double uh = 0;
      Vec2 guh(0, 0);
      for (int i = 0; i < sb.u.n_local; ++i) {
        const double ci = u[udofs[i]];
        uh += ci * bu.val(i, pi);
        guh += ci * (g.inv_jac_t * Vec2(bu.dx(i, pi), bu.dy(i, pi)));
      }
      double qh[2] = {0, 0};
      double div_qh = 0;
      for (int i = 0; i < sb.q.n_local; ++i) {
        const Vec2 gq = g.inv_jac_t * Vec2(bq.dx(i, pi), bq.dy(i, pi));
        for (int c = 0; c < qc; ++c) {
          const double ci = q[qdofs[i * qc + c]];
          qh[c] += ci * bq.val(i, pi);
          div_qh += ci * gq[c]; // spatial divergence: d/dx only over space-time
        }
      }

      const double ue = ex.u(P, te);
      const Vec2 gs = ex.grad_u(P, te);
      // Full mesh gradient of the scalar: over a space-time mesh the second
      // component is the time derivative.
      const Vec2 ge = st ? Vec2(gs.x(), ex.du_dt(P, te)) : gs;
      const double div_qe = eps * ex.lap_u(P, te);

      l2u += xw * (uh - ue) * (uh - ue);
      semi += xw * (guh - ge).squaredNorm();
      if (qc == 1) {
        const double d = qh[0] - eps * gs.x();
        l2q += xw * d * d;
      } else {
        const Vec2 d(qh[0] - eps * gs.x(), qh[1] - eps * gs.y());
        l2q += xw * d.squaredNorm();
      }
      divq += xw * (div_qh - div_qe) * (div_qh - div_qe);
    }
  }

  ExactErrors e;
  e.l2_u = std::sqrt(l2u);
  e.h1_u = std::sqrt(l2u + semi);
  e.l2_q = std::sqrt(l2q);
  e.hdiv_q = std::sqrt(l2q + divq);
  return e;
}

std::vector<int> dorfler_mark(const Eigen::VectorXd& eta, double theta) {
  if (!(theta > 0.0 && theta <= 1.0))
    throw std::invalid_argument("dorfler_mark: theta must lie in (0, 1]");
  const int n = static_cast<int>(eta.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&eta](int a, int b) {
    const double ea = eta[a] * eta[a], eb = eta[b] * eta[b];
    if (ea != eb) return ea > eb;
    return a < b;
  });

  // Total accumulated in marking order so the prefix comparison is exact.
  double total_sq = 0.0;
  for (int id : order) total_sq += eta[id] * eta[id];
  if (total_sq == 0.0) return {};

  const double target = theta * theta * total_sq;
  std::vector<int> marked;
  double acc = 0.0;
  for (int id : order) {
    if (eta[id] == 0.0) break;
    marked.push_back(id);
    acc += eta[id] * eta[id];
    if (acc >= target) break;
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

std::vector<std::optional<double>> eoc(const std::vector<double>& errors,
                                       const std::vector<double>& hs) {
  if (errors.size() != hs.size())
    throw std::invalid_argument("eoc: errors and length scales differ in size");
  std::vector<std::optional<double>> rates;
  for (size_t i = 0; i + 1 < errors.size(); ++i) {
    if (errors[i] <= 0.0 || errors[i + 1] <= 0.0 || hs[i] <= 0.0 || hs[i + 1] <= 0.0 ||
        hs[i] == hs[i + 1]) {
      rates.push_back(std::nullopt);
      continue;
    }
    rates.push_back(std::log(errors[i] / errors[i + 1]) / std::log(hs[i] / hs[i + 1]));
  }
  return rates;
}

AdaptiveResult adaptive_loop(const ProblemSpec& spec, Mesh mesh, const AdaptiveOptions& opts) {
  if (opts.max_steps < 1) throw std::invalid_argument("adaptive_loop: max_steps must be >= 1");
  if (spec.mode != ProblemMode::spacetime)
    throw std::invalid_argument("adaptive_loop: drives the space-time system only");

  AdaptiveResult res;
  for (int step = 0; step < opts.max_steps; ++step) {
    const SpacesBundle sb = make_spaces(mesh, spec.mode, opts.p);
    const Solution sol = solve(spacetime_system(spec, sb, opts.form));
    const IndicatorSet ind = indicators(sb, sol.e);

    LevelRecord rec;
    rec.level = step;
    rec.dofs = sb.n_trial() + sb.n_test();
    rec.h_max = mesh.h_max();
    rec.energy_estimate = ind.total;
    if (spec.exact) {
      const ExactErrors ee =
          exact_errors(spec, sb, sol.x.head(sb.u.dof_count), sol.x.tail(sb.q.dof_count));
      rec.l2_u = ee.l2_u;
      rec.h1_u = ee.h1_u;
      rec.l2_q = ee.l2_q;
      rec.hdiv_q = ee.hdiv_q;
    }
    res.report.levels.push_back(rec);
    res.last = sol;
    if (opts.observer) opts.observer(step, mesh, sol, ind);

    const bool done = step + 1 == opts.max_steps ||
                      (opts.estimate_tol > 0.0 && ind.total < opts.estimate_tol);
    if (done) {
      res.mesh = mesh;
      break;
    }
    const std::vector<int> marked = dorfler_mark(ind.eta, opts.theta);
    res.marked.push_back(marked);
    if (marked.empty()) {
      res.mesh = mesh;
      break;
    }
    mesh = bisect(mesh, marked);
  }
  return res;
}

} // namespace avsfe
