#include "avsfe/forms.hpp"

#include <map>
#include <stdexcept>

namespace avsfe {

std::vector<int> SpacesBundle::trial_dofs(int t) const {
  std::vector<int> dofs = u.element_dofs(t);
  const int off = u.dof_count;
  for (int d : q.element_dofs(t)) dofs.push_back(off + d);
  return dofs;
}

std::vector<int> SpacesBundle::test_dofs(int t) const {
  std::vector<int> dofs = v.element_dofs(t);
  const int off = v.dof_count;
  for (int d : w.element_dofs(t)) dofs.push_back(off + d);
  return dofs;
}

SpacesBundle make_spaces(const Mesh& mesh, ProblemMode mode, int p_u, int p_q, int dp) {
  if (p_q < 0) p_q = p_u;
  if (dp < 0 || dp > 1)
    throw std::invalid_argument("make_spaces: test degree increment must be 0 or 1");
  const int p_t = p_u + dp;
  if (p_t > 2)
    throw std::invalid_argument("make_spaces: test degree p_u + dp exceeds the supported degree 2");
  const int qc = mode == ProblemMode::spacetime ? 1 : 2;

  SpacesBundle sb;
  sb.mode = mode;
  sb.u = make_space(mesh, Family::continuous, p_u, 1);
  sb.q = make_space(mesh, Family::continuous, p_q, qc);
  sb.v = make_space(mesh, Family::broken, p_t, 1);
  sb.w = make_space(mesh, Family::broken, p_t, qc);
  return sb;
}

GenAlphaParams make_params(double rho_inf, double tau) {
  if (!(rho_inf >= 0.0 && rho_inf <= 1.0))
    throw std::invalid_argument("make_params: rho_inf must lie in [0, 1]");
  if (!(tau > 0.0)) throw std::invalid_argument("make_params: tau must be positive");
  GenAlphaParams p;
  p.rho_inf = rho_inf;
  p.tau = tau;
  p.alpha_m = 0.5 * (3.0 - rho_inf) / (1.0 + rho_inf);
  p.alpha_f = 1.0 / (1.0 + rho_inf);
  p.gamma = 0.5 + p.alpha_m - p.alpha_f;
  return p;
}

double zeta_of(const GenAlphaParams& p) { return p.tau * p.gamma * p.alpha_f / p.alpha_m; }

namespace {

// Reference tables are identical for every element; cache them per degree,
// quadrature order, and (for traces) local edge.
const BasisTable& volume_table(int degree, const QuadratureRule& qr) {
  thread_local std::map<std::pair<int, int>, BasisTable> cache;
  auto [it, fresh] = cache.try_emplace({degree, qr.order});
  if (fresh) it->second = eval_basis(degree, qr.points);
  return it->second;
}

const BasisTable& edge_table(int degree, int le, const EdgeRule& er) {
  thread_local std::map<std::tuple<int, int, int>, BasisTable> cache;
  auto [it, fresh] = cache.try_emplace({degree, le, er.order});
  if (fresh) it->second = eval_basis(degree, edge_ref_points(le, er.points));
  return it->second;
}

int quad_order_for(const SpacesBundle& sb, const FormOptions& opts) {
  if (opts.quad_order > 0) return opts.quad_order;
  return 2 * std::max({sb.u.degree, sb.q.degree, sb.v.degree}) + 2;
}

enum class Variant { spacetime, ga_step, ga_initial };

// All element systems share one kernel: the spatial first-order-system
// operator Bh, the L2 mass pairing M, the data functional, and the Gram
// matrix differ only in how the variants combine them.
struct Kernel {
  const ProblemSpec& spec;
  const SpacesBundle& sb;
  int t;
  ElementGeometry g;
  QuadratureRule qr;
  EdgeRule er;
  bool st; // spacetime mode
  int qc, n_su, n_sq, n_st;
  int n_u, n_q, n_v, n_w, n_trial, n_test;

  Eigen::MatrixXd Bh;   // spatial operator, no time term
  Eigen::MatrixXd Tm;   // time term (v rows, u cols), spacetime only
  Eigen::MatrixXd M;    // (v rows, u cols) L2 mass
  Eigen::VectorXd Fd;   // source and boundary data at the evaluation time

  Kernel(const ProblemSpec& s, const SpacesBundle& b, int elem, const FormOptions& opts,
         double t_data)
      : spec(s), sb(b), t(elem), g(element_geometry(*b.u.mesh, elem)) {
    const int order = quad_order_for(sb, opts);
    qr = triangle_quadrature(order);
    er = edge_quadrature(order);
    st = sb.mode == ProblemMode::spacetime;
    qc = sb.q.components;
    n_su = sb.u.n_local;
    n_sq = sb.q.n_local;
    n_st = sb.v.n_local;
    n_u = n_su;
    n_q = n_sq * qc;
    n_v = n_st;
    n_w = n_st * qc;
    n_trial = n_u + n_q;
    n_test = n_v + n_w;

    Bh = Eigen::MatrixXd::Zero(n_test, n_trial);
    Tm = Eigen::MatrixXd::Zero(n_v, n_u);
    M = Eigen::MatrixXd::Zero(n_v, n_u);
    Fd = Eigen::VectorXd::Zero(n_test);

    volume_terms(t_data);
    edge_terms(t_data);
  }

  // Spatial gradient contraction: in spacetime mode only the x component of
  // the mesh gradient is spatial; the y direction is time.
  double sdot(const Vec2& a, const Vec2& b_) const {
    return st ? a.x() * b_.x() : a.dot(b_);
  }

  void volume_terms(double t_data) {
    const BasisTable& bu = volume_table(sb.u.degree, qr);
    const BasisTable& bq = volume_table(sb.q.degree, qr);
    const BasisTable& bt = volume_table(sb.v.degree, qr);
    const double det = 2.0 * g.area;
    const double eps = spec.epsilon;

    std::vector<Vec2> gu(n_su), gq(n_sq), gt(n_st);
    for (size_t p = 0; p < qr.points.size(); ++p) {
      const int pi = static_cast<int>(p);
      const double xw = qr.weights[p] * det;
      const Vec2 P = g.v[0] + g.jac * qr.points[p];
      const double te = st ? P.y() : t_data;
      const Vec2 bvec = spec.b(P, te);
      const double fval = spec.f(P, te);

      for (int i = 0; i < n_su; ++i) gu[i] = g.inv_jac_t * Vec2(bu.dx(i, pi), bu.dy(i, pi));
      for (int i = 0; i < n_sq; ++i) gq[i] = g.inv_jac_t * Vec2(bq.dx(i, pi), bq.dy(i, pi));
      for (int i = 0; i < n_st; ++i) gt[i] = g.inv_jac_t * Vec2(bt.dx(i, pi), bt.dy(i, pi));

      for (int i = 0; i < n_st; ++i) {
        const double vi = bt.val(i, pi);
        const double bgv = st ? bvec.x() * gt[i].x() : bvec.dot(gt[i]);
        for (int j = 0; j < n_su; ++j) {
          Bh(i, j) -= xw * bgv * bu.val(j, pi);          // -(b . grad v) u
          Tm(i, j) += xw * gu[j].y() * vi;               // (du/dt) v
          M(i, j) += xw * bu.val(j, pi) * vi;
        }
        for (int j = 0; j < n_sq; ++j)
          for (int c = 0; c < qc; ++c)
            Bh(i, n_u + j * qc + c) += xw * bq.val(j, pi) * gt[i][c]; // q . grad v
        Fd(i) += xw * fval * vi;
      }

      for (int i = 0; i < n_st; ++i) {
        for (int c = 0; c < qc; ++c) {
          const int row = n_v + i * qc + c;
          const double divw = gt[i][c]; // div of the basis vector phi_i e_c
          for (int j = 0; j < n_su; ++j)
            Bh(row, j) -= xw * eps * bu.val(j, pi) * divw; // -eps u div w
          for (int j = 0; j < n_sq; ++j)
            Bh(row, n_u + j * qc + c) -= xw * bq.val(j, pi) * bt.val(i, pi); // -q . w
        }
      }
    }
  }

  void edge_terms(double t_data) {
    const Mesh& mesh = *sb.u.mesh;
    const double eps = spec.epsilon;

    for (int le = 0; le < 3; ++le) {
      const Edge& edge = mesh.edges[mesh.triangle_edges[t][le]];
      const BoundaryTag tag = edge.tri[1] >= 0 ? BoundaryTag::interior : edge.tag;

      const bool fam1 = tag == BoundaryTag::interior;
      const bool fam2 = tag == BoundaryTag::outflow || tag == BoundaryTag::initial_time ||
                        tag == BoundaryTag::final_time;
      const bool fam3 = tag == BoundaryTag::inflow || tag == BoundaryTag::initial_time ||
                        tag == BoundaryTag::final_time;
      const bool conv_flux = fam1 || fam2; // (b.n) u v and eps u (w.n)
      const bool diff_flux = fam1 || fam3; // -(q.n) v

      const BasisTable& bu = edge_table(sb.u.degree, le, er);
      const BasisTable& bq = edge_table(sb.q.degree, le, er);
      const BasisTable& bt = edge_table(sb.v.degree, le, er);

      const Vec2 n = g.normal[le];
      const Vec2 a = g.v[(le + 1) % 3], b2 = g.v[(le + 2) % 3];

      for (size_t p = 0; p < er.points.size(); ++p) {
        const int pi = static_cast<int>(p);
        const double sw = er.weights[p] * g.edge_length[le];
        const Vec2 P = a + er.points[p] * (b2 - a);
        const double te = st ? P.y() : t_data;
        const double bn = st ? spec.b(P, te).x() * n.x() : spec.b(P, te).dot(n);

        if (conv_flux) {
          for (int i = 0; i < n_st; ++i) {
            for (int j = 0; j < n_su; ++j)
              Bh(i, j) += sw * bn * bu.val(j, pi) * bt.val(i, pi);
            for (int c = 0; c < qc; ++c) {
              const int row = n_v + i * qc + c;
              for (int j = 0; j < n_su; ++j)
                Bh(row, j) += sw * eps * bu.val(j, pi) * bt.val(i, pi) * n[c];
            }
          }
        }
        if (diff_flux) {
          for (int i = 0; i < n_st; ++i)
            for (int j = 0; j < n_sq; ++j)
              for (int c = 0; c < qc; ++c)
                Bh(i, n_u + j * qc + c) -= sw * bq.val(j, pi) * n[c] * bt.val(i, pi);
        }

        if (tag == BoundaryTag::outflow && spec.g) {
          const double gval = spec.g(P, te);
          for (int i = 0; i < n_st; ++i) Fd(i) += sw * gval * bt.val(i, pi);
        }
        if (tag == BoundaryTag::inflow) {
          const double uin = spec.u_in ? spec.u_in(P, te) : 0.0;
          for (int i = 0; i < n_st; ++i) {
            Fd(i) -= sw * bn * uin * bt.val(i, pi);
            for (int c = 0; c < qc; ++c)
              Fd(n_v + i * qc + c) -= sw * eps * uin * bt.val(i, pi) * n[c];
          }
        }
      }
    }
  }

  Eigen::MatrixXd gram(GramKind kind, double zeta) const {
    const BasisTable& bt = volume_table(sb.v.degree, qr);
    const double det = 2.0 * g.area;
    const double h2 = g.h * g.h;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n_test, n_test);

    const double grad_scale = kind == GramKind::plain ? 1.0 : zeta;
    const double mass_scale = kind == GramKind::plain ? 1.0 : 1.0 + zeta;

    std::vector<Vec2> gt(n_st);
    for (size_t p = 0; p < qr.points.size(); ++p) {
      const int pi = static_cast<int>(p);
      const double xw = qr.weights[p] * det;
      for (int i = 0; i < n_st; ++i) gt[i] = g.inv_jac_t * Vec2(bt.dx(i, pi), bt.dy(i, pi));

      for (int i = 0; i < n_st; ++i)
        for (int j = 0; j < n_st; ++j) {
          const double sg = sdot(gt[i], gt[j]);
          G(i, j) += xw * (grad_scale * h2 * sg + mass_scale * bt.val(i, pi) * bt.val(j, pi));
          for (int c = 0; c < qc; ++c)
            for (int d = 0; d < qc; ++d) {
              const int ri = n_v + i * qc + c, rj = n_v + j * qc + d;
              double e = h2 * gt[i][c] * gt[j][d]; // div-div coupling
              if (c == d) e += bt.val(i, pi) * bt.val(j, pi);
              G(ri, rj) += xw * e;
            }
        }
    }
    return G;
  }
};

Eigen::VectorXd local_coeffs(const FESpace& s, const Eigen::VectorXd& global, int t) {
  const std::vector<int> dofs = s.element_dofs(t);
  Eigen::VectorXd out(dofs.size());
  for (size_t i = 0; i < dofs.size(); ++i) out[i] = global[dofs[i]];
  return out;
}

} // namespace

Eigen::MatrixXd v_inner_product_local(const SpacesBundle& sb, int t, GramKind kind, double zeta) {
  // The Gram needs no problem data; a placeholder spec keeps one kernel path.
  ProblemSpec dummy;
  dummy.mode = sb.mode;
  dummy.b = [](const Vec2&, double) { return Vec2(0, 0); };
  dummy.f = [](const Vec2&, double) { return 0.0; };
  FormOptions opts;
  Kernel k(dummy, sb, t, opts, 0.0);
  return k.gram(kind, zeta);
}

ElementSystem element_B_F(const ProblemSpec& spec, const SpacesBundle& sb, int t,
                          const FormOptions& opts) {
  if (sb.mode != ProblemMode::spacetime)
    throw std::invalid_argument("element_B_F: spaces bundle is not in spacetime mode");
  Kernel k(spec, sb, t, opts, 0.0);
  ElementSystem es;
  es.B = k.Bh;
  es.B.topLeftCorner(k.n_v, k.n_u) += k.Tm;
  es.F = k.Fd;
  es.G = k.gram(GramKind::plain, 1.0);
  es.test_dofs = sb.test_dofs(t);
  es.trial_dofs = sb.trial_dofs(t);
  return es;
}

namespace {

Eigen::VectorXd genalpha_load(const Kernel& k, const SpacesBundle& sb, int t,
                              const GenAlphaParams& params, const GenAlphaState& state) {
  const Eigen::VectorXd un = local_coeffs(sb.u, state.u, t);
  const Eigen::VectorXd qn = local_coeffs(sb.q, state.q, t);
  const Eigen::VectorXd thn = local_coeffs(sb.u, state.theta, t);

  Eigen::VectorXd trial_n(k.n_trial);
  trial_n << un, qn;
  Eigen::VectorXd theta_only = Eigen::VectorXd::Zero(k.n_trial);
  theta_only.head(k.n_u) = thn;

  Eigen::VectorXd F = k.Fd;
  F.head(k.n_v) += (params.alpha_m - 1.0) * (k.M * thn);
  F += params.tau * params.alpha_f * (params.gamma - 1.0) * (k.Bh * theta_only);
  F -= k.Bh * trial_n;
  F /= params.alpha_m;
  return F;
}

void check_genalpha_args(const SpacesBundle& sb, const GenAlphaParams& params) {
  if (sb.mode != ProblemMode::spatial)
    throw std::invalid_argument("element_genalpha: spaces bundle is not in spatial mode");
  if (!(params.alpha_m > 0.0))
    throw std::invalid_argument("element_genalpha: alpha_m must be positive");
}

} // namespace

ElementSystem element_genalpha(const ProblemSpec& spec, const SpacesBundle& sb, int t,
                               const GenAlphaParams& params, const GenAlphaState& state,
                               const FormOptions& opts) {
  check_genalpha_args(sb, params);
  const double zeta = zeta_of(params);
  const double t_data = state.t_n + params.alpha_f * params.tau;
  Kernel k(spec, sb, t, opts, t_data);

  ElementSystem es;
  es.B = k.Bh;
  es.B.leftCols(k.n_u) *= zeta; // the rate enters the spatial operator scaled by zeta
  es.B.topLeftCorner(k.n_v, k.n_u) += k.M;
  es.G = k.gram(GramKind::weighted, zeta);
  es.F = genalpha_load(k, sb, t, params, state);
  es.test_dofs = sb.test_dofs(t);
  es.trial_dofs = sb.trial_dofs(t);
  return es;
}

Eigen::VectorXd element_genalpha_rhs(const ProblemSpec& spec, const SpacesBundle& sb, int t,
                                     const GenAlphaParams& params, const GenAlphaState& state,
                                     const FormOptions& opts) {
  check_genalpha_args(sb, params);
  const double t_data = state.t_n + params.alpha_f * params.tau;
  Kernel k(spec, sb, t, opts, t_data);
  return genalpha_load(k, sb, t, params, state);
}

ElementSystem element_initial(const ProblemSpec& spec, const SpacesBundle& sb, int t,
                              const Eigen::VectorXd& u0_coeffs, double t0,
                              const FormOptions& opts) {
  if (sb.mode != ProblemMode::spatial)
    throw std::invalid_argument("element_initial: spaces bundle is not in spatial mode");
  Kernel k(spec, sb, t, opts, t0);

  ElementSystem es;
  // theta0 couples through the L2 pairing only; q0 through the flux columns.
  es.B = Eigen::MatrixXd::Zero(k.n_test, k.n_trial);
  es.B.rightCols(k.n_q) = k.Bh.rightCols(k.n_q);
  es.B.topLeftCorner(k.n_v, k.n_u) = k.M;
  es.G = k.gram(GramKind::weighted, 0.0);

  Eigen::VectorXd u0_only = Eigen::VectorXd::Zero(k.n_trial);
  u0_only.head(k.n_u) = local_coeffs(sb.u, u0_coeffs, t);
  es.F = k.Fd - k.Bh * u0_only;

  es.test_dofs = sb.test_dofs(t);
  es.trial_dofs = sb.trial_dofs(t);
  return es;
}

} // namespace avsfe
