#include "avsfe/assembly.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>
#include <Eigen/SparseCholesky>

namespace avsfe {

namespace {

struct ConstraintTable {
  std::vector<char> pinned;
  std::vector<double> value;
};

ConstraintTable normalize_constraints(const DiscreteSystem& ds) {
  ConstraintTable ct;
  ct.pinned.assign(ds.n_trial, 0);
  ct.value.assign(ds.n_trial, 0.0);
  for (const Constraint& c : ds.constraints) {
    if (c.dof < 0 || c.dof >= ds.n_trial)
      throw std::invalid_argument("assemble: constraint dof out of range");
    if (ct.pinned[c.dof] && std::abs(ct.value[c.dof] - c.value) >
                                1e-12 * (1.0 + std::abs(c.value)))
      throw std::invalid_argument("assemble: conflicting values for one constrained dof");
    ct.pinned[c.dof] = 1;
    ct.value[c.dof] = c.value;
  }
  return ct;
}

// Strong imposition of nodal values on the scalar trial space. In spacetime
// mode the second mesh coordinate is the time of the node.
void pin_scalar_dofs(std::vector<Constraint>& out, const FESpace& space, BoundaryTag tag,
                     const std::function<double(const Vec2&)>& data) {
  for (const auto& [dof, pos] : boundary_scalar_dofs(space, tag))
    out.push_back({dof, data(pos)});
}

// Time derivative of the Dirichlet trace by central difference, so callers
// only ever supply the data itself.
double trace_rate(const ScalarFn& u_in, const Vec2& p, double t) {
  const double dt = 1e-5 * std::max(1.0, std::abs(t));
  return (u_in(p, t + dt) - u_in(p, t - dt)) / (2.0 * dt);
}

} // namespace

DiscreteSystem spacetime_system(const ProblemSpec& spec, const SpacesBundle& sb,
                                const FormOptions& opts) {
  if (sb.mode != ProblemMode::spacetime)
    throw std::invalid_argument("spacetime_system: bundle is not in spacetime mode");
  if (!spec.u0)
    throw std::invalid_argument("spacetime_system: problem lacks initial data");

  DiscreteSystem ds;
  ds.n_elements = sb.u.mesh->n_triangles();
  ds.n_test = sb.n_test();
  ds.n_trial = sb.n_trial();
  ds.provider = [spec, sb, opts](int t) { return element_B_F(spec, sb, t, opts); };

  // The trial set builds in u = u0 on the initial-time boundary; the final
  // time stays free. Inflow data is weak unless strong imposition is asked.
  pin_scalar_dofs(ds.constraints, sb.u, BoundaryTag::initial_time,
                  [&spec](const Vec2& p) { return spec.u0(p); });
  if (opts.strong_dirichlet) {
    if (!spec.u_in)
      throw std::invalid_argument("spacetime_system: strong imposition needs inflow data");
    for (const auto& [dof, pos] : boundary_scalar_dofs(sb.u, BoundaryTag::inflow)) {
      bool already = false;
      for (const Constraint& c : ds.constraints) already = already || c.dof == dof;
      if (!already) ds.constraints.push_back({dof, spec.u_in(pos, pos.y())});
    }
  }
  std::sort(ds.constraints.begin(), ds.constraints.end(),
            [](const Constraint& a, const Constraint& b) { return a.dof < b.dof; });
  return ds;
}

DiscreteSystem genalpha_step_system(const ProblemSpec& spec, const SpacesBundle& sb,
                                    const GenAlphaParams& params, const GenAlphaState& state,
                                    const FormOptions& opts) {
  if (sb.mode != ProblemMode::spatial)
    throw std::invalid_argument("genalpha_step_system: bundle is not in spatial mode");
  if (state.u.size() != sb.u.dof_count || state.theta.size() != sb.u.dof_count ||
      state.q.size() != sb.q.dof_count)
    throw std::invalid_argument("genalpha_step_system: state sizes do not match the spaces");

  DiscreteSystem ds;
  ds.n_elements = sb.u.mesh->n_triangles();
  ds.n_test = sb.n_test();
  ds.n_trial = sb.n_trial();
  ds.provider = [spec, sb, params, state, opts](int t) {
    return element_genalpha(spec, sb, t, params, state, opts);
  };
  if (opts.strong_dirichlet) {
    if (!spec.u_in)
      throw std::invalid_argument("genalpha_step_system: strong imposition needs inflow data");
    // The step unknown is the rate, so strong Dirichlet data pins the rate of
    // the trace. The marching rate tracks the true one at a time offset of
    // (alpha_f - alpha_m) * tau; pinning at the same shifted instant keeps
    // the boundary update second order.
    const double t_pin = state.t_n + (1.0 + params.alpha_f - params.alpha_m) * params.tau;
    pin_scalar_dofs(ds.constraints, sb.u, BoundaryTag::inflow,
                    [&spec, t_pin](const Vec2& p) { return trace_rate(spec.u_in, p, t_pin); });
    std::sort(ds.constraints.begin(), ds.constraints.end(),
              [](const Constraint& a, const Constraint& b) { return a.dof < b.dof; });
  }
  return ds;
}

DiscreteSystem genalpha_initial_system(const ProblemSpec& spec, const SpacesBundle& sb,
                                       const Eigen::VectorXd& u0_coeffs, double t0,
                                       const FormOptions& opts) {
  if (sb.mode != ProblemMode::spatial)
    throw std::invalid_argument("genalpha_initial_system: bundle is not in spatial mode");
  if (u0_coeffs.size() != sb.u.dof_count)
    throw std::invalid_argument("genalpha_initial_system: u0 size does not match the space");

  DiscreteSystem ds;
  ds.n_elements = sb.u.mesh->n_triangles();
  ds.n_test = sb.n_test();
  ds.n_trial = sb.n_trial();
  Eigen::VectorXd u0 = u0_coeffs;
  ds.provider = [spec, sb, u0, t0, opts](int t) {
    return element_initial(spec, sb, t, u0, t0, opts);
  };
  if (opts.strong_dirichlet) {
    if (!spec.u_in)
      throw std::invalid_argument("genalpha_initial_system: strong imposition needs inflow data");
    pin_scalar_dofs(ds.constraints, sb.u, BoundaryTag::inflow,
                    [&spec, t0](const Vec2& p) { return trace_rate(spec.u_in, p, t0); });
    std::sort(ds.constraints.begin(), ds.constraints.end(),
              [](const Constraint& a, const Constraint& b) { return a.dof < b.dof; });
  }
  return ds;
}

SaddleSystem assemble(const DiscreteSystem& ds) {
  if (!ds.provider) throw std::invalid_argument("assemble: no element provider");
  const ConstraintTable ct = normalize_constraints(ds);
  const int N = ds.n_test;
  const int total = ds.n_test + ds.n_trial;

  std::vector<int> pinned_dofs;
  std::vector<int> kof(ds.n_trial, -1);
  for (int j = 0; j < ds.n_trial; ++j)
    if (ct.pinned[j]) {
      kof[j] = static_cast<int>(pinned_dofs.size());
      pinned_dofs.push_back(j);
    }

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<Eigen::Triplet<double>> ptrips;
  Eigen::VectorXd Fg = Eigen::VectorXd::Zero(ds.n_test);

  for (int t = 0; t < ds.n_elements; ++t) {
    const ElementSystem es = ds.provider(t);
    const int nt = static_cast<int>(es.test_dofs.size());
    const int nx = static_cast<int>(es.trial_dofs.size());
    if (es.G.rows() != nt || es.B.rows() != nt || es.B.cols() != nx || es.F.size() != nt)
      throw std::invalid_argument("assemble: element block dimensions are inconsistent");

    for (int i = 0; i < nt; ++i) {
      const int gi = es.test_dofs[i];
      Fg[gi] += es.F[i];
      for (int j = 0; j < nt; ++j) trips.emplace_back(gi, es.test_dofs[j], es.G(i, j));
      for (int j = 0; j < nx; ++j) {
        const int gj = es.trial_dofs[j];
        const double val = -es.B(i, j);
        if (ct.pinned[gj]) {
          ptrips.emplace_back(gi, kof[gj], -val);
        } else {
          trips.emplace_back(gi, N + gj, val);
          trips.emplace_back(N + gj, gi, val);
        }
      }
    }
  }
  for (int j = 0; j < ds.n_trial; ++j)
    if (ct.pinned[j]) trips.emplace_back(N + j, N + j, 1.0);

  SaddleSystem sys;
  sys.n_test = ds.n_test;
  sys.n_trial = ds.n_trial;
  sys.constraints = ds.constraints;
  sys.f_inf = ds.n_test > 0 ? Fg.lpNorm<Eigen::Infinity>() : 0.0;
  sys.A.resize(total, total);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.A.makeCompressed();
  sys.pinned_dofs = std::move(pinned_dofs);
  sys.pin_cols.resize(N, static_cast<int>(sys.pinned_dofs.size()));
  sys.pin_cols.setFromTriplets(ptrips.begin(), ptrips.end());
  sys.pin_cols.makeCompressed();

  Eigen::VectorXd values(sys.pinned_dofs.size());
  for (size_t k = 0; k < sys.pinned_dofs.size(); ++k) values[k] = ct.value[sys.pinned_dofs[k]];
  sys.rhs = Eigen::VectorXd::Zero(total);
  sys.rhs.head(N) = sys.pin_cols * values - Fg;
  for (size_t k = 0; k < sys.pinned_dofs.size(); ++k)
    sys.rhs[N + sys.pinned_dofs[k]] = values[k];
  return sys;
}

namespace {

std::string block_note(const SaddleSystem& sys) {
  return " (error block " + std::to_string(sys.n_test) + " rows, trial block " +
         std::to_string(sys.n_trial) + " rows)";
}

Solution finalize(const SaddleSystem& sys, const Eigen::VectorXd& rhs, const Eigen::VectorXd& sol,
                  double f_inf) {
  const int N = sys.n_test;
  const Eigen::VectorXd r = sys.A * sol - rhs;
  const double res = r.lpNorm<Eigen::Infinity>();
  if (!(res <= 1e-8 * (1.0 + rhs.lpNorm<Eigen::Infinity>())))
    throw SolverError("saddle residual " + std::to_string(res) + " out of tolerance" +
                      block_note(sys));

  std::vector<char> pinned(sys.n_trial, 0);
  for (const Constraint& c : sys.constraints) pinned[c.dof] = 1;

  Solution s;
  s.e = sol.head(N);
  s.x = sol.tail(sys.n_trial);
  s.residual_inf = res;
  s.f_inf = f_inf;
  // Second block row: the residual component on a free trial row is -B'e.
  for (int j = 0; j < sys.n_trial; ++j)
    if (!pinned[j]) s.orthogonality_inf = std::max(s.orthogonality_inf, std::abs(r[N + j]));
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(sol.size());
  padded.head(N) = s.e;
  const double ge = s.e.dot((sys.A * padded).head(N));
  s.energy_estimate = std::sqrt(std::max(0.0, ge));
  return s;
}

} // namespace

struct SaddleFactor::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

SaddleFactor::SaddleFactor(SaddleSystem sys) : sys_(std::move(sys)), impl_(new Impl) {
  impl_->lu.analyzePattern(sys_.A);
  impl_->lu.factorize(sys_.A);
  if (impl_->lu.info() != Eigen::Success)
    throw SolverError("saddle factorization failed" + block_note(sys_));
}

SaddleFactor::~SaddleFactor() = default;

Solution SaddleFactor::solve_with_load(const Eigen::VectorXd& F) const {
  return solve_with_load(F, sys_.constraints);
}

Solution SaddleFactor::solve_with_load(const Eigen::VectorXd& F,
                                       const std::vector<Constraint>& constraints) const {
  if (F.size() != sys_.n_test)
    throw std::invalid_argument("SaddleFactor: load size does not match the error block");
  const int N = sys_.n_test;
  const int m = static_cast<int>(sys_.pinned_dofs.size());

  // Only the values may change between solves; the pinned set is baked into
  // the factorization.
  Eigen::VectorXd values = Eigen::VectorXd::Zero(m);
  std::vector<char> seen(m, 0);
  for (const Constraint& c : constraints) {
    const auto it = std::lower_bound(sys_.pinned_dofs.begin(), sys_.pinned_dofs.end(), c.dof);
    if (it == sys_.pinned_dofs.end() || *it != c.dof)
      throw std::invalid_argument("SaddleFactor: constraint on a dof the factorization left free");
    const int k = static_cast<int>(it - sys_.pinned_dofs.begin());
    if (seen[k] && std::abs(values[k] - c.value) > 1e-12 * (1.0 + std::abs(c.value)))
      throw std::invalid_argument("SaddleFactor: conflicting values for one constrained dof");
    values[k] = c.value;
    seen[k] = 1;
  }
  for (int k = 0; k < m; ++k)
    if (!seen[k])
      throw std::invalid_argument("SaddleFactor: constraints omit a pinned dof");

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N + sys_.n_trial);
  rhs.head(N) = sys_.pin_cols * values - F;
  for (int k = 0; k < m; ++k) rhs[N + sys_.pinned_dofs[k]] = values[k];
  const Eigen::VectorXd sol = impl_->lu.solve(rhs);
  if (impl_->lu.info() != Eigen::Success)
    throw SolverError("saddle back substitution failed" + block_note(sys_));
  return finalize(sys_, rhs, sol, F.size() > 0 ? F.lpNorm<Eigen::Infinity>() : 0.0);
}

Solution solve(const SaddleSystem& sys) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(sys.A);
  lu.factorize(sys.A);
  if (lu.info() != Eigen::Success)
    throw SolverError("saddle factorization failed" + block_note(sys));
  const Eigen::VectorXd sol = lu.solve(sys.rhs);
  if (lu.info() != Eigen::Success)
    throw SolverError("saddle back substitution failed" + block_note(sys));
  return finalize(sys, sys.rhs, sol, sys.f_inf);
}

Solution solve(const DiscreteSystem& ds) { return solve(assemble(ds)); }

Solution solve_normal_equations(const DiscreteSystem& ds, int max_elements) {
  if (!ds.provider) throw std::invalid_argument("solve_normal_equations: no element provider");
  if (ds.n_elements > max_elements)
    throw std::invalid_argument("solve_normal_equations: guarded to " +
                                std::to_string(max_elements) + " elements, got " +
                                std::to_string(ds.n_elements));
  const ConstraintTable ct = normalize_constraints(ds);

  std::vector<ElementSystem> elems;
  elems.reserve(ds.n_elements);
  for (int t = 0; t < ds.n_elements; ++t) elems.push_back(ds.provider(t));

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(ds.n_trial);
  Eigen::VectorXd Fg = Eigen::VectorXd::Zero(ds.n_test);

  for (const ElementSystem& es : elems) {
    const Eigen::LDLT<Eigen::MatrixXd> gld(es.G);
    if (gld.info() != Eigen::Success)
      throw SolverError("normal equations: element Gram factorization failed");
    const Eigen::MatrixXd Y = gld.solve(es.B);
    const Eigen::MatrixXd S = es.B.transpose() * Y;
    const Eigen::VectorXd bl = Y.transpose() * es.F;
    const int nx = static_cast<int>(es.trial_dofs.size());

    for (int i = 0; i < static_cast<int>(es.test_dofs.size()); ++i)
      Fg[es.test_dofs[i]] += es.F[i];
    for (int i = 0; i < nx; ++i) {
      const int gi = es.trial_dofs[i];
      if (ct.pinned[gi]) continue;
      b[gi] += bl[i];
      for (int j = 0; j < nx; ++j) {
        const int gj = es.trial_dofs[j];
        if (ct.pinned[gj])
          b[gi] -= S(i, j) * ct.value[gj];
        else
          trips.emplace_back(gi, gj, S(i, j));
      }
    }
  }
  for (int j = 0; j < ds.n_trial; ++j)
    if (ct.pinned[j]) {
      trips.emplace_back(j, j, 1.0);
      b[j] = ct.value[j];
    }

  Eigen::SparseMatrix<double> S(ds.n_trial, ds.n_trial);
  S.setFromTriplets(trips.begin(), trips.end());
  S.makeCompressed();

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(S);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("normal equations factorization failed (trial block " +
                      std::to_string(ds.n_trial) + " rows)");
  Solution s;
  s.x = ldlt.solve(b);
  const double res = (S * s.x - b).lpNorm<Eigen::Infinity>();
  if (!(res <= 1e-8 * (1.0 + b.lpNorm<Eigen::Infinity>())))
    throw SolverError("normal equations residual " + std::to_string(res) + " out of tolerance");
  s.residual_inf = res;
  s.f_inf = ds.n_test > 0 ? Fg.lpNorm<Eigen::Infinity>() : 0.0;

  // Recover the error representation element-wise and re-check orthogonality
  // through the element matrices rather than the condensed system.
  s.e = Eigen::VectorXd::Zero(ds.n_test);
  Eigen::VectorXd bte = Eigen::VectorXd::Zero(ds.n_trial);
  double energy_sq = 0.0;
  for (const ElementSystem& es : elems) {
    const int nx = static_cast<int>(es.trial_dofs.size());
    Eigen::VectorXd xl(nx);
    for (int j = 0; j < nx; ++j) xl[j] = s.x[es.trial_dofs[j]];
    const Eigen::LDLT<Eigen::MatrixXd> gld(es.G);
    const Eigen::VectorXd el = gld.solve(es.B * xl - es.F);
    for (int i = 0; i < static_cast<int>(es.test_dofs.size()); ++i) s.e[es.test_dofs[i]] = el[i];
    const Eigen::VectorXd btl = es.B.transpose() * el;
    for (int j = 0; j < nx; ++j) bte[es.trial_dofs[j]] += btl[j];
    energy_sq += el.dot(es.G * el);
  }
  for (int j = 0; j < ds.n_trial; ++j)
    if (!ct.pinned[j]) s.orthogonality_inf = std::max(s.orthogonality_inf, std::abs(bte[j]));
  s.energy_estimate = std::sqrt(std::max(0.0, energy_sq));
  return s;
}

} // namespace avsfe
