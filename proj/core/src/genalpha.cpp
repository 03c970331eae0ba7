#include "avsfe/genalpha.hpp"

#include <cmath>

#include "avsfe/assembly.hpp"
#include "avsfe/error_adapt.hpp"

namespace avsfe {

GenAlphaState initial_data(const ProblemSpec& spec, const Mesh& mesh, const SpacesBundle& sb,
                           const FormOptions& opts, double t0) {
  if (sb.u.mesh != &mesh)
    throw std::invalid_argument("initial_data: bundle lives on a different mesh");
  if (!spec.u0) throw std::invalid_argument("initial_data: problem lacks initial data");

  const Field u0 = interpolate(sb.u, spec.u0);
  const Solution sol = solve(genalpha_initial_system(spec, sb, u0.coeffs, t0, opts));

  GenAlphaState state;
  state.t_n = t0;
  state.u = u0.coeffs;
  state.theta = sol.x.head(sb.u.dof_count);
  state.q = sol.x.tail(sb.q.dof_count);
  return state;
}

namespace {

GenAlphaState taylor_update(const GenAlphaState& state, const GenAlphaParams& params,
                            const Eigen::VectorXd& theta1, const Eigen::VectorXd& q1) {
  GenAlphaState next;
  next.t_n = state.t_n + params.tau;
  next.theta = theta1;
  // The flux block of the step solve is the scaled increment
  // (q at the alpha_f level minus the stored q) / alpha_m, not the flux
  // itself. Storing it raw feeds a (-1/alpha_m)^n recursion that diverges
  // whenever alpha_m < 1. Undo the scaling and extrapolate the alpha_f
  // level to the full step; this is exact for a flux linear in time and
  // the leftover recursion factor is -rho_inf, so it is damped.
  next.q = state.q + (params.alpha_m / params.alpha_f) * q1;
  next.u = state.u + params.tau * state.theta + params.tau * params.gamma * (theta1 - state.theta);
  return next;
}

} // namespace

GenAlphaState step(const ProblemSpec& spec, const Mesh& mesh, const SpacesBundle& sb,
                   const GenAlphaParams& params, const GenAlphaState& state,
                   const FormOptions& opts) {
  if (sb.u.mesh != &mesh)
    throw std::invalid_argument("step: bundle lives on a different mesh");
  const Solution sol = solve(genalpha_step_system(spec, sb, params, state, opts));
  return taylor_update(state, params, sol.x.head(sb.u.dof_count), sol.x.tail(sb.q.dof_count));
}

MarchResult march(const ProblemSpec& spec, const Mesh& mesh, const SpacesBundle& sb,
                  const GenAlphaParams& params, double t_end, const FormOptions& opts,
                  const MarchObserver& observer) {
  if (!(t_end > 0.0)) throw std::invalid_argument("march: t_end must be positive");
  const double ratio = t_end / params.tau;
  const long long n_steps = std::llround(ratio);
  if (n_steps < 1 || std::abs(n_steps * params.tau - t_end) > 1e-8 * std::max(1.0, t_end))
    throw std::invalid_argument("march: tau does not divide t_end");

  MarchResult res;
  res.state = initial_data(spec, mesh, sb, opts, 0.0);
  res.indicator_sq_accum = Eigen::VectorXd::Zero(mesh.n_triangles());

  // The step operator does not depend on the state; time enters only the
  // load. One factorization serves the whole march.
  const SaddleFactor factor(
      assemble(genalpha_step_system(spec, sb, params, res.state, opts)));
  const double zeta = zeta_of(params);

  for (long long n = 0; n < n_steps; ++n) {
    Eigen::VectorXd F = Eigen::VectorXd::Zero(sb.n_test());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      const Eigen::VectorXd fl = element_genalpha_rhs(spec, sb, t, params, res.state, opts);
      const std::vector<int> dofs = sb.test_dofs(t);
      for (size_t i = 0; i < dofs.size(); ++i) F[dofs[i]] += fl[i];
    }

    Solution sol;
    try {
      if (opts.strong_dirichlet) {
        // Pinned boundary rates move with the data; rebuild only the
        // constraint values and keep the factorization.
        sol = factor.solve_with_load(
            F, genalpha_step_system(spec, sb, params, res.state, opts).constraints);
      } else {
        sol = factor.solve_with_load(F);
      }
    } catch (const SolverError& err) {
      throw SolverError("step " + std::to_string(n + 1) + ": " + err.what());
    }
    res.state = taylor_update(res.state, params, sol.x.head(sb.u.dof_count),
                              sol.x.tail(sb.q.dof_count));

    const IndicatorSet ind = indicators(sb, sol.e, GramKind::weighted, zeta);
    res.indicator_sq_accum += ind.eta.cwiseProduct(ind.eta);

    StepRecord rec;
    rec.step = static_cast<int>(n + 1);
    rec.t = res.state.t_n;
    rec.energy_estimate = ind.total;
    if (observer && spec.exact)
      rec.l2_u = exact_errors(spec, sb, res.state.u, res.state.q, res.state.t_n).l2_u;
    res.steps.push_back(rec);
    if (observer) observer(rec, res.state);
  }
  return res;
}

} // namespace avsfe
