#include <random>

#include <gtest/gtest.h>

#include "avsfe/assembly.hpp"
#include "avsfe/drivers.hpp"

#include "support.hpp"

using namespace avsfe;
using avsfe::testing::bundle_smooth;
using avsfe::testing::expect_orthogonal;
using avsfe::testing::manufactured_spatial;
using avsfe::testing::spacetime_linear;

namespace {

Eigen::VectorXd interpolant_trial(const ProblemSpec& spec, const SpacesBundle& sb) {
  const ExactBundle& ex = *spec.exact;
  Eigen::VectorXd x(sb.n_trial());
  x.head(sb.u.dof_count) = interpolate(sb.u, [&ex](const Vec2& p) { return ex.u(p, 0.0); }).coeffs;
  x.tail(sb.q.dof_count) =
      interpolate(sb.q, [&](const Vec2& p) { return spec.epsilon * ex.grad_u(p, 0.0).x(); }).coeffs;
  return x;
}

// Global load of one generalized-alpha step, matching what the march builds.
Eigen::VectorXd step_load(const ProblemSpec& spec, const SpacesBundle& sb,
                          const GenAlphaParams& params, const GenAlphaState& state) {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(sb.n_test());
  for (int t = 0; t < sb.u.mesh->n_triangles(); ++t) {
    const Eigen::VectorXd fl = element_genalpha_rhs(spec, sb, t, params, state);
    const std::vector<int> dofs = sb.test_dofs(t);
    for (size_t i = 0; i < dofs.size(); ++i) F[dofs[i]] += fl[i];
  }
  return F;
}

GenAlphaState random_state(const SpacesBundle& sb, double t_n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u01(-1.0, 1.0);
  auto fill = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = u01(rng);
    return v;
  };
  GenAlphaState s;
  s.t_n = t_n;
  s.u = fill(sb.u.dof_count);
  s.q = fill(sb.q.dof_count);
  s.theta = fill(sb.u.dof_count);
  return s;
}

} // namespace

TEST(Assembly, SaddleBlockStructure) {
  const ProblemSpec spec = spacetime_linear();
  const Mesh m = problem_mesh(spec, 2, 2);
  const SpacesBundle sb = make_spaces(m, ProblemMode::spacetime, 1);
  const DiscreteSystem ds = spacetime_system(spec, sb);
  const SaddleSystem sys = assemble(ds);
  const int N = sys.n_test;

  ASSERT_EQ(sys.A.rows(), sys.n_test + sys.n_trial);
  ASSERT_EQ(sys.rhs.size(), sys.A.rows());
  EXPECT_FALSE(sys.pinned_dofs.empty()); // initial-time dofs are built in

  // the stored block system is symmetric as a whole
  const Eigen::SparseMatrix<double> At = sys.A.transpose();
  EXPECT_LE((sys.A - At).norm(), 1e-14 * sys.A.norm());

  // pinned trial dofs carry an identity row/column and their value on the rhs
  std::vector<char> pinned(sys.n_trial, 0);
  for (int j : sys.pinned_dofs) pinned[j] = 1;
  Eigen::VectorXd values(sys.pinned_dofs.size());
  {
    size_t k = 0;
    for (int j : sys.pinned_dofs) {
      int entries = 0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, N + j); it; ++it) {
        ++entries;
        EXPECT_EQ(it.row(), N + j);
        EXPECT_EQ(it.value(), 1.0);
      }
      EXPECT_EQ(entries, 1);
      values[k++] = sys.rhs[N + j];
    }
  }
  for (int j = 0; j < sys.n_trial; ++j)
    if (!pinned[j]) {
      EXPECT_EQ(sys.A.coeff(N + j, N + j), 0.0); // free trial diagonal stays empty
      EXPECT_EQ(sys.rhs[N + j], 0.0);
    }

  // rhs head carries the folded pinned columns minus the load
  EXPECT_EQ(sys.pin_cols.rows(), N);
  EXPECT_EQ(sys.pin_cols.cols(), static_cast<int>(sys.pinned_dofs.size()));
  const Eigen::VectorXd head = sys.pin_cols * values;
  // with all constraint values from the rhs tail, head - rhs.head == F >= 0 somewhere
  EXPECT_GT((head - sys.rhs.head(N)).lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_NEAR((head - sys.rhs.head(N)).lpNorm<Eigen::Infinity>(), sys.f_inf,
              1e-12 * (1.0 + sys.f_inf));
}

TEST(Assembly, RejectsBadConstraintsAndBlocks) {
  const ProblemSpec spec = spacetime_linear();
  const Mesh m = problem_mesh(spec, 2, 2);
  const SpacesBundle sb = make_spaces(m, ProblemMode::spacetime, 1);
  {
    DiscreteSystem ds = spacetime_system(spec, sb);
    ds.constraints.push_back({sb.n_trial(), 0.0});
    EXPECT_THROW(assemble(ds), std::invalid_argument);
  }
  {
    DiscreteSystem ds = spacetime_system(spec, sb);
    ASSERT_FALSE(ds.constraints.empty());
    ds.constraints.push_back({ds.constraints.front().dof, ds.constraints.front().value + 1.0});
    EXPECT_THROW(assemble(ds), std::invalid_argument);
  }
  {
    DiscreteSystem ds;
    ds.n_elements = 1;
    ds.n_test = 2;
    ds.n_trial = 1;
    ds.provider = [](int) {
      ElementSystem es;
      es.G = Eigen::MatrixXd::Identity(2, 2);
      es.B = Eigen::MatrixXd::Zero(2, 2); // wrong trial width
      es.F = Eigen::VectorXd::Zero(2);
      es.test_dofs = {0, 1};
      es.trial_dofs = {0};
      return es;
    };
    EXPECT_THROW(assemble(ds), std::invalid_argument);
  }
}

TEST(Assembly, LinearSpacetimeSolutionExactBothRoutes) {
  const ProblemSpec spec = spacetime_linear(0.1);
  const Mesh m = problem_mesh(spec, 3, 3);
  const SpacesBundle sb = make_spaces(m, ProblemMode::spacetime, 1);
  const Eigen::VectorXd xi = interpolant_trial(spec, sb);

  for (bool strong : {false, true}) {
    FormOptions opts;
    opts.strong_dirichlet = strong;
    const DiscreteSystem ds = spacetime_system(spec, sb, opts);

    const Solution sol = solve(ds);
    expect_orthogonal(sol);
    EXPECT_LE((sol.x - xi).lpNorm<Eigen::Infinity>(), 1e-9);
    EXPECT_LE(sol.energy_estimate, 1e-8); // exact solution leaves no residual

    const Solution nq = solve_normal_equations(ds);
    expect_orthogonal(nq);
    EXPECT_LE((nq.x - sol.x).lpNorm<Eigen::Infinity>(),
              1e-8 * (1.0 + sol.x.lpNorm<Eigen::Infinity>()));
    EXPECT_NEAR(nq.energy_estimate, sol.energy_estimate, 1e-8 * (1.0 + sol.energy_estimate));
  }
}

TEST(Assembly, ConstraintsHonoredInSolution) {
  const ProblemSpec spec = spacetime_linear();
  const Mesh m = problem_mesh(spec, 3, 3);
  const SpacesBundle sb = make_spaces(m, ProblemMode::spacetime, 1);
  const Solution sol = solve(spacetime_system(spec, sb));
  for (const auto& [dof, pos] : boundary_scalar_dofs(sb.u, BoundaryTag::initial_time))
    EXPECT_NEAR(sol.x[dof], spec.u0(pos), 1e-12);
}

TEST(Assembly, NormalEquationsElementGuard) {
  const ProblemSpec spec = spacetime_linear();
  const Mesh m = problem_mesh(spec, 11, 11); // 242 elements, over the default guard
  const SpacesBundle sb = make_spaces(m, ProblemMode::spacetime, 1);
  const DiscreteSystem ds = spacetime_system(spec, sb);
  try {
    solve_normal_equations(ds);
    FAIL() << "expected the element-count guard to fire";
  } catch (const std::invalid_argument& err) {
    EXPECT_NE(std::string(err.what()).find("242"), std::string::npos);
  }
  // raising the guard lets the same system through
  const Solution nq = solve_normal_equations(ds, 300);
  expect_orthogonal(nq);
}

TEST(Assembly, SingularSystemRaisesSolverError) {
  DiscreteSystem ds;
  ds.n_elements = 1;
  ds.n_test = 1;
  ds.n_trial = 1;
  ds.provider = [](int) {
    ElementSystem es;
    es.G = Eigen::MatrixXd::Identity(1, 1);
    es.B = Eigen::MatrixXd::Zero(1, 1); // trial dof never seen by any test function
    es.F = Eigen::VectorXd::Ones(1);
    es.test_dofs = {0};
    es.trial_dofs = {0};
    return es;
  };
  EXPECT_THROW(solve(ds), SolverError);
}

TEST(Assembly, FactorMatchesDirectSolve) {
  const ProblemSpec spec = manufactured_spatial(bundle_smooth());
  const Mesh m = build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, 3, 3, default_tags(spec));
  const SpacesBundle sb = make_spaces(m, ProblemMode::spatial, 1);
  const GenAlphaParams params = make_params(0.9, 0.05);
  const GenAlphaState state = random_state(sb, 0.0, 23);

  const DiscreteSystem ds = genalpha_step_system(spec, sb, params, state);
  ASSERT_TRUE(ds.constraints.empty()); // weak path: nothing pinned
  const SaddleSystem sys = assemble(ds);
  const Solution direct = solve(sys);
  expect_orthogonal(direct);

  const SaddleFactor factor(sys);
  const Solution refac = factor.solve_with_load(step_load(spec, sb, params, state));
  EXPECT_LE((refac.x - direct.x).lpNorm<Eigen::Infinity>(),
            1e-13 * (1.0 + direct.x.lpNorm<Eigen::Infinity>()));
  EXPECT_LE((refac.e - direct.e).lpNorm<Eigen::Infinity>(),
            1e-13 * (1.0 + direct.e.lpNorm<Eigen::Infinity>()));

  EXPECT_THROW(factor.solve_with_load(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST(Assembly, FactorReusedWithFreshConstraintValues) {
  const ProblemSpec spec = manufactured_spatial(bundle_smooth());
  const Mesh m = build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, 3, 3, default_tags(spec));
  const SpacesBundle sb = make_spaces(m, ProblemMode::spatial, 1);
  const GenAlphaParams params = make_params(0.9, 0.05);
  FormOptions opts;
  opts.strong_dirichlet = true;

  const GenAlphaState s0 = random_state(sb, 0.0, 31);
  const SaddleFactor factor(assemble(genalpha_step_system(spec, sb, params, s0, opts)));

  // a later state changes the load and the pinned boundary rates, not the operator
  const GenAlphaState s1 = random_state(sb, 0.3, 37);
  const DiscreteSystem ds1 = genalpha_step_system(spec, sb, params, s1, opts);
  const Solution direct = solve(ds1);
  const Solution refac = factor.solve_with_load(step_load(spec, sb, params, s1), ds1.constraints);
  expect_orthogonal(refac);
  EXPECT_LE((refac.x - direct.x).lpNorm<Eigen::Infinity>(),
            1e-11 * (1.0 + direct.x.lpNorm<Eigen::Infinity>()));

  // pinned values land exactly in the solution
  for (const Constraint& c : ds1.constraints) EXPECT_NEAR(refac.x[c.dof], c.value, 1e-12);

  const Eigen::VectorXd F1 = step_load(spec, sb, params, s1);
  EXPECT_THROW(factor.solve_with_load(F1, {}), std::invalid_argument); // omits pinned dofs
  {
    std::vector<Constraint> extra = ds1.constraints;
    extra.push_back({sb.u.dof_count, 0.0}); // first flux dof is never pinned
    EXPECT_THROW(factor.solve_with_load(F1, extra), std::invalid_argument);
  }
  {
    std::vector<Constraint> conflict = ds1.constraints;
    conflict.push_back({conflict.front().dof, conflict.front().value + 2.0});
    EXPECT_THROW(factor.solve_with_load(F1, conflict), std::invalid_argument);
  }
}

TEST(Assembly, DualRouteAgreementOnStepSystems) {
  const ProblemSpec spec = manufactured_spatial(bundle_smooth());
  const Mesh m = build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, 3, 3, default_tags(spec));
  const SpacesBundle sb = make_spaces(m, ProblemMode::spatial, 1);
  const GenAlphaParams params = make_params(0.5, 0.02);
  const GenAlphaState state = random_state(sb, 0.1, 41);

  for (bool strong : {false, true}) {
    FormOptions opts;
    opts.strong_dirichlet = strong;
    const DiscreteSystem ds = genalpha_step_system(spec, sb, params, state, opts);
    const Solution a = solve(ds);
    const Solution b = solve_normal_equations(ds);
    expect_orthogonal(a);
    expect_orthogonal(b);
    EXPECT_LE((a.x - b.x).lpNorm<Eigen::Infinity>(),
              1e-8 * (1.0 + a.x.lpNorm<Eigen::Infinity>()));
  }
}
