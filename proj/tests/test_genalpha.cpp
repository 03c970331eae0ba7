#include <cmath>

#include <gtest/gtest.h>

#include "avsfe/error_adapt.hpp"
#include "avsfe/genalpha.hpp"
#include "support.hpp"

using namespace avsfe;
using namespace avsfe::testing;

namespace {

FormOptions strong_opts() {
  FormOptions o;
  o.strong_dirichlet = true;
  return o;
}

} // namespace

TEST(GenAlphaParams, IdentitiesAndFrozenTriples) {
  for (double rho : {0.0, 0.3, 0.9, 1.0}) {
    const GenAlphaParams p = make_params(rho, 0.1);
    EXPECT_NEAR(p.alpha_m, 0.5 * (3.0 - rho) / (1.0 + rho), 1e-14);
    EXPECT_NEAR(p.alpha_f, 1.0 / (1.0 + rho), 1e-14);
    EXPECT_NEAR(p.gamma, 0.5 + p.alpha_m - p.alpha_f, 1e-14);
  }
  // spot values: rho = 0.9, 0, 1
  const GenAlphaParams a = make_params(0.9, 1e-3);
  EXPECT_NEAR(a.alpha_m, 0.5526315789473685, 1e-15);
  EXPECT_NEAR(a.alpha_f, 0.5263157894736842, 1e-15);
  EXPECT_NEAR(a.gamma, 0.5263157894736844, 1e-15);
  EXPECT_NEAR(zeta_of(a), 5.012531328320803e-4, 5.012531328320803e-4 * 1e-12);

  const GenAlphaParams b = make_params(0.0, 0.5);
  EXPECT_NEAR(b.alpha_m, 1.5, 1e-15);
  EXPECT_NEAR(b.alpha_f, 1.0, 1e-15);
  EXPECT_NEAR(b.gamma, 1.0, 1e-15);

  const GenAlphaParams c = make_params(1.0, 0.5);
  EXPECT_NEAR(c.alpha_m, 0.5, 1e-15);
  EXPECT_NEAR(c.alpha_f, 0.5, 1e-15);
  EXPECT_NEAR(c.gamma, 0.5, 1e-15);
}

TEST(GenAlphaParams, RejectsBadInputs) {
  EXPECT_THROW(make_params(-0.1, 0.1), std::invalid_argument);
  EXPECT_THROW(make_params(1.1, 0.1), std::invalid_argument);
  EXPECT_THROW(make_params(0.5, 0.0), std::invalid_argument);
  EXPECT_THROW(make_params(0.5, -1e-3), std::invalid_argument);
}

TEST(GenAlphaInitial, RateRecoveredForSeparableDatum) {
  // u = t x has theta(0) = x, representable exactly, and q(0) = 0.
  const ProblemSpec spec = manufactured_spatial(bundle_tx());
  const Mesh mesh = problem_mesh(spec, 4, 4);
  const SpacesBundle sb = make_spaces(mesh, ProblemMode::spatial, 1);
  for (bool strong : {false, true}) {
    FormOptions opts;
    opts.strong_dirichlet = strong;
    const GenAlphaState s0 = initial_data(spec, mesh, sb, opts);
    EXPECT_EQ(s0.t_n, 0.0);
    const Field xi = interpolate(sb.u, [](const Vec2& p) { return p.x(); });
    EXPECT_LE((s0.theta - xi.coeffs).lpNorm<Eigen::Infinity>(), 1e-10);
    EXPECT_LE(s0.q.lpNorm<Eigen::Infinity>(), 1e-10);
    const Field u0 = interpolate(sb.u, spec.u0);
    EXPECT_LE((s0.u - u0.coeffs).lpNorm<Eigen::Infinity>(), 1e-14);
  }
}

TEST(GenAlphaInitial, SteadyDatumHasZeroRate) {
  const ProblemSpec spec = manufactured_spatial(bundle_steady_quadratic());
  const Mesh mesh = problem_mesh(spec, 4, 4);
  const SpacesBundle sb = make_spaces(mesh, ProblemMode::spatial, 2);
  const GenAlphaState s0 = initial_data(spec, mesh, sb, strong_opts());
  EXPECT_LE(s0.theta.lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(GenAlphaInitial, RejectsForeignBundleAndMissingData) {
  const ProblemSpec spec = manufactured_spatial(bundle_tx());
  const Mesh mesh = problem_mesh(spec, 4, 4);
  const Mesh other = problem_mesh(spec, 3, 3);
  const SpacesBundle sb = make_spaces(other, ProblemMode::spatial, 1);
  EXPECT_THROW(initial_data(spec, mesh, sb, FormOptions{}), std::invalid_argument);

  ProblemSpec nodata = spec;
  nodata.u0 = nullptr;
  EXPECT_THROW(initial_data(nodata, other, sb, FormOptions{}), std::invalid_argument);
}

TEST(GenAlphaMarch, ExactForSolutionLinearInTimeAndSpace) {
  // u = t x: the Taylor update and the step solve are both exact here, so the
  // march reproduces the solution to solver precision on either path.
  const ProblemSpec spec = manufactured_spatial(bundle_tx());
  const Mesh mesh = problem_mesh(spec, 4, 4);
  const SpacesBundle sb = make_spaces(mesh, ProblemMode::spatial, 1);
  for (bool strong : {false, true}) {
    FormOptions opts;
    opts.strong_dirichlet = strong;
    const MarchResult mr = march(spec, mesh, sb, make_params(0.9, 0.1), 1.0, opts);
    EXPECT_EQ(mr.steps.size(), 10u);
    EXPECT_NEAR(mr.state.t_n, 1.0, 1e-12);
    const ExactErrors ee = exact_errors(spec, sb, mr.state.u, mr.state.q, mr.state.t_n);
    EXPECT_LE(ee.l2_u, 1e-10);
    EXPECT_LE(ee.l2_q, 1e-10);
  }
}

TEST(GenAlphaMarch, SteadySolutionStaysPut) {
  const ProblemSpec spec = manufactured_spatial(bundle_steady_quadratic());
  const Mesh mesh = problem_mesh(spec, 4, 4);
  const SpacesBundle sb = make_spaces(mesh, ProblemMode::spatial, 2);
  const MarchResult mr = march(spec, mesh, sb, make_params(0.9, 0.25), 1.0, strong_opts());
  const ExactErrors ee = exact_errors(spec, sb, mr.state.u, mr.state.q, mr.state.t_n);
  EXPECT_LE(ee.l2_u, 1e-10);
  EXPECT_LE(ee.l2_q, 1e-10);
}

TEST(GenAlphaMarch, SecondOrderInTime) {
  // u = t^3/6 is spatially constant, so the whole error is temporal. The
  // leading error fits A tau^2 + B tau^3 with B < 0; the observed order
  // climbs toward 2 from below as tau shrinks.
  const ProblemSpec spec = manufactured_spatial(bundle_t3());
  const Mesh mesh = problem_mesh(spec, 4, 4);
  const SpacesBundle sb = make_spaces(mesh, ProblemMode::spatial, 1);
  double errs[3];
  const double taus[3] = {0.05, 0.025, 0.0125};
  for (int k = 0; k < 3; ++k) {
    const MarchResult mr = march(spec, mesh, sb, make_params(0.9, taus[k]), 1.0, strong_opts());
    const ExactErrors ee = exact_errors(spec, sb, mr.state.u, mr.state.q, mr.state.t_n);
    errs[k] = ee.l2_u;
  }
  const double eoc1 = std::log2(errs[0] / errs[1]);
  const double eoc2 = std::log2(errs[1] / errs[2]);
  EXPECT_GT(eoc2, eoc1);
  EXPECT_GE(eoc2, 1.8);
  EXPECT_LE(eoc2, 2.05);
}

TEST(GenAlphaMarch, AgreesWithRepeatedSteps) {
  // march reuses one factorization; step() refactorizes every call. Both
  // must walk the same trajectory.
  const ProblemSpec spec = manufactured_spatial(bundle_smooth());
  const Mesh mesh = problem_mesh(spec, 4, 4);
  const SpacesBundle sb = make_spaces(mesh, ProblemMode::spatial, 1);
  const FormOptions opts = strong_opts();
  const GenAlphaParams params = make_params(0.9, 0.2);

  const MarchResult mr = march(spec, mesh, sb, params, 1.0, opts);
  GenAlphaState s = initial_data(spec, mesh, sb, opts);
  for (int n = 0; n < 5; ++n) s = step(spec, mesh, sb, params, s, opts);

  const double scale = 1.0 + s.u.lpNorm<Eigen::Infinity>();
  EXPECT_LE((mr.state.u - s.u).lpNorm<Eigen::Infinity>(), 1e-12 * scale);
  EXPECT_LE((mr.state.q - s.q).lpNorm<Eigen::Infinity>(), 1e-12 * scale);
  EXPECT_LE((mr.state.theta - s.theta).lpNorm<Eigen::Infinity>(), 1e-12 * scale);
  EXPECT_NEAR(mr.state.t_n, s.t_n, 1e-12);
}

TEST(GenAlphaMarch, ObserverSeesEveryStep) {
  const ProblemSpec spec = manufactured_spatial(bundle_tx());
  const Mesh mesh = problem_mesh(spec, 3, 3);
  const SpacesBundle sb = make_spaces(mesh, ProblemMode::spatial, 1);
  int calls = 0;
  double last_t = 0.0;
  const MarchObserver obs = [&](const StepRecord& rec, const GenAlphaState& st) {
    ++calls;
    EXPECT_EQ(rec.step, calls);
    EXPECT_GT(rec.t, last_t);
    last_t = rec.t;
    EXPECT_EQ(st.u.size(), sb.u.dof_count);
  };
  const MarchResult mr = march(spec, mesh, sb, make_params(0.0, 0.25), 1.0, strong_opts(), obs);
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(mr.steps.size(), 4u);
  EXPECT_EQ(mr.indicator_sq_accum.size(), (Eigen::Index)mesh.n_triangles());
  EXPECT_GT(mr.indicator_sq_accum.minCoeff(), -1e-30);
}

TEST(GenAlphaMarch, RejectsIncompatibleHorizon) {
  const ProblemSpec spec = manufactured_spatial(bundle_tx());
  const Mesh mesh = problem_mesh(spec, 3, 3);
  const SpacesBundle sb = make_spaces(mesh, ProblemMode::spatial, 1);
  EXPECT_THROW(march(spec, mesh, sb, make_params(0.9, 0.3), 1.0, FormOptions{}),
               std::invalid_argument);
  EXPECT_THROW(march(spec, mesh, sb, make_params(0.9, 0.1), -1.0, FormOptions{}),
               std::invalid_argument);
  // single step horizons are fine
  const MarchResult mr = march(spec, mesh, sb, make_params(0.9, 0.5), 0.5, strong_opts());
  EXPECT_EQ(mr.steps.size(), 1u);
}

TEST(GenAlphaMarch, ZeroDataStaysZero) {
  ProblemSpec spec = manufactured_spatial(bundle_tx());
  spec.f = [](const Vec2&, double) { return 0.0; };
  spec.u_in = [](const Vec2&, double) { return 0.0; };
  spec.u0 = [](const Vec2&) { return 0.0; };
  spec.exact.reset();
  const Mesh mesh = problem_mesh(spec, 4, 4);
  const SpacesBundle sb = make_spaces(mesh, ProblemMode::spatial, 1);
  const MarchResult mr = march(spec, mesh, sb, make_params(0.9, 0.1), 1.0, strong_opts());
  EXPECT_LE(mr.state.u.lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LE(mr.state.q.lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(GenAlphaMarch, LargeStepsStayBounded) {
  // Rotating ring with tau far above the accuracy range: the scheme is
  // unconditionally stable, so the solution must stay bounded without any
  // stabilization parameters.
  const ProblemSpec spec = rotating_ring(500.0);
  const Mesh mesh = problem_mesh(spec, 8, 8);
  const SpacesBundle sb = make_spaces(mesh, ProblemMode::spatial, 1);
  for (bool strong : {false, true}) {
    FormOptions opts;
    opts.strong_dirichlet = strong;
    const MarchResult mr = march(spec, mesh, sb, make_params(0.9, 0.1), 1.0, opts);
    EXPECT_LE(mr.state.u.lpNorm<Eigen::Infinity>(), 10.0);
  }
}
