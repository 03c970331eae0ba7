#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "avsfe/drivers.hpp"
#include "avsfe/forms.hpp"

#include "support.hpp"

using namespace avsfe;
using avsfe::testing::bundle_smooth;
using avsfe::testing::manufactured_spatial;
using avsfe::testing::spacetime_linear;

namespace {

Mesh unit_mesh(int n) { return build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, n, n, RectTags{}); }

} // namespace

TEST(Forms, GramSymmetricPositiveDefinite) {
  const Mesh m = unit_mesh(2);
  for (ProblemMode mode : {ProblemMode::spatial, ProblemMode::spacetime}) {
    for (int p : {1, 2}) {
      const SpacesBundle sb = make_spaces(m, mode, p);
      for (int t : {0, 3, 5}) {
        for (GramKind kind : {GramKind::plain, GramKind::weighted}) {
          const Eigen::MatrixXd G = v_inner_product_local(sb, t, kind, 0.37);
          EXPECT_LE((G - G.transpose()).norm(), 1e-14 * G.norm());
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
          EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
        }
        // the zeta = 0 limit drops the scalar gradient term but stays positive
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es0(
            v_inner_product_local(sb, t, GramKind::weighted, 0.0));
        EXPECT_GT(es0.eigenvalues().minCoeff(), 0.0);
      }
    }
  }
}

TEST(Forms, GramOnConstantsIsElementArea) {
  const Mesh m = unit_mesh(3);
  for (ProblemMode mode : {ProblemMode::spatial, ProblemMode::spacetime}) {
    const SpacesBundle sb = make_spaces(m, mode, 1);
    const int qc = sb.w.components;
    const int n_loc_v = sb.v.n_local;
    const double zeta = 0.25;
    for (int t : {0, 7}) {
      const double area = element_geometry(m, t).area;
      const Eigen::MatrixXd Gp = v_inner_product_local(sb, t, GramKind::plain);
      const Eigen::MatrixXd Gw = v_inner_product_local(sb, t, GramKind::weighted, zeta);

      Eigen::VectorXd ev = Eigen::VectorXd::Zero(Gp.rows());
      ev.head(n_loc_v).setOnes(); // v = 1, w = 0: gradient part drops out
      EXPECT_NEAR(ev.dot(Gp * ev), area, 1e-13);
      EXPECT_NEAR(ev.dot(Gw * ev), (1.0 + zeta) * area, 1e-13);

      for (int c = 0; c < qc; ++c) {
        Eigen::VectorXd ew = Eigen::VectorXd::Zero(Gp.rows());
        for (int i = 0; i < n_loc_v; ++i) ew[n_loc_v + i * qc + c] = 1.0;
        EXPECT_NEAR(ew.dot(Gp * ew), area, 1e-13); // |e_c|^2 integrates to the area
        EXPECT_NEAR(ew.dot(Gw * ew), area, 1e-13); // flux block carries no weight
      }
    }
  }
}

TEST(Forms, WeightedGramBlockStructure) {
  const Mesh m = unit_mesh(2);
  const SpacesBundle sb = make_spaces(m, ProblemMode::spatial, 2);
  const int n_v = sb.v.n_local;
  const int n_w = sb.w.n_local * sb.w.components;
  const double zeta = 0.6180339887;
  for (int t = 0; t < m.n_triangles(); ++t) {
    const Eigen::MatrixXd Gp = v_inner_product_local(sb, t, GramKind::plain);
    const Eigen::MatrixXd G0 = v_inner_product_local(sb, t, GramKind::weighted, 0.0);
    const Eigen::MatrixXd Gz = v_inner_product_local(sb, t, GramKind::weighted, zeta);

    // flux block is identical across kinds and weights
    EXPECT_LE((Gz.bottomRightCorner(n_w, n_w) - Gp.bottomRightCorner(n_w, n_w)).norm(),
              1e-14 * Gp.norm());
    EXPECT_LE((G0.bottomRightCorner(n_w, n_w) - Gp.bottomRightCorner(n_w, n_w)).norm(),
              1e-14 * Gp.norm());
    // scalar block: weighted(z) = z * plain + weighted(0), since the plain
    // block is gradient + mass and the weighted one z*gradient + (1+z)*mass
    EXPECT_LE((Gz.topLeftCorner(n_v, n_v) - zeta * Gp.topLeftCorner(n_v, n_v) -
               G0.topLeftCorner(n_v, n_v))
                  .norm(),
              1e-13 * Gp.norm());
    // off-diagonal coupling between scalar and flux tests is identically zero
    EXPECT_EQ(Gp.topRightCorner(n_v, n_w).norm(), 0.0);
  }
}

TEST(Forms, ElementGramMatchesInnerProduct) {
  const ProblemSpec spec = spacetime_linear();
  const Mesh m = problem_mesh(spec, 2, 2);
  const SpacesBundle sb = make_spaces(m, ProblemMode::spacetime, 1);
  const ElementSystem es = element_B_F(spec, sb, 3);
  EXPECT_LE((es.G - v_inner_product_local(sb, 3, GramKind::plain)).norm(), 1e-14 * es.G.norm());
}

// Interpolating an exact linear solution must satisfy the broken weak
// statement row by row: the accumulated B x - F vanishes on every test dof.
// This exercises the volume terms, all edge families, and both data loads.
TEST(Forms, SpacetimeLinearSolutionSatisfiesSystem) {
  const ProblemSpec spec = spacetime_linear(0.1);
  const ExactBundle& ex = *spec.exact;
  for (int p : {1, 2}) {
    const Mesh m = problem_mesh(spec, 3, 3);
    const SpacesBundle sb = make_spaces(m, ProblemMode::spacetime, p);

    Eigen::VectorXd x(sb.n_trial());
    x.head(sb.u.dof_count) = interpolate(sb.u, [&ex](const Vec2& p_) { return ex.u(p_, 0.0); }).coeffs;
    // exact flux: q = eps du/dx, constant
    x.tail(sb.q.dof_count) =
        interpolate(sb.q, [&](const Vec2&) { return spec.epsilon * 2.0; }).coeffs;

    Eigen::VectorXd r = Eigen::VectorXd::Zero(sb.n_test());
    double f_scale = 0.0;
    for (int t = 0; t < m.n_triangles(); ++t) {
      const ElementSystem es = element_B_F(spec, sb, t);
      Eigen::VectorXd xl(es.trial_dofs.size());
      for (size_t i = 0; i < es.trial_dofs.size(); ++i) xl[i] = x[es.trial_dofs[i]];
      const Eigen::VectorXd rl = es.B * xl - es.F;
      for (size_t i = 0; i < es.test_dofs.size(); ++i) r[es.test_dofs[i]] += rl[i];
      f_scale = std::max(f_scale, es.F.lpNorm<Eigen::Infinity>());
    }
    EXPECT_LE(r.lpNorm<Eigen::Infinity>(), 1e-12 * (1.0 + f_scale));
  }
}

TEST(Forms, GenAlphaRhsMatchesElementSystem) {
  const ProblemSpec spec = manufactured_spatial(bundle_smooth());
  const Mesh m = unit_mesh(3);
  const SpacesBundle sb = make_spaces(m, ProblemMode::spatial, 1);
  const GenAlphaParams params = make_params(0.9, 0.05);

  GenAlphaState state;
  state.t_n = 0.2;
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u01(-1.0, 1.0);
  auto fill = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = u01(rng);
    return v;
  };
  state.u = fill(sb.u.dof_count);
  state.q = fill(sb.q.dof_count);
  state.theta = fill(sb.u.dof_count);

  for (int t = 0; t < m.n_triangles(); ++t) {
    const ElementSystem es = element_genalpha(spec, sb, t, params, state);
    const Eigen::VectorXd rhs = element_genalpha_rhs(spec, sb, t, params, state);
    EXPECT_EQ((es.F - rhs).norm(), 0.0);
  }
}

TEST(Forms, MakeSpacesWiring) {
  const Mesh m = unit_mesh(2);
  {
    const SpacesBundle sb = make_spaces(m, ProblemMode::spatial, 1);
    EXPECT_EQ(sb.u.degree, 1);
    EXPECT_EQ(sb.q.degree, 1);
    EXPECT_EQ(sb.q.components, 2);
    EXPECT_EQ(sb.v.degree, 1);
    EXPECT_EQ(sb.v.family, Family::broken);
    EXPECT_EQ(sb.w.components, 2);
    EXPECT_EQ(sb.n_trial(), sb.u.dof_count + sb.q.dof_count);
    EXPECT_EQ(sb.n_test(), sb.v.dof_count + sb.w.dof_count);
  }
  {
    const SpacesBundle sb = make_spaces(m, ProblemMode::spacetime, 1, 2, 1);
    EXPECT_EQ(sb.q.degree, 2);
    EXPECT_EQ(sb.q.components, 1);
    EXPECT_EQ(sb.v.degree, 2); // p_u + dp
    EXPECT_EQ(sb.w.components, 1);
  }
  EXPECT_THROW(make_spaces(m, ProblemMode::spatial, 2, -1, 1), std::invalid_argument);
  EXPECT_THROW(make_spaces(m, ProblemMode::spatial, 1, -1, 2), std::invalid_argument);
  EXPECT_THROW(make_spaces(m, ProblemMode::spatial, 1, -1, -1), std::invalid_argument);
}

TEST(Forms, ModeMismatchRejected) {
  const Mesh m = unit_mesh(2);
  const SpacesBundle spatial = make_spaces(m, ProblemMode::spatial, 1);
  const SpacesBundle st = make_spaces(m, ProblemMode::spacetime, 1);
  const ProblemSpec stp = spacetime_linear();
  const ProblemSpec spp = manufactured_spatial(bundle_smooth());
  const GenAlphaParams params = make_params(0.5, 0.1);
  GenAlphaState state;
  state.t_n = 0.0;
  state.u = Eigen::VectorXd::Zero(st.u.dof_count);
  state.q = Eigen::VectorXd::Zero(st.q.dof_count);
  state.theta = Eigen::VectorXd::Zero(st.u.dof_count);

  EXPECT_THROW(element_B_F(stp, spatial, 0), std::invalid_argument);
  EXPECT_THROW(element_genalpha(spp, st, 0, params, state), std::invalid_argument);
  EXPECT_THROW(element_initial(spp, st, 0, Eigen::VectorXd::Zero(st.u.dof_count), 0.0),
               std::invalid_argument);
}
