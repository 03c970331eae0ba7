#pragma once

#include <vector>

#include <Eigen/Dense>

#include "avsfe/femspace.hpp"
#include "avsfe/genalpha.hpp"
#include "avsfe/mesh.hpp"
#include "avsfe/problems.hpp"

namespace avsfe {

// Trial pair (u, q) in continuous spaces and the broken test pair (v, w).
// The flux has one component over a space-time mesh and two over a spatial
// mesh; the error representation lives in the test spaces.
struct SpacesBundle {
  ProblemMode mode = ProblemMode::spatial;
  FESpace u, q, v, w;

  int n_trial() const { return u.dof_count + q.dof_count; }
  int n_test() const { return v.dof_count + w.dof_count; }

  std::vector<int> trial_dofs(int t) const; // u dofs then q dofs (offset)
  std::vector<int> test_dofs(int t) const;  // v dofs then w dofs (offset)
};

// p_q < 0 means the flux degree follows the scalar degree. The test degree is
// p_u + dp and must stay within the supported Lagrange degrees.
SpacesBundle make_spaces(const Mesh& mesh, ProblemMode mode, int p_u, int p_q = -1, int dp = 0);

struct FormOptions {
  int quad_order = 0;           // 0: 2 * max(degree) + 2
  bool strong_dirichlet = false; // impose inflow data on trial dofs instead of weakly
};

// Local contributions of one element: Gram matrix of the test-space inner
// product, the coupling matrix B applied to the trial pair, and the load.
// Row order is v then w dofs; column order u then q dofs.
struct ElementSystem {
  Eigen::MatrixXd G, B;
  Eigen::VectorXd F;
  std::vector<int> test_dofs, trial_dofs;
};

enum class GramKind {
  plain,    // sum_K h^2 grad r . grad v + r v + h^2 div z div w + z . w
  weighted, // zeta-scaled scalar part plus the L2 coupling of the step system
};

Eigen::MatrixXd v_inner_product_local(const SpacesBundle& sb, int t,
                                      GramKind kind = GramKind::plain, double zeta = 1.0);

// Space-time element matrices: B carries the first-order system tested
// against the broken pair, including the time term and the element-boundary
// integrals; F carries the source and the inflow/outflow data terms.
ElementSystem element_B_F(const ProblemSpec& spec, const SpacesBundle& sb, int t,
                          const FormOptions& opts = {});

// One generalized-alpha step: B couples the new rate and flux (the rate
// enters the spatial operator scaled by zeta), G is the weighted inner
// product, and F is the history functional of the current state scaled by
// 1 / alpha_m, with data evaluated at t_n + alpha_f tau.
ElementSystem element_genalpha(const ProblemSpec& spec, const SpacesBundle& sb, int t,
                               const GenAlphaParams& params, const GenAlphaState& state,
                               const FormOptions& opts = {});

// Load vector of element_genalpha alone, for re-solves against a factorized
// step operator. Matches the F block of element_genalpha exactly.
Eigen::VectorXd element_genalpha_rhs(const ProblemSpec& spec, const SpacesBundle& sb, int t,
                                     const GenAlphaParams& params, const GenAlphaState& state,
                                     const FormOptions& opts = {});

// Initial rate retrieval: the trial pair is (theta0, q0), coupled through the
// L2 pairing and the flux part of the spatial operator; the known u0 moves to
// the right side. The weighted Gram collapses to its zeta = 0 limit.
ElementSystem element_initial(const ProblemSpec& spec, const SpacesBundle& sb, int t,
                              const Eigen::VectorXd& u0_coeffs, double t0,
                              const FormOptions& opts = {});

} // namespace avsfe
