#pragma once

#include <optional>
#include <vector>

#include "avsfe/assembly.hpp"

namespace avsfe {

// Element indicators eta_K = local test-space norm of the error
// representation; total^2 = sum eta_K^2 equals the global norm because the
// test space is broken.
struct IndicatorSet {
  Eigen::VectorXd eta;
  double total = 0.0;
};

IndicatorSet indicators(const SpacesBundle& sb, const Eigen::VectorXd& error_rep,
                        GramKind kind = GramKind::plain, double zeta = 1.0);

struct ExactErrors {
  double l2_u = 0.0;
  double h1_u = 0.0; // full mesh gradient: includes the time derivative over a space-time mesh
  double l2_q = 0.0;
  double hdiv_q = 0.0; // q_ex = eps grad u_ex, div q_ex = eps lap u_ex
};

// Quadrature norms against the exact bundle. time selects the evaluation
// time in spatial mode and is ignored over a space-time mesh.
ExactErrors exact_errors(const ProblemSpec& spec, const SpacesBundle& sb,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& q, double time = 0.0,
                         int quad_order = 10);

// Smallest set (greedy on descending squared indicators, ties to the lower
// id) whose squared sum reaches theta^2 times the total. All-zero indicators
// give an empty set; theta = 1 marks every element with a positive indicator.
std::vector<int> dorfler_mark(const Eigen::VectorXd& eta, double theta);

struct LevelRecord {
  int level = 0;
  long long dofs = 0; // trial plus error-representation dofs
  double h_max = 0.0;
  double l2_u = 0.0, h1_u = 0.0, l2_q = 0.0, hdiv_q = 0.0;
  double energy_estimate = 0.0;
};

struct ErrorReport {
  std::vector<LevelRecord> levels;
};

// Rates between consecutive levels: log(e_i/e_{i+1}) / log(h_i/h_{i+1}).
// Non-positive errors or equal lengths leave the entry empty.
std::vector<std::optional<double>> eoc(const std::vector<double>& errors,
                                       const std::vector<double>& hs);

struct AdaptiveOptions {
  int p = 1;
  double theta = 0.5;
  int max_steps = 1;
  double estimate_tol = 0.0; // 0: never stop on the estimate
  FormOptions form;
  // Called after each solve with the round's mesh, solution, and indicators.
  std::function<void(int, const Mesh&, const Solution&, const IndicatorSet&)> observer;
};

struct AdaptiveResult {
  Mesh mesh;     // mesh of the last solve
  Solution last; // solution on it
  ErrorReport report;
  std::vector<std::vector<int>> marked; // per round, ids in the round's mesh
};

// Space-time solve / estimate / mark / bisect loop. Exactly max_steps solves
// unless the estimate drops under the tolerance first; no refinement after
// the final solve. Bisection inherits boundary tags.
AdaptiveResult adaptive_loop(const ProblemSpec& spec, Mesh mesh, const AdaptiveOptions& opts);

} // namespace avsfe
