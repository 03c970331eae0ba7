#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "avsfe/forms.hpp"
#include "avsfe/genalpha.hpp"

namespace avsfe {

// A trial dof pinned to a value before the solve.
struct Constraint {
  int dof = 0;
  double value = 0.0;
};

using ElementProvider = std::function<ElementSystem(int)>;

// Element-wise description of one global least-squares problem min ||Bx - F||.
// The provider is called once per element by the assembly routines.
struct DiscreteSystem {
  ElementProvider provider;
  int n_elements = 0;
  int n_test = 0;
  int n_trial = 0;
  std::vector<Constraint> constraints;
};

DiscreteSystem spacetime_system(const ProblemSpec& spec, const SpacesBundle& sb,
                                const FormOptions& opts = {});
DiscreteSystem genalpha_step_system(const ProblemSpec& spec, const SpacesBundle& sb,
                                    const GenAlphaParams& params, const GenAlphaState& state,
                                    const FormOptions& opts = {});
DiscreteSystem genalpha_initial_system(const ProblemSpec& spec, const SpacesBundle& sb,
                                       const Eigen::VectorXd& u0_coeffs, double t0,
                                       const FormOptions& opts = {});

// Symmetric indefinite block system
//   [ G  -B ] [e]   [-F]
//   [-B^T 0 ] [x] = [ 0 ]
// with the error representation dofs first. Constraints are eliminated
// symmetrically: pinned rows/columns carry a unit diagonal and the column
// action moves to the right side.
struct SaddleSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd rhs;
  int n_test = 0;
  int n_trial = 0;
  std::vector<Constraint> constraints;
  double f_inf = 0.0; // max norm of the assembled load F
  // Pinned trial columns folded out of A, kept so a factorization can be
  // reused with fresh constraint values: rhs.head(n_test) = pin_cols * v - F.
  Eigen::SparseMatrix<double> pin_cols;
  std::vector<int> pinned_dofs; // sorted, unique; columns of pin_cols
};

SaddleSystem assemble(const DiscreteSystem& ds);

struct Solution {
  Eigen::VectorXd x; // trial coefficients
  Eigen::VectorXd e; // error representation coefficients
  double energy_estimate = 0.0;    // sqrt(e' G e)
  double orthogonality_inf = 0.0;  // max |B' e| over free trial dofs
  double residual_inf = 0.0;       // solver residual, max norm
  double f_inf = 0.0;
};

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Direct sparse factorization of the saddle system. Throws SolverError on
// factorization failure or when the residual exceeds 1e-8 * (1 + |rhs|_inf).
Solution solve(const SaddleSystem& sys);
Solution solve(const DiscreteSystem& ds);

// Verification route for small problems: eliminate the error representation
// element-wise and solve B' G^-1 B x = B' G^-1 F. Squares the conditioning,
// hence the element-count guard.
Solution solve_normal_equations(const DiscreteSystem& ds, int max_elements = 200);

// One factorization, many loads: time marching reuses the step operator and
// re-solves with fresh load vectors.
class SaddleFactor {
public:
  explicit SaddleFactor(SaddleSystem sys);
  ~SaddleFactor();
  SaddleFactor(const SaddleFactor&) = delete;
  SaddleFactor& operator=(const SaddleFactor&) = delete;

  // Solves with a fresh load and the stored factorization. The constrained
  // overload reuses the factorization with new values on the same pinned
  // dofs; the one-argument form keeps the values the system was built with.
  Solution solve_with_load(const Eigen::VectorXd& F) const;
  Solution solve_with_load(const Eigen::VectorXd& F,
                           const std::vector<Constraint>& constraints) const;
  const SaddleSystem& system() const { return sys_; }

private:
  struct Impl;
  SaddleSystem sys_;
  std::unique_ptr<Impl> impl_;
};

} // namespace avsfe
