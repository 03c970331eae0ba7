#pragma once

#include "avsfe/config.hpp"
#include "avsfe/genalpha.hpp"
#include "avsfe/slices.hpp"

namespace avsfe {

// Rectangle mesh over the problem's domain with its default boundary tags.
Mesh problem_mesh(const ProblemSpec& spec, int nx, int ny);

// Uniform-refinement study of the space-time system; nx and nt double per
// level. Errors need the exact bundle; the energy estimate is always filled.
ErrorReport converge_spacetime(const ProblemSpec& spec, int p, int levels, int nx0, int nt0,
                               const FormOptions& opts = {});

// Final-time errors of the generalized-alpha march under uniform spatial
// refinement of an nx0 x ny0 mesh.
ErrorReport converge_genalpha(const ProblemSpec& spec, int p, int levels, int nx0, int ny0,
                              double rho_inf, double tau, double t_final,
                              const FormOptions& opts = {});

struct AnnulusBand {
  Vec2 center{0.0, 0.0};
  double r0 = 0.0, r1 = 0.0; // inner and outer radius, r0 < r1
};

bool triangle_intersects_annulus(const Mesh& mesh, int t, const AnnulusBand& band);

struct GaAdaptRound {
  int round = 0;
  long long dofs = 0; // trial + error-representation dofs of the round's mesh
  double estimate = 0.0; // accumulated over the march
  int marked = 0;
  int marked_in_band = 0; // meaningful when a band is supplied
};

struct GaAdaptResult {
  Mesh mesh; // final refined mesh
  std::vector<GaAdaptRound> rounds;
};

// Rounds of: march over [0, t_final], accumulate squared step indicators,
// mark, bisect. The optional band audits where the marks land.
GaAdaptResult adapt_genalpha(const ProblemSpec& spec, int p, double theta, int rounds,
                             double rho_inf, double tau, double t_final, int nx0, int ny0,
                             const FormOptions& opts = {}, const AnnulusBand* band = nullptr);

// Runs one validated config: dispatches on the mode, writes CSV/JSON/VTK
// artifacts into out_dir. Throws ConfigError for setting mismatches and
// SolverError for failed solves.
void run_config(const RunConfig& c);

} // namespace avsfe
