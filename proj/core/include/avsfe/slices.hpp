#pragma once

#include <functional>
#include <string>
#include <vector>

#include "avsfe/error_adapt.hpp"

namespace avsfe {

enum class SliceStrategy {
  adapt_between, // adapt each slab to completion before handing data forward
  adapt_after,   // sweep all slabs, then globally mark/refine and re-sweep
};

struct SliceConfig {
  std::vector<double> boundaries; // t0 < ... < tK spanning the problem's time extent
  int nx = 4, nt = 4;             // initial rectangle mesh per slab
  int p = 1;
  SliceStrategy strategy = SliceStrategy::adapt_between;
  int adapt_steps = 0; // refinement rounds per slab (between) or global rounds (after)
  double theta = 0.5;
  FormOptions form;
};

// Final-time trace of a slab solution, self-contained: the mesh is copied so
// the closure stays valid after the slab data is gone.
struct TraceFn {
  std::function<double(double)> eval;
  double x0 = 0.0, x1 = 0.0; // covered spatial extent
  double t = 0.0;            // trace time
};

TraceFn top_trace(const SpacesBundle& sb, const Eigen::VectorXd& u);

struct SliceRecord {
  int slice = 0;
  double t0 = 0.0, t1 = 0.0;
  long long max_dofs = 0;     // max over rounds of trial + error-representation dofs
  double l2_u = 0.0, h1_u = 0.0; // on the final slab solve, when exact data exists
  double energy_estimate = 0.0;
  double transfer_jump = 0.0; // node mismatch between received data and the source trace
};

struct SweepResult {
  std::vector<SliceRecord> slices;
  std::vector<std::string> log; // ordered solve/transfer events
  double l2_total = 0.0;        // slab-wise root sum of squares
  // Final mesh and vertex values of u per slab, for dumps.
  std::vector<Mesh> meshes;
  std::vector<Eigen::VectorXd> u_vertex;
};

// Solve the slabs in time order, transferring the top trace of each slab as
// the initial data of the next. Information never flows backwards.
SweepResult sweep(const ProblemSpec& spec, const SliceConfig& config);

} // namespace avsfe
