#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "avsfe/mesh.hpp"

namespace avsfe {

// Closed-form solution data. Gradients and Laplacians are taken in space
// only; over a space-time mesh the y coordinate is time and grad_u.y() is 0.
struct ExactBundle {
  std::function<double(const Vec2&, double)> u;
  std::function<Vec2(const Vec2&, double)> grad_u;
  std::function<double(const Vec2&, double)> lap_u;
  std::function<double(const Vec2&, double)> du_dt;
};

// spacetime: the mesh coordinates are (x, t), one space dimension, and the
//            flux has a single component. Data callbacks receive t = p.y().
// spatial:   the mesh is a 2d spatial domain marched in time.
enum class ProblemMode { spacetime, spatial };

using ScalarFn = std::function<double(const Vec2&, double)>;
using VectorFn = std::function<Vec2(const Vec2&, double)>;

struct ProblemSpec {
  std::string name;
  ProblemMode mode = ProblemMode::spatial;
  double epsilon = 0.0;
  VectorFn b;                            // convection; only b.x() is used in spacetime mode
  ScalarFn f;
  ScalarFn u_in;                         // Dirichlet data on inflow-tagged edges
  ScalarFn g;                            // diffusive flux data on outflow-tagged edges (optional)
  std::function<double(const Vec2&)> u0; // initial data at the first time level
  std::optional<ExactBundle> exact;
  std::array<double, 4> domain{0, 1, 0, 1}; // x0, x1, y0, y1 (y is time in spacetime mode)
};

// f = du/dt - eps * lap(u) + b . grad(u), synthesized from the bundle.
ScalarFn manufactured_source(double epsilon, const VectorFn& b, const ExactBundle& exact);

// Parameters of the layer solution exp(l t)(e^{l1 x} - e^{l2 x}) +
// cos(pi y)(e^{s x} - e^{r x}) / (e^{-s} - e^{-r}) with l = 2:
// eps l^2 - l + 2 = 0 for l1, l2 and eps k^2 - k - pi^2 eps = 0 for r, s.
struct LayerParams {
  double epsilon = 0.0;
  double lambda1 = 0.0, lambda2 = 0.0;
  double r = 0.0, s = 0.0;
};

LayerParams layer_params(double epsilon);

// Convection-diffusion layer problem on (-1,0) x (-0.5,0.5), b = (1,0),
// Dirichlet data on the whole spatial boundary, marched in time.
ProblemSpec eriksson_johnson(double epsilon);

// Space-time variant on (x,t) in (-1,0) x (0,1); the cos(pi y) factor of the
// steady part is dropped and the x profile kept.
ProblemSpec eriksson_johnson_1d(double epsilon);

// Pure convection b = (-y,x) on (0,1)^2 with the ring layer solution
// (t^2/2)(1 + tanh(M(0.15 - |0.5 - sqrt(x^2+y^2)|))); u0 = 0.
ProblemSpec rotating_ring(double steepness = 500.0);

// b = (-x+2y, 0), eps = 1e-3, f = -2 x eps + x(1 - y^2) on (-1,1)^2 with
// homogeneous initial and boundary data. No closed-form solution is claimed.
ProblemSpec shock_problem();

ProblemSpec problem_by_name(const std::string& name, double epsilon, double steepness);

// Rectangle tags for a catalogue problem: spatial problems impose Dirichlet
// data weakly on the whole boundary (all inflow); space-time problems tag the
// time levels, with the right side an outflow only when flux data is present.
RectTags default_tags(const ProblemSpec& spec);

} // namespace avsfe
