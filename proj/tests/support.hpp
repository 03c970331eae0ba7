#pragma once

#include <cmath>

#include <gtest/gtest.h>

#include "avsfe/assembly.hpp"
#include "avsfe/drivers.hpp"
#include "avsfe/forms.hpp"
#include "avsfe/problems.hpp"

namespace avsfe::testing {

// Every solve in the suite must leave the discrete residual orthogonal to
// the trial space.
inline void expect_orthogonal(const Solution& sol) {
  EXPECT_LE(sol.orthogonality_inf, 1e-9 * (1.0 + sol.f_inf));
}

// Manufactured spatial problem from an exact bundle on the unit square with
// a fixed skew convection field.
inline ProblemSpec manufactured_spatial(const ExactBundle& ex, double epsilon = 0.1) {
  ProblemSpec s;
  s.name = "manufactured";
  s.mode = ProblemMode::spatial;
  s.domain = {0.0, 1.0, 0.0, 1.0};
  s.epsilon = epsilon;
  s.b = [](const Vec2&, double) { return Vec2(1.0, 0.5); };
  s.f = manufactured_source(epsilon, s.b, ex);
  s.u_in = ex.u;
  s.u0 = [u = ex.u](const Vec2& p) { return u(p, 0.0); };
  s.exact = ex;
  return s;
}

// u = t * x: the rate at t = 0 is representable in every Lagrange space.
inline ExactBundle bundle_tx() {
  ExactBundle ex;
  ex.u = [](const Vec2& p, double t) { return t * p.x(); };
  ex.grad_u = [](const Vec2&, double t) { return Vec2(t, 0.0); };
  ex.lap_u = [](const Vec2&, double) { return 0.0; };
  ex.du_dt = [](const Vec2& p, double) { return p.x(); };
  return ex;
}

// Steady quadratic: u = x^2 + y, exact in P2 spaces.
inline ExactBundle bundle_steady_quadratic() {
  ExactBundle ex;
  ex.u = [](const Vec2& p, double) { return p.x() * p.x() + p.y(); };
  ex.grad_u = [](const Vec2& p, double) { return Vec2(2.0 * p.x(), 1.0); };
  ex.lap_u = [](const Vec2&, double) { return 2.0; };
  ex.du_dt = [](const Vec2&, double) { return 0.0; };
  return ex;
}

// Purely temporal cubic: u = t^3 / 6, spatially constant.
inline ExactBundle bundle_t3() {
  ExactBundle ex;
  ex.u = [](const Vec2&, double t) { return t * t * t / 6.0; };
  ex.grad_u = [](const Vec2&, double) { return Vec2(0.0, 0.0); };
  ex.lap_u = [](const Vec2&, double) { return 0.0; };
  ex.du_dt = [](const Vec2&, double t) { return t * t / 2.0; };
  return ex;
}

// Smooth space-time bundle for rate studies, not representable in P1 or P2.
inline ExactBundle bundle_smooth() {
  ExactBundle ex;
  ex.u = [](const Vec2& p, double t) {
    return (1.0 + std::sin(M_PI * p.x()) * std::sin(M_PI * p.y())) * std::cos(2.0 * t);
  };
  ex.grad_u = [](const Vec2& p, double t) {
    const double c = M_PI * std::cos(2.0 * t);
    return Vec2(c * std::cos(M_PI * p.x()) * std::sin(M_PI * p.y()),
                c * std::sin(M_PI * p.x()) * std::cos(M_PI * p.y()));
  };
  ex.lap_u = [](const Vec2& p, double t) {
    return -2.0 * M_PI * M_PI * std::sin(M_PI * p.x()) * std::sin(M_PI * p.y()) *
           std::cos(2.0 * t);
  };
  ex.du_dt = [](const Vec2& p, double t) {
    return -2.0 * (1.0 + std::sin(M_PI * p.x()) * std::sin(M_PI * p.y())) * std::sin(2.0 * t);
  };
  return ex;
}

// Space-time problem (one space dimension plus time) whose exact solution is
// linear: u = 1 + 2x - 3t on (0,1) x (0,1), inflow on the left, outflow data
// on the right so both load paths are exercised.
inline ProblemSpec spacetime_linear(double epsilon = 0.1) {
  ExactBundle ex;
  ex.u = [](const Vec2& p, double) { return 1.0 + 2.0 * p.x() - 3.0 * p.y(); };
  // spatial gradient only; the mesh y direction is time here
  ex.grad_u = [](const Vec2&, double) { return Vec2(2.0, 0.0); };
  ex.lap_u = [](const Vec2&, double) { return 0.0; };
  ex.du_dt = [](const Vec2&, double) { return -3.0; };

  ProblemSpec s;
  s.name = "spacetime_linear";
  s.mode = ProblemMode::spacetime;
  s.domain = {0.0, 1.0, 0.0, 1.0};
  s.epsilon = epsilon;
  s.b = [](const Vec2&, double) { return Vec2(1.0, 0.0); };
  // In spacetime mode the mesh y coordinate is time: u_t + b u_x - eps u_xx.
  s.f = [](const Vec2&, double) { return -3.0 + 2.0; };
  s.u_in = ex.u;
  s.u0 = [u = ex.u](const Vec2& p) { return u(Vec2(p.x(), 0.0), 0.0); };
  s.g = [epsilon](const Vec2&, double) { return epsilon * 2.0; };
  s.exact = ex;
  return s;
}

} // namespace avsfe::testing
