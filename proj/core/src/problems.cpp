#include "avsfe/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace avsfe {

namespace {

constexpr double kGrowth = 2.0; // l in exp(l t)

double sech2(double x) {
  const double c = std::cosh(x); // overflows to inf for |x| > ~710; 1/inf^2 = 0
  return 1.0 / (c * c);
}

} // namespace

ScalarFn manufactured_source(double epsilon, const VectorFn& b, const ExactBundle& exact) {
  if (!exact.u || !exact.grad_u || !exact.lap_u || !exact.du_dt)
    throw std::invalid_argument("manufactured_source: incomplete exact bundle");
  return [epsilon, b, exact](const Vec2& p, double t) {
    return exact.du_dt(p, t) - epsilon * exact.lap_u(p, t) + b(p, t).dot(exact.grad_u(p, t));
  };
}

LayerParams layer_params(double epsilon) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("layer_params: epsilon must be positive");
  const double disc = 1.0 - 4.0 * epsilon * kGrowth;
  if (disc < 0.0)
    throw std::invalid_argument("layer_params: 1 - 4*eps*l negative, no real transient profile");
  LayerParams lp;
  lp.epsilon = epsilon;
  const double d = std::sqrt(disc);
  lp.lambda1 = (-1.0 + d) / (-2.0 * epsilon);
  lp.lambda2 = (-1.0 - d) / (-2.0 * epsilon);
  const double e = std::sqrt(1.0 + 4.0 * M_PI * M_PI * epsilon * epsilon);
  lp.r = (1.0 + e) / (2.0 * epsilon);
  lp.s = (1.0 - e) / (2.0 * epsilon);
  return lp;
}

namespace {

// Shared construction of the layer solution; with_cos selects the 2d spatial
// variant (cos(pi y) steady factor) or the space-time x profile.
ProblemSpec make_layer_problem(double epsilon, bool with_cos) {
  const LayerParams lp = layer_params(epsilon);
  const double l1 = lp.lambda1, l2 = lp.lambda2, r = lp.r, s = lp.s;
  const double denom = std::exp(-s) - std::exp(-r);

  auto steady = [=](double x) { return (std::exp(s * x) - std::exp(r * x)) / denom; };
  auto steady_x = [=](double x) { return (s * std::exp(s * x) - r * std::exp(r * x)) / denom; };
  auto steady_xx = [=](double x) { return (s * s * std::exp(s * x) - r * r * std::exp(r * x)) / denom; };
  auto trans = [=](double x, double t) {
    return std::exp(kGrowth * t) * (std::exp(l1 * x) - std::exp(l2 * x));
  };
  auto trans_x = [=](double x, double t) {
    return std::exp(kGrowth * t) * (l1 * std::exp(l1 * x) - l2 * std::exp(l2 * x));
  };
  auto trans_xx = [=](double x, double t) {
    return std::exp(kGrowth * t) * (l1 * l1 * std::exp(l1 * x) - l2 * l2 * std::exp(l2 * x));
  };

  ExactBundle ex;
  if (with_cos) {
    ex.u = [=](const Vec2& p, double t) {
      return trans(p.x(), t) + std::cos(M_PI * p.y()) * steady(p.x());
    };
    ex.grad_u = [=](const Vec2& p, double t) {
      return Vec2(trans_x(p.x(), t) + std::cos(M_PI * p.y()) * steady_x(p.x()),
                  -M_PI * std::sin(M_PI * p.y()) * steady(p.x()));
    };
    ex.lap_u = [=](const Vec2& p, double t) {
      return trans_xx(p.x(), t) +
             std::cos(M_PI * p.y()) * (steady_xx(p.x()) - M_PI * M_PI * steady(p.x()));
    };
    ex.du_dt = [=](const Vec2& p, double t) { return kGrowth * trans(p.x(), t); };
  } else {
    ex.u = [=](const Vec2& p, double t) { return trans(p.x(), t) + steady(p.x()); };
    ex.grad_u = [=](const Vec2& p, double t) {
      return Vec2(trans_x(p.x(), t) + steady_x(p.x()), 0.0);
    };
    ex.lap_u = [=](const Vec2& p, double t) { return trans_xx(p.x(), t) + steady_xx(p.x()); };
    ex.du_dt = [=](const Vec2& p, double t) { return kGrowth * trans(p.x(), t); };
  }

  ProblemSpec ps;
  ps.mode = with_cos ? ProblemMode::spatial : ProblemMode::spacetime;
  ps.epsilon = epsilon;
  ps.b = [](const Vec2&, double) { return Vec2(1.0, 0.0); };
  ps.f = manufactured_source(epsilon, ps.b, ex);
  ps.u_in = [u = ex.u](const Vec2& p, double t) { return u(p, t); };
  ps.u0 = [u = ex.u](const Vec2& p) { return u(p, 0.0); };
  ps.exact = ex;
  if (with_cos) {
    ps.name = "eriksson_johnson";
    ps.domain = {-1.0, 0.0, -0.5, 0.5};
  } else {
    ps.name = "eriksson_johnson_1d";
    ps.domain = {-1.0, 0.0, 0.0, 1.0};
  }
  return ps;
}

} // namespace

ProblemSpec eriksson_johnson(double epsilon) { return make_layer_problem(epsilon, true); }

ProblemSpec eriksson_johnson_1d(double epsilon) { return make_layer_problem(epsilon, false); }

ProblemSpec rotating_ring(double steepness) {
  const double M = steepness;

  // Ring profile S(rho) = 1 + tanh(M(0.15 - |0.5 - rho|)). Rotationally
  // symmetric, so b . grad u = 0 for the rotating field b = (-y, x).
  auto S = [M](double rho) { return 1.0 + std::tanh(M * (0.15 - std::abs(0.5 - rho))); };
  auto Sp = [M](double rho) {
    const double sign = 0.5 - rho >= 0.0 ? 1.0 : -1.0;
    return M * sech2(M * (0.15 - std::abs(0.5 - rho))) * sign;
  };
  auto Spp = [M](double rho) {
    const double a = M * (0.15 - std::abs(0.5 - rho));
    return -2.0 * M * M * sech2(a) * std::tanh(a);
  };

  ExactBundle ex;
  ex.u = [=](const Vec2& p, double t) { return 0.5 * t * t * S(p.norm()); };
  ex.grad_u = [=](const Vec2& p, double t) {
    const double rho = p.norm();
    if (rho < 1e-12) return Vec2(0.0, 0.0); // S' underflows to 0 well before the origin
    return Vec2(0.5 * t * t * Sp(rho) / rho * p);
  };
  ex.lap_u = [=](const Vec2& p, double t) {
    const double rho = p.norm();
    if (rho < 1e-12) return 0.0;
    return 0.5 * t * t * (Spp(rho) + Sp(rho) / rho);
  };
  ex.du_dt = [=](const Vec2& p, double t) { return t * S(p.norm()); };

  ProblemSpec ps;
  ps.name = "rotating_ring";
  ps.mode = ProblemMode::spatial;
  ps.epsilon = 0.0;
  ps.b = [](const Vec2& p, double) { return Vec2(-p.y(), p.x()); };
  ps.f = manufactured_source(0.0, ps.b, ex);
  ps.u_in = [u = ex.u](const Vec2& p, double t) { return u(p, t); };
  ps.u0 = [](const Vec2&) { return 0.0; };
  ps.exact = ex;
  ps.domain = {0.0, 1.0, 0.0, 1.0};
  return ps;
}

ProblemSpec shock_problem() {
  ProblemSpec ps;
  ps.name = "shock";
  ps.mode = ProblemMode::spatial;
  ps.epsilon = 1e-3;
  ps.b = [](const Vec2& p, double) { return Vec2(-p.x() + 2.0 * p.y(), 0.0); };
  ps.f = [eps = ps.epsilon](const Vec2& p, double) {
    return -2.0 * p.x() * eps + p.x() * (1.0 - p.y() * p.y());
  };
  ps.u_in = [](const Vec2&, double) { return 0.0; };
  ps.u0 = [](const Vec2&) { return 0.0; };
  ps.domain = {-1.0, 1.0, -1.0, 1.0};
  return ps;
}

RectTags default_tags(const ProblemSpec& spec) {
  RectTags tags;
  if (spec.mode == ProblemMode::spacetime) {
    tags.left = BoundaryTag::inflow;
    tags.right = spec.g ? BoundaryTag::outflow : BoundaryTag::inflow;
    tags.bottom = BoundaryTag::initial_time;
    tags.top = BoundaryTag::final_time;
  } else {
    tags.left = tags.right = tags.bottom = tags.top = BoundaryTag::inflow;
  }
  return tags;
}

ProblemSpec problem_by_name(const std::string& name, double epsilon, double steepness) {
  if (name == "eriksson_johnson") return eriksson_johnson(epsilon);
  if (name == "eriksson_johnson_1d") return eriksson_johnson_1d(epsilon);
  if (name == "rotating_ring") return rotating_ring(steepness);
  if (name == "shock") return shock_problem();
  throw std::invalid_argument("unknown problem name: " + name);
}

} // namespace avsfe
