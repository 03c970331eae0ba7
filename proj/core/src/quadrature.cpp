#include "avsfe/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace avsfe {

std::pair<std::vector<double>, std::vector<double>> gauss_legendre01(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre01: n must be >= 1");
  std::vector<double> x(n), w(n);
  // Newton on P_n over [-1,1]; nodes seeded by the Chebyshev approximation.
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = 0.5 * (1.0 - t); // descending t maps to ascending x on [0,1]
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
  return {x, w};
}

QuadratureRule triangle_quadrature(int order) {
  if (order < 1) throw std::invalid_argument("triangle_quadrature: order must be >= 1");
  // Duffy map (u,v) -> (u(1-v), v) with Jacobian (1-v). The integrand of a
  // degree-d polynomial is degree d in u and d+1 in v, so both directions
  // integrate exactly with the point counts below.
  const int nu = (order + 2) / 2;
  const int nv = (order + 3) / 2;
  auto [xu, wu] = gauss_legendre01(nu);
  auto [xv, wv] = gauss_legendre01(nv);

  QuadratureRule rule;
  rule.order = order;
  rule.points.reserve(static_cast<size_t>(nu) * nv);
  rule.weights.reserve(static_cast<size_t>(nu) * nv);
  for (int j = 0; j < nv; ++j) {
    for (int i = 0; i < nu; ++i) {
      rule.points.emplace_back(xu[i] * (1.0 - xv[j]), xv[j]);
      rule.weights.push_back(wu[i] * wv[j] * (1.0 - xv[j]));
    }
  }
  return rule;
}

EdgeRule edge_quadrature(int order) {
  if (order < 1) throw std::invalid_argument("edge_quadrature: order must be >= 1");
  const int n = (order + 2) / 2;
  auto [x, w] = gauss_legendre01(n);
  return {x, w, order};
}

} // namespace avsfe
