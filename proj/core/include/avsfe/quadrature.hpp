#pragma once

#include <utility>
#include <vector>

#include "avsfe/mesh.hpp"

namespace avsfe {

// Rule on the reference triangle (0,0)-(1,0)-(0,1); weights sum to 1/2.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int order = 0; // exact for polynomials up to this total degree
};

// Rule on [0,1]; weights sum to 1.
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
  int order = 0;
};

// Gauss-Legendre nodes and weights on [0,1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre01(int n);

// Exact for the requested total degree. Points are strictly interior and
// weights positive (tensor Gauss rule under the Duffy map).
QuadratureRule triangle_quadrature(int order);

EdgeRule edge_quadrature(int order);

} // namespace avsfe
