#pragma once

#include <vector>

namespace uavsec {

/// Gauss-Legendre rule mapped to [0, 1]; weights sum to 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int order() const { return static_cast<int>(nodes.size()); }
};

/// Nodes by Newton iteration on P_n; exact for polynomials of degree 2n-1.
QuadratureRule gauss_legendre01(int order);

}  // namespace uavsec
