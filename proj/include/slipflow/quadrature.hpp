#pragma once

#include "slipflow/common.hpp"

#include <vector>

namespace slipflow {

/// Gauss-Legendre rule on [0, 1]; weights sum to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};

LineRule gauss_legendre(int npoints);

/// Rule on the reference triangle {(x, y) : x, y >= 0, x + y <= 1}.
/// Weights sum to 1, so the integral over a triangle T is
/// |T| * sum_i w_i f(p_i).
struct QuadratureRule {
  std::vector<Vec2> points;  // reference coordinates (x, y)
  std::vector<double> weights;
  int degree = 0;  // polynomial exactness
};

/// Collapsed (conical product) Gauss rule exact for polynomials of
/// total degree <= `degree`.
QuadratureRule triangle_rule(int degree);

/// Union of a rule and its image under (x, y) -> (y, x), weights halved.
/// On a mirrored triangle (vertex order b and c swapped) the points of
/// this rule are exact mirror images of the original ones.
QuadratureRule swap_symmetric(const QuadratureRule& r);

/// Quadrature "level" used by the verification suites: exactness 2*level.
inline QuadratureRule triangle_rule_level(int level) { return triangle_rule(2 * level); }

}  // namespace slipflow
