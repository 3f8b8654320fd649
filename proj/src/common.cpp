#include "slipflow/common.hpp"

namespace slipflow {

Vec2 central_gradient(const ScalarFn& f, const Vec2& x, double step) {
  Vec2 g;
  for (int j = 0; j < 2; ++j) {
    Vec2 e = Vec2::Zero();
    e[j] = step;
    g[j] = (f(x + e) - f(x - e)) / (2 * step);
  }
  return g;
}

Mat2 central_jacobian(const VectorFn& f, const Vec2& x, double step) {
  Mat2 m;
  for (int j = 0; j < 2; ++j) {
    Vec2 e = Vec2::Zero();
    e[j] = step;
    m.col(j) = (f(x + e) - f(x - e)) / (2 * step);
  }
  return m;
}

Vec2 ScalarField::grad(const Vec2& x, double step) const {
  if (gradient) return gradient(x);
  return central_gradient(value, x, step);
}

Mat2 VectorField::jac(const Vec2& x, double step) const {
  if (jacobian) return jacobian(x);
  return central_jacobian(value, x, step);
}

}  // namespace slipflow
