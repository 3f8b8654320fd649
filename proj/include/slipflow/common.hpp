#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace slipflow {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Evaluation outside the carrier of a map or field.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input that violates an operation's precondition.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IncompatibleData : SolverError {
  IncompatibleData(const std::string& what, double defect)
      : SolverError(what), defect(defect) {}
  double defect;
};

struct SingularSystem : SolverError {
  SingularSystem(const std::string& what, int kernel_dim, double pivot)
      : SolverError(what), kernel_dim(kernel_dim), pivot(pivot) {}
  int kernel_dim;
  double pivot;  // smallest pivot / singular value estimate, NaN if unknown
};

using ScalarFn = std::function<double(const Vec2&)>;
using VectorFn = std::function<Vec2(const Vec2&)>;
using GradFn = std::function<Vec2(const Vec2&)>;
using JacFn = std::function<Mat2(const Vec2&)>;

/// Scalar field with optional gradient. If `gradient` is empty,
/// central differences are used.
struct ScalarField {
  ScalarFn value;
  GradFn gradient;

  double operator()(const Vec2& x) const { return value(x); }
  Vec2 grad(const Vec2& x, double step = 1e-5) const;
};

/// Vector field with optional Jacobian, jacobian(x)(i, j) = d_j v^i.
struct VectorField {
  VectorFn value;
  JacFn jacobian;

  Vec2 operator()(const Vec2& x) const { return value(x); }
  Mat2 jac(const Vec2& x, double step = 1e-5) const;
};

Vec2 central_gradient(const ScalarFn& f, const Vec2& x, double step);
Mat2 central_jacobian(const VectorFn& f, const Vec2& x, double step);

inline Mat2 sym(const Mat2& m) { return 0.5 * (m + m.transpose()); }

/// Adjugate of a 2x2 matrix, adj(M) M = det(M) I.
inline Mat2 adjugate(const Mat2& m) {
  Mat2 a;
  a << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return a;
}

inline Mat2 rotation(double angle) {
  Mat2 r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

}  // namespace slipflow
