#pragma once

#include "slipflow/frac_geom.hpp"
#include "slipflow/mesh.hpp"

#include <memory>
#include <optional>

namespace slipflow {

/// C omega(y') = rho(y', omega(y')) omega(y'), in graph-local coordinates.
RealFn compact_support_graph(const BoundaryGraph& g, const CutoffFunction& rho);

/// Piecewise-linear field on a bubble mesh, optionally multiplied by a cutoff.
class ExtensionField {
 public:
  ExtensionField(BubbleDomain carrier, std::shared_ptr<const TriMesh> mesh, Eigen::VectorXd values);

  const BubbleDomain& carrier() const { return carrier_; }
  const TriMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const TriMesh> mesh_ptr() const { return mesh_; }
  const Eigen::VectorXd& values() const { return values_; }
  const std::optional<CutoffFunction>& cutoff() const { return cutoff_; }
  double solve_residual() const { return residual_; }

  /// Returns a copy multiplied pointwise by rho.
  ExtensionField times(const CutoffFunction& rho) const;

  /// Triangle containing x, or -1 outside the mesh.
  int element(const Vec2& x) const;
  double eval(const Vec2& x) const;
  Vec2 grad(const Vec2& x) const;
  Mat2 hessian(const Vec2& x) const;
  /// max over nodes of |value| (times the cutoff if present)
  double max_abs_nodal() const;

  void set_residual(double r) { residual_ = r; }

 private:
  // P1 interpolant and its (elementwise constant) gradient; zero outside.
  double base(const Vec2& x, Vec2* g) const;

  BubbleDomain carrier_;
  std::shared_ptr<const TriMesh> mesh_;
  std::shared_ptr<const PointLocator> locator_;
  Eigen::VectorXd values_;
  std::optional<CutoffFunction> cutoff_;
  double residual_ = 0;
};

/// Discrete harmonic extension with data C on the top segment and 0 on the
/// curved boundary, on the structured bubble mesh of size h.
ExtensionField harmonic_extension(const RealFn& C, const BubbleDomain& theta, double h);
/// Same on a supplied mesh of the bubble.
ExtensionField harmonic_extension_on(const RealFn& C, const BubbleDomain& theta,
                                     std::shared_ptr<const TriMesh> mesh);

/// E~ = rho * E.
ExtensionField full_extension(const ExtensionField& E, const CutoffFunction& rho);

/// Psi(x) = (x', x^n + E~(x)) on the closed lower half-plane below the bubble top.
class Diffeomorphism {
 public:
  Diffeomorphism(ExtensionField tilde, Vec2 center, double delta);

  const ExtensionField& tilde() const { return tilde_; }
  Vec2 center() const { return center_; }
  double delta() const { return delta_; }

  bool in_reference(const Vec2& xr, double tol = 1e-12) const { return xr.y() <= center_.y() + tol; }
  Vec2 apply(const Vec2& xr) const;
  Mat2 gradient(const Vec2& xr) const;
  double jacobian(const Vec2& xr) const;
  /// d/dx^k of grad Psi.
  std::array<Mat2, 2> gradient_derivative(const Vec2& xr) const;
  /// Newton inverse of the last coordinate; DomainError outside the image.
  Vec2 inverse(const Vec2& x, int* iterations = nullptr) const;

 private:
  ExtensionField tilde_;
  Vec2 center_;
  double delta_;
  double bound_;  // max |E~| for the Newton bracket
};

/// sup |1 - J| over a tensor grid of spacing h covering the support
/// (default h = delta / 100).
double jacobian_gap(const Diffeomorphism& d, double h = 0);

/// sup |grad E~| over the same grid.
double w1inf_seminorm(const Diffeomorphism& d, double h = 0);

/// Throws InvalidInput when the gap is >= 1/2.
Diffeomorphism build_diffeomorphism(const ExtensionField& tilde);

struct Flattening {
  BoundaryGraph graph;  // normalized, possibly with reduced delta
  CutoffFunction rho;
  BubbleDomain bubble;
  RealFn compact;
  std::shared_ptr<const ExtensionField> extension;
  std::shared_ptr<const Diffeomorphism> psi;
  double gap = 0;
  int halvings = 0;
};

/// Full pipeline on a graph with mesh size h = delta * h_ratio. With
/// `search`, delta is halved until the gap falls below 0.4.
Flattening flatten_graph(const BoundaryGraph& g, double h_ratio = 1.0 / 16, bool search = false);

}  // namespace slipflow
