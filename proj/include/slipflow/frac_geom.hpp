#pragma once

#include "slipflow/common.hpp"

#include <optional>

namespace slipflow {

using RealFn = std::function<double(double)>;

/// Rigid motion taking graph-local coordinates to physical coordinates.
struct RigidFrame {
  double angle = 0;
  Vec2 offset = Vec2::Zero();

  Vec2 to_physical(const Vec2& local) const { return rotation(angle) * local + offset; }
  Vec2 to_local(const Vec2& phys) const { return rotation(-angle) * (phys - offset); }
};

/// Local boundary graph y^n = omega(y') over the disc D(center, delta).
/// Only n = 2 is implemented, so the disc is an interval.
struct BoundaryGraph {
  int n = 2;
  double center = 0;
  double delta = 1;
  RealFn eval;
  RealFn grad_eval;
  double s = 4;
  bool normalized = false;
  RigidFrame frame;
};

BoundaryGraph make_graph(RealFn eval, RealFn grad_eval, double center, double delta,
                         double s, int n = 2);

/// Mean of omega over D(center, delta) by Gauss quadrature.
double graph_mean(const BoundaryGraph& g);

/// Rotate about (center, omega(center)) to zero slope there, then shift
/// vertically to zero mean over D(center, delta).
BoundaryGraph normalize_graph(const BoundaryGraph& g);

/// (n-1)-dimensional disc; for n = 2 an interval.
struct Disc1 {
  double center = 0;
  double radius = 1;
};

/// Thrown when the Hoelder exponent of f is too small for the double
/// integral to converge.
struct InsufficientSmoothness : InvalidInput {
  using InvalidInput::InvalidInput;
};

/// (int int |f(x) - f(y)|^p / |x - y|^{(n-1) + theta p})^{1/p} over the disc.
double gagliardo_seminorm(const RealFn& f, const Disc1& disc, double theta, double p,
                          int n = 2, int level = 4);

struct GraphEstimates {
  double sup_norm = 0;        // ||omega||_inf
  double grad_sup = 0;        // ||grad' omega||_inf
  double seminorm_top = 0;    // |omega|_{2-1/s,s}
  double seminorm_low = 0;    // |omega|_{1-1/s,s}
  std::optional<double> inf_ratio;   // ||omega||_inf / (delta^{2-n/s} |omega|_{2-1/s,s})
  std::optional<double> grad_ratio;  // ||grad omega||_inf / (delta^{1-n/s} |omega|_{2-1/s,s})
  std::optional<double> low_ratio;   // |omega|_{1-1/s,s} / (delta^{n/s} ||grad omega||_inf)
};

GraphEstimates verify_graph_estimates(const BoundaryGraph& g, int level = 4);

/// Radial bump: 1 on B(center, delta/2), 0 outside B(center, delta).
struct CutoffFunction {
  Vec2 center = Vec2::Zero();
  double delta = 1;

  /// Smooth step e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)}) on [0, 1] and its derivatives.
  static double step(double t);
  static double step_d1(double t);
  static double step_d2(double t);

  double radial(double r) const;
  double radial_d1(double r) const;
  double radial_d2(double r) const;

  double eval(const Vec2& x) const;
  Vec2 grad(const Vec2& x) const;
  Mat2 hessian(const Vec2& x) const;
  double operator()(const Vec2& x) const { return eval(x); }
};

CutoffFunction make_cutoff(const Vec2& center, double delta);

/// Corner-smoothed lower half-ball: top segment on {x^n = center^n},
/// lower arc of radius 3 delta/2 (1 - eps_f), joined by fillets.
struct BubbleDomain {
  Vec2 center = Vec2::Zero();
  double delta = 1;
  double fillet = 0.25;
  double eps_f = 0.02;

  double arc_radius() const { return 1.5 * delta * (1 - eps_f); }
  /// Half-width of the straight top segment (fillet tangent point).
  double top_half_width() const;
  /// Distance from center to the boundary along direction angle
  /// theta in [pi, 2 pi].
  double boundary_distance(double theta) const;
  bool contains(const Vec2& x, double tol = 0) const;
};

BubbleDomain make_bubble(const Vec2& center, double delta);

}  // namespace slipflow
