#pragma once

#include "slipflow/piola.hpp"
#include "slipflow/stokes.hpp"

namespace slipflow {

/// Even/odd reflection across {y = line_y}: tangential velocity and
/// pressure even, normal velocity odd. Fields are given on {y <= line_y}.
FieldPair reflect_data(const FieldPair& half, double line_y = 0);
/// Vector datum with the same parity as the velocity.
VectorFn reflect_vector(const VectorFn& half, double line_y = 0);

/// u'(x) = (w'(x) + w'(x*))/2, u^n(x) = (w^n(x) - w^n(x*))/2, p likewise even,
/// x* the mirror image of x.
FieldPair fold_solution(const FieldPair& full, double line_y = 0);

/// Nodal fold of a discrete full-disc velocity through the node mirror map.
Eigen::VectorXd fold_nodal(const Eigen::VectorXd& u_full, const std::vector<int>& node_mirror);

/// Mirror map on P2 nodes induced by a vertex mirror map.
std::vector<int> node_mirror_map(const LagrangeSpace& V, const std::vector<int>& vertex_mirror);

struct ReflectionConfig {
  Vec2 center = Vec2::Zero();
  double radius = 1;
  double h = 0.125;
  double eta = 1;
  VectorFn f;  // on the lower half-disc; empty = zero data
};

struct ReflectionReport {
  double difference = 0;   // max nodal |fold(full) - half|
  double disc_error = 0;   // max nodal |u_h - u_{h/2}| of the half solve
  double energy_half = 0, energy_full = 0, energy_ratio = 0;
  double parity_error = 0;  // mirrored pairs of the full solution
  double flat_normal = 0;   // max |u^n| of the folded field on the flat side
  int kernel_dim_full = 0;
  bool cross_ok = false, energy_ok = false;
  bool pass() const { return cross_ok && energy_ok; }
};

/// Solves the reflected problem on the mirrored full disc and the slip
/// problem on the half-disc directly, and compares them.
ReflectionReport verify_reflection_consistency(const ReflectionConfig& cfg);

/// Default manufactured datum: a smooth force supported in B(center, radius/2).
VectorFn reflection_test_force(const Vec2& center, double radius);

}  // namespace slipflow
