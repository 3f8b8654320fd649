#pragma once

#include "slipflow/mesh.hpp"
#include "slipflow/quadrature.hpp"

#include <Eigen/Sparse>

namespace slipflow {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

/// Continuous Lagrange space of degree 1 or 2 on a triangle mesh.
/// Node ids: vertices first, then (degree 2) one node per edge.
/// Local P2 order: vertices 0..2, then midpoints of local edges 0..2
/// (edge k is opposite vertex k).
class LagrangeSpace {
 public:
  LagrangeSpace(const TriMesh& mesh, int degree);

  const TriMesh& mesh() const { return *mesh_; }
  const EdgeTopology& topology() const { return topo_; }
  int degree() const { return degree_; }
  int num_nodes() const { return num_nodes_; }
  int nodes_per_element() const { return degree_ == 1 ? 3 : 6; }
  std::array<int, 6> element_nodes(int t) const;
  Vec2 node_coord(int node) const;
  /// Node ids on a boundary edge: endpoints, then the midpoint for P2.
  std::vector<int> edge_nodes(const BoundaryEdge& e) const;
  int edge_id(int a, int b) const;

 private:
  const TriMesh* mesh_;
  int degree_;
  EdgeTopology topo_;
  int num_nodes_;
  std::vector<std::vector<std::pair<int, int>>> vertex_edges_;
};

/// Reference shape values and gradients at reference point (x, y).
void reference_shapes(int degree, const Vec2& ref, double* phi, Vec2* dphi);
/// Shape values on a boundary edge at parameter s in [0, 1]: endpoints, midpoint.
void edge_shapes(int degree, double s, double* phi);

/// Per-element quadrature data with physical gradients.
struct ElementQuad {
  std::vector<Vec2> x;
  std::vector<double> w;  // includes |T|
  std::vector<std::array<double, 6>> phi;
  std::vector<std::array<Vec2, 6>> grad;
};

ElementQuad element_quadrature(const LagrangeSpace& V, int t, const QuadratureRule& rule);

/// Value and gradient of a nodal field at a point inside triangle t.
double eval_field(const LagrangeSpace& V, const Eigen::VectorXd& u, int t, const Vec2& x,
                  Vec2* grad = nullptr);

SpMat assemble_stiffness(const LagrangeSpace& V);
SpMat assemble_mass(const LagrangeSpace& V);

}  // namespace slipflow
