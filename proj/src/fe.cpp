#include "slipflow/fe.hpp"

#include <map>

namespace slipflow {

LagrangeSpace::LagrangeSpace(const TriMesh& mesh, int degree)
    : mesh_(&mesh), degree_(degree), topo_(build_edges(mesh)) {
  if (degree != 1 && degree != 2) throw InvalidInput("LagrangeSpace: degree must be 1 or 2");
  num_nodes_ = mesh.num_vertices() + (degree == 2 ? static_cast<int>(topo_.edges.size()) : 0);
  vertex_edges_.resize(mesh.num_vertices());
  for (int e = 0; e < static_cast<int>(topo_.edges.size()); ++e) {
    vertex_edges_[topo_.edges[e][0]].emplace_back(topo_.edges[e][1], e);
  }
}

std::array<int, 6> LagrangeSpace::element_nodes(int t) const {
  const auto& tr = mesh_->triangles[t];
  std::array<int, 6> n{tr[0], tr[1], tr[2], -1, -1, -1};
  if (degree_ == 2)
    for (int k = 0; k < 3; ++k) n[3 + k] = mesh_->num_vertices() + topo_.tri_edges[t][k];
  return n;
}

Vec2 LagrangeSpace::node_coord(int node) const {
  const int nv = mesh_->num_vertices();
  if (node < nv) return mesh_->vertices[node];
  const auto& e = topo_.edges[node - nv];
  return 0.5 * (mesh_->vertices[e[0]] + mesh_->vertices[e[1]]);
}

int LagrangeSpace::edge_id(int a, int b) const {
  if (a > b) std::swap(a, b);
  for (const auto& [other, id] : vertex_edges_[a])
    if (other == b) return id;
  throw MeshError("LagrangeSpace: edge not in mesh");
}

std::vector<int> LagrangeSpace::edge_nodes(const BoundaryEdge& e) const {
  if (degree_ == 1) return {e.a, e.b};
  return {e.a, e.b, mesh_->num_vertices() + edge_id(e.a, e.b)};
}

void reference_shapes(int degree, const Vec2& ref, double* phi, Vec2* dphi) {
  const double l1 = ref.x(), l2 = ref.y(), l0 = 1 - l1 - l2;
  const Vec2 g0(-1, -1), g1(1, 0), g2(0, 1);
  if (degree == 1) {
    phi[0] = l0, phi[1] = l1, phi[2] = l2;
    if (dphi) dphi[0] = g0, dphi[1] = g1, dphi[2] = g2;
    return;
  }
  const double l[3] = {l0, l1, l2};
  const Vec2 g[3] = {g0, g1, g2};
  for (int i = 0; i < 3; ++i) {
    phi[i] = l[i] * (2 * l[i] - 1);
    if (dphi) dphi[i] = (4 * l[i] - 1) * g[i];
  }
  for (int k = 0; k < 3; ++k) {
    int i = (k + 1) % 3, j = (k + 2) % 3;
    phi[3 + k] = 4 * l[i] * l[j];
    if (dphi) dphi[3 + k] = 4 * (l[i] * g[j] + l[j] * g[i]);
  }
}

void edge_shapes(int degree, double s, double* phi) {
  if (degree == 1) {
    phi[0] = 1 - s;
    phi[1] = s;
    return;
  }
  phi[0] = (1 - s) * (1 - 2 * s);
  phi[1] = s * (2 * s - 1);
  phi[2] = 4 * s * (1 - s);
}

ElementQuad element_quadrature(const LagrangeSpace& V, int t, const QuadratureRule& rule) {
  const TriMesh& m = V.mesh();
  const auto& tr = m.triangles[t];
  const Vec2 &a = m.vertices[tr[0]], &b = m.vertices[tr[1]], &c = m.vertices[tr[2]];
  Mat2 B;
  B.col(0) = b - a;
  B.col(1) = c - a;
  const double area = 0.5 * B.determinant();
  const Mat2 BinvT = B.inverse().transpose();
  const int np = V.nodes_per_element();
  ElementQuad q;
  const std::size_t n = rule.points.size();
  q.x.resize(n);
  q.w.resize(n);
  q.phi.resize(n);
  q.grad.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    q.x[i] = a + B * rule.points[i];
    q.w[i] = area * rule.weights[i];
    Vec2 dref[6];
    reference_shapes(V.degree(), rule.points[i], q.phi[i].data(), dref);
    for (int k = 0; k < np; ++k) q.grad[i][k] = BinvT * dref[k];
  }
  return q;
}

double eval_field(const LagrangeSpace& V, const Eigen::VectorXd& u, int t, const Vec2& x, Vec2* grad) {
  const TriMesh& m = V.mesh();
  const auto& tr = m.triangles[t];
  const Vec2& a = m.vertices[tr[0]];
  Mat2 B;
  B.col(0) = m.vertices[tr[1]] - a;
  B.col(1) = m.vertices[tr[2]] - a;
  Vec2 ref = B.inverse() * (x - a);
  double phi[6];
  Vec2 dref[6];
  reference_shapes(V.degree(), ref, phi, dref);
  auto nodes = V.element_nodes(t);
  double val = 0;
  Vec2 g = Vec2::Zero();
  const Mat2 BinvT = B.inverse().transpose();
  for (int k = 0; k < V.nodes_per_element(); ++k) {
    val += u[nodes[k]] * phi[k];
    g += u[nodes[k]] * (BinvT * dref[k]);
  }
  if (grad) *grad = g;
  return val;
}

namespace {
template <class Local>
SpMat assemble_scalar(const LagrangeSpace& V, int degree, Local local) {
  QuadratureRule rule = triangle_rule(degree);
  Triplets trip;
  const int np = V.nodes_per_element();
  for (int t = 0; t < V.mesh().num_triangles(); ++t) {
    ElementQuad q = element_quadrature(V, t, rule);
    auto nodes = V.element_nodes(t);
    for (std::size_t i = 0; i < q.w.size(); ++i)
      for (int a = 0; a < np; ++a)
        for (int b = 0; b < np; ++b) trip.emplace_back(nodes[a], nodes[b], q.w[i] * local(q, i, a, b));
  }
  SpMat A(V.num_nodes(), V.num_nodes());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}
}  // namespace

SpMat assemble_stiffness(const LagrangeSpace& V) {
  return assemble_scalar(V, 2 * (V.degree() - 1), [](const ElementQuad& q, std::size_t i, int a, int b) {
    return q.grad[i][a].dot(q.grad[i][b]);
  });
}

SpMat assemble_mass(const LagrangeSpace& V) {
  return assemble_scalar(V, 2 * V.degree(), [](const ElementQuad& q, std::size_t i, int a, int b) {
    return q.phi[i][a] * q.phi[i][b];
  });
}

}  // namespace slipflow
