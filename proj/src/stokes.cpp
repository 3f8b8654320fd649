#include "slipflow/stokes.hpp"

#include "slipflow/symbolic.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

namespace slipflow {

namespace {

constexpr double kPi = std::numbers::pi;
// Adjacent slip edges turning by more than this are treated as a corner.
const double kCornerCos = std::cos(50.0 * kPi / 180.0);

int dof(int node, int comp) { return 2 * node + comp; }

Vec2 tangent(const Vec2& n) { return Vec2(-n.y(), n.x()); }

// Vector version of a scalar nodal operator (block I (x) S).
SpMat vectorize(const SpMat& S) {
  Triplets tr;
  for (int k = 0; k < S.outerSize(); ++k)
    for (SpMat::InnerIterator it(S, k); it; ++it)
      for (int c = 0; c < 2; ++c) tr.emplace_back(dof(it.row(), c), dof(it.col(), c), it.value());
  SpMat V(2 * S.rows(), 2 * S.cols());
  V.setFromTriplets(tr.begin(), tr.end());
  return V;
}

SpMat h1_gram(const LagrangeSpace& V) {
  SpMat K = assemble_stiffness(V), M = assemble_mass(V);
  SpMat G = K + M;
  return vectorize(G);
}

struct EdgeQuad {
  std::vector<Vec2> x;
  std::vector<double> w;  // includes length
  std::vector<std::array<double, 3>> phi;
};

EdgeQuad edge_quadrature(const TriMesh& m, const BoundaryEdge& e, int degree, int npts) {
  LineRule g = gauss_legendre(npts);
  const Vec2 &a = m.vertices[e.a], &b = m.vertices[e.b];
  const double len = (b - a).norm();
  EdgeQuad q;
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    double s = g.points[i];
    q.x.push_back(a + s * (b - a));
    q.w.push_back(len * g.weights[i]);
    std::array<double, 3> phi{};
    edge_shapes(degree, s, phi.data());
    q.phi.push_back(phi);
  }
  return q;
}

Eigen::MatrixXd dense(const SpMat& S) { return Eigen::MatrixXd(S); }

// Null space of a small dense matrix by SVD with the kernel threshold.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& rows, int cols, std::vector<double>* sv = nullptr) {
  if (rows.rows() == 0) {
    if (sv) sv->clear();
    return Eigen::MatrixXd::Identity(cols, cols);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(cols);
  s.head(svd.singularValues().size()) = svd.singularValues();
  if (sv) sv->assign(s.data(), s.data() + s.size());
  const double smax = s.size() ? s.maxCoeff() : 0;
  std::vector<int> ker;
  for (int i = 0; i < cols; ++i)
    if (smax == 0 || s[i] < 1e-8 * smax) ker.push_back(i);
  Eigen::MatrixXd N(cols, static_cast<int>(ker.size()));
  for (std::size_t k = 0; k < ker.size(); ++k) N.col(k) = svd.matrixV().col(ker[k]);
  return N;
}

// Rigid motions at the velocity nodes: rotation about origin, x- and y-translation.
std::array<Eigen::VectorXd, 3> rigid_nodal(const LagrangeSpace& V, const Vec2& origin) {
  std::array<Eigen::VectorXd, 3> r;
  for (auto& v : r) v = Eigen::VectorXd::Zero(2 * V.num_nodes());
  for (int i = 0; i < V.num_nodes(); ++i) {
    Vec2 x = V.node_coord(i) - origin;
    r[0][dof(i, 0)] = x.y();
    r[0][dof(i, 1)] = -x.x();
    r[1][dof(i, 0)] = 1;
    r[2][dof(i, 1)] = 1;
  }
  return r;
}

Vec2 centroid(const TriMesh& m) {
  Vec2 c = Vec2::Zero();
  for (const Vec2& v : m.vertices) c += v;
  return c / std::max(1, m.num_vertices());
}

// Slip-normal constraint rows on (a, b1, b2) for the rigid motion
// a (y - y0, -(x - x0)) + b.
Eigen::MatrixXd rigid_constraint_rows(const SlipSpace& V, const Vec2& origin) {
  int nrows = 0;
  for (const auto& s : V.slip_nodes()) nrows += static_cast<int>(s.normals.size());
  Eigen::MatrixXd R(nrows, 3);
  int r = 0;
  for (const auto& s : V.slip_nodes()) {
    Vec2 x = V.space().node_coord(s.node) - origin;
    for (const Vec2& n : s.normals) R.row(r++) << x.y() * n.x() - x.x() * n.y(), n.x(), n.y();
  }
  return R;
}

template <class Solver>
void factor_or_throw(Solver& s, const SpMat& K, const char* what) {
  s.compute(K);
  if (s.info() != Eigen::Success) throw SingularSystem(what, -1, NAN);
}

}  // namespace

SlipSpace::SlipSpace(std::shared_ptr<const TriMesh> mesh, int degree, const TagSet& slip_tags,
                     const std::optional<BoundaryGraph>& graph)
    : mesh_(std::move(mesh)), V_(*mesh_, degree), tags_(slip_tags) {
  const TriMesh& m = *mesh_;
  const int nn = V_.num_nodes();
  normal_.assign(nn, Vec2::Zero());
  corner_.assign(nn, 0);
  std::vector<std::vector<Vec2>> adj(m.num_vertices());
  std::vector<int> graph_edges(m.num_vertices(), 0), slip_edges(m.num_vertices(), 0);
  std::vector<SlipNode> mids;

  auto exact = [&](const Vec2& x) -> std::optional<Vec2> {
    if (graph) return Vec2(-graph->grad_eval(x.x()), 1).normalized();
    if (m.geometry) return m.geometry->exact_normal(BoundaryTag::GraphTop, x);
    return std::nullopt;
  };

  for (const auto& e : m.boundary) {
    if (!is_slip_edge(e)) continue;
    Vec2 n = edge_normal(m, e);
    for (int v : {e.a, e.b}) {
      adj[v].push_back(n);
      ++slip_edges[v];
      if (e.tag == BoundaryTag::GraphTop) ++graph_edges[v];
    }
    if (degree == 2) {
      int node = V_.edge_nodes(e)[2];
      Vec2 nm = n;
      if (e.tag == BoundaryTag::GraphTop) {
        auto ex = exact(V_.node_coord(node));
        if (!ex) throw InvalidInput("SlipSpace: graph-top edges need an exact normal");
        nm = *ex;
      }
      mids.push_back({node, {nm}});
      normal_[node] = nm;
    }
  }
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (adj[v].empty()) continue;
    SlipNode s{v, {}};
    bool corner = false;
    for (std::size_t i = 0; i < adj[v].size(); ++i)
      for (std::size_t j = i + 1; j < adj[v].size(); ++j)
        if (adj[v][i].dot(adj[v][j]) < kCornerCos) corner = true;
    Vec2 avg = Vec2::Zero();
    for (const Vec2& n : adj[v]) avg += n;
    avg.normalize();
    if (corner) {
      s.normals = adj[v];
      corner_[v] = 1;
    } else if (graph_edges[v] == slip_edges[v]) {
      auto ex = exact(m.vertices[v]);
      if (!ex) throw InvalidInput("SlipSpace: graph-top edges need an exact normal");
      avg = *ex;
      s.normals = {avg};
    } else {
      s.normals = {avg};
    }
    normal_[v] = avg;
    slip_.push_back(s);
  }
  slip_.insert(slip_.end(), mids.begin(), mids.end());

  std::vector<char> is_slip(nn, 0);
  for (const auto& s : slip_) is_slip[s.node] = 1;
  Triplets tr;
  int col = 0;
  for (int i = 0; i < nn; ++i) {
    if (!is_slip[i]) {
      tr.emplace_back(dof(i, 0), col++, 1.0);
      tr.emplace_back(dof(i, 1), col++, 1.0);
    } else if (!corner_[i]) {
      Vec2 t = tangent(normal_[i]);
      tr.emplace_back(dof(i, 0), col, t.x());
      tr.emplace_back(dof(i, 1), col, t.y());
      ++col;
    }
  }
  E_.resize(2 * nn, col);
  E_.setFromTriplets(tr.begin(), tr.end());
}

RigidMotionBasis kernel_basis(const SlipSpace& V) {
  RigidMotionBasis B;
  B.origin = centroid(V.mesh());
  Eigen::MatrixXd R = rigid_constraint_rows(V, B.origin);
  Eigen::MatrixXd N = null_space(R, 3, &B.singular_values);
  auto r = rigid_nodal(V.space(), B.origin);
  SpMat Mu = vectorize(assemble_mass(V.space()));
  for (int k = 0; k < N.cols(); ++k) {
    Eigen::VectorXd z = N(0, k) * r[0] + N(1, k) * r[1] + N(2, k) * r[2];
    Eigen::Vector3d c = N.col(k);
    for (int j = 0; j < B.dim(); ++j) {
      double proj = B.nodal[j].dot(Mu * z);
      z -= proj * B.nodal[j];
      c -= proj * B.coeffs[j];
    }
    double nrm = std::sqrt(z.dot(Mu * z));
    if (nrm == 0) continue;
    B.nodal.push_back(z / nrm);
    B.coeffs.push_back(c / nrm);
  }
  return B;
}

StokesBlocks assemble_blocks(const StokesProblem& p, const SlipSpace& V, const LagrangeSpace& Q) {
  const LagrangeSpace& S = V.space();
  const TriMesh& m = V.mesh();
  const int nn = S.num_nodes(), np = Q.num_nodes(), ne = S.nodes_per_element(), nq = Q.nodes_per_element();
  StokesBlocks b;
  QuadratureRule mat_rule = triangle_rule(2 * S.degree());
  // load vectors on mirrored meshes must keep the mesh symmetry
  QuadratureRule rhs_rule = swap_symmetric(triangle_rule(8));
  Triplets ta, tb;
  b.F = Eigen::VectorXd::Zero(2 * nn);
  b.G = Eigen::VectorXd::Zero(np);
  b.mean = Eigen::VectorXd::Zero(np);
  for (int t = 0; t < m.num_triangles(); ++t) {
    ElementQuad qs = element_quadrature(S, t, mat_rule);
    ElementQuad qp = element_quadrature(Q, t, mat_rule);
    auto nodes = S.element_nodes(t);
    auto pnodes = Q.element_nodes(t);
    for (std::size_t i = 0; i < qs.w.size(); ++i) {
      const double w = qs.w[i];
      for (int a = 0; a < ne; ++a)
        for (int c = 0; c < ne; ++c) {
          const Vec2 &ga = qs.grad[i][a], &gc = qs.grad[i][c];
          const double dot = ga.dot(gc);
          for (int ci = 0; ci < 2; ++ci)
            for (int cj = 0; cj < 2; ++cj) {
              double v = 0.5 * ((ci == cj ? dot : 0.0) + ga[cj] * gc[ci]);
              ta.emplace_back(dof(nodes[a], ci), dof(nodes[c], cj), p.eta * w * v);
            }
        }
      for (int r = 0; r < nq; ++r)
        for (int a = 0; a < ne; ++a)
          for (int ci = 0; ci < 2; ++ci)
            tb.emplace_back(pnodes[r], dof(nodes[a], ci), -w * qp.phi[i][r] * qs.grad[i][a][ci]);
    }
    ElementQuad rs = element_quadrature(S, t, rhs_rule);
    ElementQuad rp = element_quadrature(Q, t, rhs_rule);
    for (std::size_t i = 0; i < rs.w.size(); ++i) {
      const double w = rs.w[i];
      if (p.f) {
        Vec2 f = p.f(rs.x[i]);
        for (int a = 0; a < ne; ++a)
          for (int ci = 0; ci < 2; ++ci) b.F[dof(nodes[a], ci)] += w * f[ci] * rs.phi[i][a];
      }
      double g = p.g ? p.g(rp.x[i]) : 0.0;
      for (int r = 0; r < nq; ++r) {
        b.G[pnodes[r]] -= w * g * rp.phi[i][r];
        b.mean[pnodes[r]] += w * rp.phi[i][r];
      }
    }
  }
  b.A.resize(2 * nn, 2 * nn);
  b.A.setFromTriplets(ta.begin(), ta.end());
  b.B.resize(np, 2 * nn);
  b.B.setFromTriplets(tb.begin(), tb.end());
  b.Mu = vectorize(assemble_mass(S));
  b.Mp = assemble_mass(Q);

  Triplets tf;
  for (const auto& e : m.boundary) {
    if (!V.is_slip_edge(e)) continue;
    const Vec2 n = edge_normal(m, e);
    const Mat2 T = Mat2::Identity() - n * n.transpose();
    auto en = S.edge_nodes(e);
    EdgeQuad q = edge_quadrature(m, e, S.degree(), 6);
    for (std::size_t i = 0; i < q.w.size(); ++i) {
      const double beta = p.beta ? p.beta(q.x[i]) : 0.0;
      if (beta < 0) throw InvalidInput("StokesProblem: friction must be >= 0");
      if (beta != 0)
        for (std::size_t a = 0; a < en.size(); ++a)
          for (std::size_t c = 0; c < en.size(); ++c)
            for (int ci = 0; ci < 2; ++ci)
              for (int cj = 0; cj < 2; ++cj)
                tf.emplace_back(dof(en[a], ci), dof(en[c], cj),
                                q.w[i] * beta * q.phi[i][a] * q.phi[i][c] * T(ci, cj));
      if (p.psi) {
        Vec2 psi = p.psi(q.x[i], n);
        if (std::abs(psi.dot(n)) > 1e-10 * std::max(1.0, psi.norm()))
          throw InvalidInput("StokesProblem: traction must be tangential");
        for (std::size_t a = 0; a < en.size(); ++a)
          for (int ci = 0; ci < 2; ++ci) b.F[dof(en[a], ci)] += q.w[i] * psi[ci] * q.phi[i][a];
      }
    }
  }
  b.Fr.resize(2 * nn, 2 * nn);
  b.Fr.setFromTriplets(tf.begin(), tf.end());
  return b;
}

Lifting lift_boundary_data(const StokesProblem& p, const SlipSpace& V) {
  const LagrangeSpace& S = V.space();
  const TriMesh& m = V.mesh();
  const int nn = S.num_nodes();
  Lifting out;
  out.L = Eigen::VectorXd::Zero(2 * nn);
  if (!p.phi) return out;

  double integral = 0;
  for (const auto& e : m.boundary) {
    if (!V.is_slip_edge(e)) continue;
    EdgeQuad q = edge_quadrature(m, e, S.degree(), 6);
    for (std::size_t i = 0; i < q.w.size(); ++i) integral += q.w[i] * p.phi(q.x[i]);
  }
  if (p.g) {
    QuadratureRule rule = swap_symmetric(triangle_rule(8));
    for (int t = 0; t < m.num_triangles(); ++t) {
      ElementQuad q = element_quadrature(S, t, rule);
      for (std::size_t i = 0; i < q.w.size(); ++i) integral -= q.w[i] * p.g(q.x[i]);
    }
  }
  out.boundary_integral = integral;
  if (std::abs(integral) > 1e-10)
    throw IncompatibleData("lift_boundary_data: boundary flux does not match the divergence data", integral);

  std::vector<int> fixed(nn, 0);
  Eigen::VectorXd vals[2] = {Eigen::VectorXd::Zero(nn), Eigen::VectorXd::Zero(nn)};
  bool nonzero = false;
  for (const auto& s : V.slip_nodes()) {
    const Vec2 x = S.node_coord(s.node);
    const double phi = p.phi(x);
    const Vec2 nu = V.node_normal(s.node);
    fixed[s.node] = 1;
    vals[0][s.node] = phi * nu.x();
    vals[1][s.node] = phi * nu.y();
    nonzero = nonzero || phi != 0;
  }
  if (!nonzero) return out;
  out.zero = false;

  SpMat K = assemble_stiffness(S);
  std::vector<int> id(nn, -1);
  int nf = 0;
  for (int i = 0; i < nn; ++i)
    if (!fixed[i]) id[i] = nf++;
  Triplets tr;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nf, 2);
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMat::InnerIterator it(K, k); it; ++it) {
      int i = id[it.row()];
      if (i < 0) continue;
      int j = id[it.col()];
      if (j >= 0) tr.emplace_back(i, j, it.value());
      else
        for (int c = 0; c < 2; ++c) rhs(i, c) -= it.value() * vals[c][it.col()];
    }
  Eigen::MatrixXd sol(nf, 2);
  if (nf > 0) {
    SpMat Kii(nf, nf);
    Kii.setFromTriplets(tr.begin(), tr.end());
    Eigen::SimplicialLDLT<SpMat> ldlt;
    factor_or_throw(ldlt, Kii, "lift_boundary_data: singular extension matrix");
    sol = ldlt.solve(rhs);
  }
  for (int i = 0; i < nn; ++i)
    for (int c = 0; c < 2; ++c) out.L[dof(i, c)] = id[i] >= 0 ? sol(id[i], c) : vals[c][i];
  return out;
}

SaddleSystem assemble(const StokesProblem& p, const SlipSpace& V, const LagrangeSpace&,
                      const StokesBlocks& b) {
  if (!(p.eta > 0)) throw InvalidInput("StokesProblem: viscosity must be positive");
  bool any_slip = false;
  for (const auto& e : V.mesh().boundary) any_slip = any_slip || V.is_slip_edge(e);
  if (!any_slip) throw InvalidInput("StokesProblem: no boundary edge carries a slip tag");

  SaddleSystem s;
  const SpMat& E = V.E();
  const SpMat AF = b.A + b.Fr;
  s.friction = b.Fr.nonZeros() > 0 && b.Fr.norm() > 0;
  Lifting lift = lift_boundary_data(p, V);
  s.lift = lift.L;

  const SpMat Ar = SpMat(E.transpose() * AF * E);
  const SpMat Br = SpMat(b.B * E);
  const Eigen::VectorXd ru = E.transpose() * (b.F - AF * lift.L);
  const Eigen::VectorXd rp = b.G - b.B * lift.L;
  s.nu = static_cast<int>(Ar.rows());
  s.np = static_cast<int>(Br.rows());

  s.g_defect = std::abs(rp.sum());
  if (s.g_defect > 1e-8)
    throw IncompatibleData("Stokes data violate the divergence compatibility condition", s.g_defect);

  std::vector<Eigen::VectorXd> zr;
  if (!s.friction) {
    RigidMotionBasis kb = kernel_basis(V);
    s.kernel_dim = kb.dim();
    for (const auto& z : kb.nodal) {
      Eigen::VectorXd zt = E.transpose() * z;
      double d = std::abs(zt.dot(ru));
      s.kernel_defect = std::max(s.kernel_defect, d);
      zr.push_back(zt);
    }
    if (s.kernel_defect > 1e-8)
      throw IncompatibleData("Stokes data are not orthogonal to the rigid-motion kernel", s.kernel_defect);
    if (s.kernel_dim > 0 && !p.deflate) {
      // Confirm the kernel vectors are null vectors of the operator.
      double worst = 0;
      for (const auto& zt : zr) {
        double az = (Ar * zt).norm() + (Br * zt).norm();
        worst = std::max(worst, az / std::max(1e-300, Ar.norm() * zt.norm()));
      }
      if (worst <= 1e-10)
        throw SingularSystem("Stokes system is singular: rigid motions in the kernel", s.kernel_dim, NAN);
    }
    s.deflated = p.deflate && s.kernel_dim > 0;
  }
  if (s.deflated) s.nk = s.kernel_dim;

  const SpMat Mr = SpMat(E.transpose() * b.Mu * E);
  const int n = s.nu + s.np + s.nk + 1;
  Triplets tr;
  for (int k = 0; k < Ar.outerSize(); ++k)
    for (SpMat::InnerIterator it(Ar, k); it; ++it) tr.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < Br.outerSize(); ++k)
    for (SpMat::InnerIterator it(Br, k); it; ++it) {
      tr.emplace_back(s.nu + it.row(), it.col(), it.value());
      tr.emplace_back(it.col(), s.nu + it.row(), it.value());
    }
  for (int k = 0; k < s.nk; ++k) {
    Eigen::VectorXd row = Mr * zr[k];
    for (int j = 0; j < s.nu; ++j)
      if (row[j] != 0) {
        tr.emplace_back(s.nu + s.np + k, j, row[j]);
        tr.emplace_back(j, s.nu + s.np + k, row[j]);
      }
  }
  const int last = n - 1;
  for (int i = 0; i < s.np; ++i) {
    tr.emplace_back(s.nu + i, last, b.mean[i]);
    tr.emplace_back(last, s.nu + i, b.mean[i]);
  }
  s.K.resize(n, n);
  s.K.setFromTriplets(tr.begin(), tr.end());
  s.rhs = Eigen::VectorXd::Zero(n);
  s.rhs.head(s.nu) = ru;
  s.rhs.segment(s.nu, s.np) = rp;
  return s;
}

SolveReport solve(const StokesProblem& p) {
  auto t0 = std::chrono::steady_clock::now();
  if (!p.mesh) throw InvalidInput("StokesProblem: mesh required");
  auto V = std::make_shared<SlipSpace>(p.mesh, 2, p.slip_tags, p.graph);
  auto Q = std::make_shared<LagrangeSpace>(*p.mesh, 1);
  StokesBlocks b = assemble_blocks(p, *V, *Q);
  SaddleSystem s = assemble(p, *V, *Q, b);

  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(s.K);
  lu.factorize(s.K);
  if (lu.info() != Eigen::Success)
    throw SingularSystem("Stokes system is singular: " + lu.lastErrorMessage(), s.kernel_dim, NAN);
  Eigen::VectorXd x = lu.solve(s.rhs);
  const double rn = std::max(s.rhs.norm(), 1e-300);
  double res = (s.K * x - s.rhs).norm();
  for (int it = 0; it < 3 && res > 1e-10 * rn && s.rhs.norm() > 0; ++it) {
    x += lu.solve(s.rhs - s.K * x);
    res = (s.K * x - s.rhs).norm();
  }
  SolveReport r;
  r.residual = s.rhs.norm() > 0 ? res / rn : res;
  if (!std::isfinite(r.residual) || r.residual > 1e-10)
    throw SolverError("Stokes solve: residual " + std::to_string(r.residual) + " above 1e-10");

  r.velocity_space = V;
  r.pressure_space = Q;
  Eigen::VectorXd w = V->E() * x.head(s.nu);
  r.u = w + s.lift;
  r.p = x.segment(s.nu, s.np);
  r.mean_multiplier = x[x.size() - 1];
  r.kernel_dim = s.kernel_dim;
  r.deflated = s.deflated;
  r.g_defect = s.g_defect;
  r.kernel_defect = s.kernel_defect;
  r.energy = r.u.dot(b.A * r.u) / p.eta;
  r.friction_energy = r.u.dot(b.Fr * r.u);
  for (const auto& sn : V->slip_nodes())
    for (const Vec2& n : sn.normals)
      r.slip_residual = std::max(
          r.slip_residual, std::abs(w[dof(sn.node, 0)] * n.x() + w[dof(sn.node, 1)] * n.y()));
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

InfSupReport estimate_infsup(std::shared_ptr<const TriMesh> mesh, const TagSet& slip_tags,
                             int velocity_degree) {
  SlipSpace V(mesh, velocity_degree, slip_tags);
  LagrangeSpace Q(*mesh, 1);
  InfSupReport rep;
  rep.velocity_dofs = V.reduced_dofs();
  rep.pressure_dofs = Q.num_nodes();
  if (rep.velocity_dofs == 0 || rep.pressure_dofs < 2) return rep;

  StokesProblem p;
  p.mesh = mesh;
  p.slip_tags = slip_tags;
  StokesBlocks b = assemble_blocks(p, V, Q);
  const SpMat& E = V.E();
  SpMat Gr = SpMat(E.transpose() * h1_gram(V.space()) * E);
  SpMat Br = SpMat(b.B * E);
  Eigen::SimplicialLDLT<SpMat> ldlt;
  factor_or_throw(ldlt, Gr, "estimate_infsup: singular velocity Gramian");
  Eigen::MatrixXd BtD = dense(SpMat(Br.transpose()));
  Eigen::MatrixXd X = ldlt.solve(BtD);
  Eigen::MatrixXd S = Br * X;
  Eigen::MatrixXd Mp = dense(b.Mp);
  // M_p-orthogonal complement of the constants
  const int np = rep.pressure_dofs;
  Eigen::VectorXd wv = Mp * Eigen::VectorXd::Ones(np);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(wv);
  Eigen::MatrixXd Qf = qr.householderQ() * Eigen::MatrixXd::Identity(np, np);
  Eigen::MatrixXd C = Qf.rightCols(np - 1);
  Eigen::MatrixXd Sc = C.transpose() * S * C, Mc = C.transpose() * Mp * C;
  Sc = 0.5 * (Sc + Sc.transpose());
  Mc = 0.5 * (Mc + Mc.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Sc, Mc, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("estimate_infsup: eigen-solver failure");
  double lmin = std::max(0.0, es.eigenvalues()[0]);
  rep.beta_h = std::sqrt(lmin);
  rep.stable = rep.beta_h > 1e-6;
  return rep;
}

KornReport estimate_korn(std::shared_ptr<const TriMesh> mesh, const KornOptions& opt) {
  SlipSpace V(mesh, 2, opt.slip_tags);
  const LagrangeSpace& S = V.space();
  const SpMat& E = V.E();
  StokesProblem p;
  p.mesh = mesh;
  LagrangeSpace Q(*mesh, 1);
  StokesBlocks b = assemble_blocks(p, V, Q);
  SpMat Ar = SpMat(E.transpose() * b.A * E);
  SpMat Gr = SpMat(E.transpose() * h1_gram(S) * E);
  const int n = static_cast<int>(Ar.rows());

  // skew moment int (d1 v2 - d2 v1) as a row on full dofs
  Eigen::VectorXd skew = Eigen::VectorXd::Zero(V.full_dofs());
  {
    QuadratureRule rule = triangle_rule(2);
    for (int t = 0; t < mesh->num_triangles(); ++t) {
      ElementQuad q = element_quadrature(S, t, rule);
      auto nodes = S.element_nodes(t);
      for (std::size_t i = 0; i < q.w.size(); ++i)
        for (int a = 0; a < S.nodes_per_element(); ++a) {
          skew[dof(nodes[a], 1)] += q.w[i] * q.grad[i][a].x();
          skew[dof(nodes[a], 0)] -= q.w[i] * q.grad[i][a].y();
        }
    }
  }
  std::vector<Eigen::VectorXd> rows;
  if (opt.skew_moment) rows.push_back(E.transpose() * skew);
  if (opt.quotient) {
    const Vec2 origin = centroid(*mesh);
    auto r = rigid_nodal(S, origin);
    Eigen::MatrixXd R = rigid_constraint_rows(V, origin);
    if (opt.skew_moment) {
      R.conservativeResize(R.rows() + 1, 3);
      for (int j = 0; j < 3; ++j) R(R.rows() - 1, j) = skew.dot(r[j]);
    }
    Eigen::MatrixXd N = null_space(R, 3);
    for (int k = 0; k < N.cols(); ++k) {
      Eigen::VectorXd z = N(0, k) * r[0] + N(1, k) * r[1] + N(2, k) * r[2];
      rows.push_back(E.transpose() * (b.Mu * z));
    }
  }
  const int k = static_cast<int>(rows.size());
  KornReport rep;
  rep.dofs = n - k;
  if (rep.dofs <= 0) throw InvalidInput("estimate_korn: constraints leave no velocity dofs");

  // Shift-invert subspace iteration on A x = lambda G x restricted to C x = 0.
  // The spectrum clusters just above the smallest eigenvalue, so a first
  // pass with a tiny shift is followed by one shifted toward its estimate.
  Eigen::MatrixXd C(k, n);
  for (int i = 0; i < k; ++i) C.row(i) = rows[i].transpose();
  Eigen::SimplicialLDLT<SpMat> ldlt;
  Eigen::MatrixXd KiCt;
  Eigen::LDLT<Eigen::MatrixXd> sk;
  auto factor = [&](double sigma) {
    SpMat K = Ar - sigma * Gr;
    factor_or_throw(ldlt, K, "estimate_korn: singular shifted operator");
    KiCt = k ? Eigen::MatrixXd(ldlt.solve(Eigen::MatrixXd(C.transpose()))) : Eigen::MatrixXd(n, 0);
    sk.compute(C * KiCt);
  };
  auto solveP = [&](const Eigen::MatrixXd& rhs) {
    Eigen::MatrixXd y = ldlt.solve(rhs);
    if (k) y -= KiCt * sk.solve(C * y);
    return y;
  };

  const double tau = 1e-6 * Ar.diagonal().sum() / Gr.diagonal().sum();
  const int bs = std::min(8, rep.dofs);
  std::mt19937 rng(7);
  std::normal_distribution<double> N01;
  Eigen::MatrixXd X(n, bs);
  for (int j = 0; j < bs; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = N01(rng);
  double lambda = INFINITY;
  int it = 0;
  auto run = [&](double sigma, double rel_tol, int max_it) {
    factor(sigma);
    for (int local = 0; local < max_it; ++local, ++it) {
      X = solveP(Gr * X);
      // G-orthonormalize, then Rayleigh-Ritz
      Eigen::MatrixXd Gh = X.transpose() * (Gr * X);
      Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (Gh + Gh.transpose()));
      if (llt.info() != Eigen::Success) throw SolverError("estimate_korn: subspace collapsed");
      X = llt.matrixU().solve<Eigen::OnTheRight>(X);
      Eigen::MatrixXd Ah = X.transpose() * (Ar * X);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Ah + Ah.transpose()));
      if (es.info() != Eigen::Success) throw SolverError("estimate_korn: eigen-solver failure");
      X = X * es.eigenvectors();
      double ln = es.eigenvalues()[0];
      bool done = std::abs(ln - lambda) <= rel_tol * std::abs(ln) + 1e-7 * tau;  // roundoff floor
      lambda = ln;
      if (done) return true;
    }
    return false;
  };
  bool converged = run(-tau, 1e-4, 500);
  if (converged && lambda > 1e3 * tau) converged = run(0.95 * lambda, 1e-12, 500);
  if (!converged) throw SolverError("estimate_korn: subspace iteration did not converge");
  rep.iterations = it + 1;
  rep.lambda = lambda;
  rep.constant = lambda > 0 ? 1 / std::sqrt(lambda) : INFINITY;
  return rep;
}

namespace {

using symbolic::Expr;

ManufacturedCase build_case(const std::string& id, const symbolic::Vec& u, const Expr& p, double eta,
                            double beta) {
  using symbolic::dx;
  using symbolic::dy;
  // sigma_ij = eta/2 (d_j u_i + d_i u_j) - p delta_ij, f_i = -d_j sigma_ij
  Expr grad[2][2] = {{dx(u.c[0]), dy(u.c[0])}, {dx(u.c[1]), dy(u.c[1])}};
  Expr sigma[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      sigma[i][j] = Expr(eta / 2) * (grad[i][j] + grad[j][i]);
      if (i == j) sigma[i][j] = sigma[i][j] - p;
    }
  Expr f[2];
  for (int i = 0; i < 2; ++i) f[i] = -(dx(sigma[i][0]) + dy(sigma[i][1]));

  ManufacturedCase c;
  c.id = id;
  c.domain = domains::Square{};
  c.eta = eta;
  c.beta = beta;
  c.u = symbolic::to_field(u);
  c.p = symbolic::to_field(p);
  c.f = [f0 = f[0], f1 = f[1]](const Vec2& x) { return Vec2(f0.eval(x), f1.eval(x)); };
  auto sig = std::make_shared<std::array<Expr, 4>>(std::array<Expr, 4>{sigma[0][0], sigma[0][1], sigma[1][0], sigma[1][1]});
  auto uu = c.u;
  c.psi = [sig, uu, beta](const Vec2& x, const Vec2& n) {
    Mat2 s;
    s << (*sig)[0].eval(x), (*sig)[1].eval(x), (*sig)[2].eval(x), (*sig)[3].eval(x);
    Mat2 T = Mat2::Identity() - n * n.transpose();
    return Vec2(T * (s * n) + beta * (T * uu.value(x)));
  };
  return c;
}

}  // namespace

std::vector<std::string> manufactured_case_ids() { return {"square-slip", "square-friction", "zero"}; }

ManufacturedCase manufactured_case(const std::string& id) {
  using symbolic::X;
  using symbolic::Y;
  const Expr pi(kPi);
  symbolic::Vec u{pi * sin(pi * X()) * cos(pi * Y()), -(pi * cos(pi * X()) * sin(pi * Y()))};
  Expr p = cos(pi * X()) * cos(pi * Y());
  if (id == "square-slip") return build_case(id, u, p, 1.0, 0.0);
  if (id == "square-friction") return build_case(id, u, p, 1.0, 1.0);
  if (id == "zero") return build_case(id, symbolic::Vec{Expr(0.0), Expr(0.0)}, Expr(0.0), 1.0, 0.0);
  throw InvalidInput("unknown manufactured case '" + id + "'");
}

StokesProblem make_problem(const ManufacturedCase& c, std::shared_ptr<const TriMesh> mesh) {
  StokesProblem p;
  p.mesh = std::move(mesh);
  p.eta = c.eta;
  if (c.beta != 0) p.beta = [b = c.beta](const Vec2&) { return b; };
  p.f = c.f;
  p.psi = c.psi;
  return p;
}

Vec2 eval_velocity(const SolveReport& r, int t, const Vec2& x, Mat2* grad) {
  const LagrangeSpace& S = r.velocity_space->space();
  const TriMesh& m = S.mesh();
  const auto& tr = m.triangles[t];
  const Vec2& a = m.vertices[tr[0]];
  Mat2 B;
  B.col(0) = m.vertices[tr[1]] - a;
  B.col(1) = m.vertices[tr[2]] - a;
  const Mat2 Binv = B.inverse();
  double phi[6];
  Vec2 dref[6];
  reference_shapes(S.degree(), Binv * (x - a), phi, dref);
  auto nodes = S.element_nodes(t);
  Vec2 v = Vec2::Zero();
  Mat2 g = Mat2::Zero();
  for (int k = 0; k < S.nodes_per_element(); ++k) {
    Vec2 uk(r.u[dof(nodes[k], 0)], r.u[dof(nodes[k], 1)]);
    v += phi[k] * uk;
    g += uk * (Binv.transpose() * dref[k]).transpose();
  }
  if (grad) *grad = g;
  return v;
}

double eval_pressure(const SolveReport& r, int t, const Vec2& x) {
  return eval_field(*r.pressure_space, r.p, t, x);
}

Errors discretization_errors(const SolveReport& r, const VectorField& u, const ScalarField& p) {
  const TriMesh& m = r.velocity_space->mesh();
  QuadratureRule rule = triangle_rule(10);
  double area = 0, pm = 0, phm = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    ElementQuad q = element_quadrature(*r.pressure_space, t, rule);
    for (std::size_t i = 0; i < q.w.size(); ++i) {
      area += q.w[i];
      pm += q.w[i] * p.value(q.x[i]);
      phm += q.w[i] * eval_pressure(r, t, q.x[i]);
    }
  }
  pm /= area;
  phm /= area;
  Errors e;
  for (int t = 0; t < m.num_triangles(); ++t) {
    ElementQuad q = element_quadrature(*r.pressure_space, t, rule);
    for (std::size_t i = 0; i < q.w.size(); ++i) {
      Mat2 gh;
      eval_velocity(r, t, q.x[i], &gh);
      e.u_h1 += q.w[i] * (u.jac(q.x[i]) - gh).squaredNorm();
      double dp = (p.value(q.x[i]) - pm) - (eval_pressure(r, t, q.x[i]) - phm);
      e.p_l2 += q.w[i] * dp * dp;
    }
  }
  e.u_h1 = std::sqrt(e.u_h1);
  e.p_l2 = std::sqrt(e.p_l2);
  return e;
}

RateTable convergence_study(const std::string& case_id, int levels, double h0) {
  if (levels < 2) throw InvalidInput("convergence_study: need at least 2 levels");
  ManufacturedCase c = manufactured_case(case_id);
  RateTable tab;
  tab.case_id = case_id;
  for (int l = 0; l < levels; ++l) {
    double h = h0 / std::pow(2.0, l);
    auto mesh = std::make_shared<TriMesh>(mesh_domain(c.domain, h));
    SolveReport r = solve(make_problem(c, mesh));
    Errors e = discretization_errors(r, c.u, c.p);
    RateRow row{l, h, e.u_h1, e.p_l2, 0, 0};
    if (l > 0) {
      const RateRow& prev = tab.rows.back();
      double lr = std::log(prev.h / h);
      row.rate_u = std::log(prev.err_u / e.u_h1) / lr;
      row.rate_p = std::log(prev.err_p / e.p_l2) / lr;
    }
    tab.rows.push_back(row);
  }
  auto fit = [&](auto get) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(tab.rows.size());
    for (const auto& r : tab.rows) {
      double x = std::log(r.h), y = std::log(get(r));
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  tab.fit_u = fit([](const RateRow& r) { return r.err_u; });
  tab.fit_p = fit([](const RateRow& r) { return r.err_p; });
  return tab;
}

}  // namespace slipflow
