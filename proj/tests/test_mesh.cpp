#include "slipflow/fe.hpp"
#include "slipflow/mesh.hpp"
#include "slipflow/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace slipflow;

namespace {

bool has_vertex(const TriMesh& m, const Vec2& p) {
  for (const auto& v : m.vertices)
    if ((v - p).norm() < 1e-14) return true;
  return false;
}

}  // namespace

TEST(MeshDomain, SquareCorners) {
  TriMesh m = mesh_domain(domains::Square{}, 0.5);
  EXPECT_GE(m.num_triangles(), 8);
  for (Vec2 c : {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)}) EXPECT_TRUE(has_vertex(m, c));
  EXPECT_NO_THROW(validate_mesh(m));
  EXPECT_NEAR(m.area(), 1, 1e-14);
}

TEST(MeshDomain, DiscArea) {
  TriMesh m = mesh_domain(domains::Disc{}, 0.1);
  EXPECT_NO_THROW(validate_mesh(m));
  EXPECT_NEAR(m.area(), M_PI, 1e-2);
}

TEST(MeshDomain, BelowGraphTopOnGraph) {
  auto w = [](double x) { return 0.1 * std::sin(M_PI * x); };
  TriMesh m = mesh_domain(domains::BelowGraph{0, 1, -0.5, w, [](double x) { return 0.1 * M_PI * std::cos(M_PI * x); }}, 0.1);
  EXPECT_NO_THROW(validate_mesh(m));
  int top = 0;
  for (const auto& e : m.boundary)
    if (e.tag == BoundaryTag::GraphTop)
      for (int v : {e.a, e.b}) {
        EXPECT_EQ(m.vertices[v].y(), w(m.vertices[v].x()));
        ++top;
      }
  EXPECT_GT(top, 0);
}

TEST(MeshDomain, EveryDomainValidates) {
  BubbleDomain b = make_bubble(Vec2(0.1, 0.2), 0.3);
  const DomainSpec specs[] = {domains::Square{}, domains::Disc{}, domains::HalfDisc{}, domains::Bubble{b},
                              domains::Annulus{}};
  for (const auto& s : specs)
    for (double h : {0.2, 0.07}) {
      TriMesh m = mesh_domain(s, h);
      EXPECT_NO_THROW(validate_mesh(m));
      EXPECT_GT(m.min_angle(), 10 * M_PI / 180);
    }
}

TEST(MeshDomain, BubbleInsideItsDomain) {
  BubbleDomain b = make_bubble(Vec2::Zero(), 1);
  TriMesh m = mesh_domain(domains::Bubble{b}, 0.1);
  for (const auto& v : m.vertices) EXPECT_TRUE(b.contains(v, 1e-12));
  for (const auto& e : m.boundary)
    if (e.tag == BoundaryTag::Flat) {
      EXPECT_EQ(m.vertices[e.a].y(), 0);
      EXPECT_EQ(m.vertices[e.b].y(), 0);
    }
}

TEST(Refine, QuadruplesAndPreservesArea) {
  TriMesh m = mesh_domain(domains::Square{}, 0.25);
  TriMesh r = refine(m);
  EXPECT_EQ(r.num_triangles(), 4 * m.num_triangles());
  EXPECT_NEAR(r.area(), m.area(), 1e-12);
  EXPECT_NO_THROW(validate_mesh(r));
}

TEST(Refine, DiscDeficitQuarters) {
  TriMesh m = mesh_domain(domains::Disc{}, 0.2);
  double e0 = M_PI - m.area();
  TriMesh r = refine(m);
  double e1 = M_PI - r.area();
  TriMesh rr = refine(r);
  double e2 = M_PI - rr.area();
  EXPECT_NEAR(e0 / e1, 4, 0.3);
  EXPECT_NEAR(e1 / e2, 4, 0.3);
}

TEST(Normals, SquareAndGraphs) {
  TriMesh sq = mesh_domain(domains::Square{}, 0.25);
  auto n = boundary_normals(sq);
  for (int v = 0; v < sq.num_vertices(); ++v) {
    const Vec2& x = sq.vertices[v];
    if (x.y() == 0 && x.x() > 0 && x.x() < 1) EXPECT_NEAR((n[v] - Vec2(0, -1)).norm(), 0, 1e-14);
  }
  auto flat = [](double) { return 0.0; };
  TriMesh g0 = mesh_domain(domains::BelowGraph{0, 1, -0.5, flat, flat}, 0.25);
  auto n0 = boundary_normals(g0);
  for (const auto& e : g0.boundary)
    if (e.tag == BoundaryTag::GraphTop) {
      for (int v : {e.a, e.b})
        if (g0.vertices[v].x() > 0 && g0.vertices[v].x() < 1) EXPECT_NEAR((n0[v] - Vec2(0, 1)).norm(), 0, 1e-14);
      EXPECT_NEAR((edge_normal(g0, e) - Vec2(0, 1)).norm(), 0, 1e-14);
    }
  BoundaryGraph line = make_graph([](double x) { return x; }, [](double) { return 1.0; }, 0.5, 0.5, 4);
  TriMesh g1 = mesh_domain(domains::BelowGraph{0, 1, -0.5, line.eval, line.grad_eval}, 0.25);
  auto n1 = boundary_normals(g1, line);
  for (const auto& e : g1.boundary)
    if (e.tag == BoundaryTag::GraphTop && g1.vertices[e.a].x() > 0 && g1.vertices[e.a].x() < 1)
      EXPECT_NEAR((n1[e.a] - Vec2(-1, 1) / std::sqrt(2.0)).norm(), 0, 1e-14);
}

TEST(MeshIO, RoundTrip) {
  TriMesh m = mesh_domain(domains::HalfDisc{}, 0.3);
  std::stringstream ss;
  std::vector<double> vals(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) vals[i] = m.vertices[i].x() * 2;
  write_mesh(ss, m, {{"twice_x", vals}});
  std::vector<std::pair<std::string, std::vector<double>>> blocks;
  TriMesh r = read_mesh(ss, &blocks);
  ASSERT_EQ(r.num_vertices(), m.num_vertices());
  EXPECT_EQ(r.triangles, m.triangles);
  ASSERT_EQ(r.boundary.size(), m.boundary.size());
  for (size_t i = 0; i < m.boundary.size(); ++i) EXPECT_EQ(r.boundary[i].tag, m.boundary[i].tag);
  for (int i = 0; i < m.num_vertices(); ++i) EXPECT_EQ(r.vertices[i], m.vertices[i]);
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_EQ(blocks[0].second, vals);
}

TEST(MeshValidate, DetectsFlippedTriangle) {
  TriMesh m = mesh_domain(domains::Square{}, 0.5);
  std::swap(m.triangles[0][1], m.triangles[0][2]);
  EXPECT_THROW(validate_mesh(m), MeshError);
}

TEST(Tags, NamesRoundTrip) {
  for (BoundaryTag t : {BoundaryTag::GraphTop, BoundaryTag::Flat, BoundaryTag::Curved, BoundaryTag::Side})
    EXPECT_EQ(parse_tag(tag_name(t)), t);
  EXPECT_THROW(parse_tag("nope"), MeshError);
}

TEST(Locator, FindsContainingTriangle) {
  auto m = std::make_shared<TriMesh>(mesh_domain(domains::Disc{}, 0.15));
  PointLocator loc(m);
  for (Vec2 x : {Vec2(0.1, 0.2), Vec2(-0.5, 0.45), Vec2(0.0, -0.9)}) {
    std::array<double, 3> b;
    int t = loc.locate(x, &b);
    ASSERT_GE(t, 0);
    Vec2 y = Vec2::Zero();
    for (int k = 0; k < 3; ++k) {
      EXPECT_GE(b[k], -1e-12);
      y += b[k] * m->vertices[m->triangles[t][k]];
    }
    EXPECT_NEAR((y - x).norm(), 0, 1e-13);
  }
  EXPECT_EQ(loc.locate(Vec2(2, 2)), -1);
}

TEST(Quadrature, TriangleExactness) {
  for (int deg : {1, 2, 4, 6, 9, 12}) {
    QuadratureRule r = triangle_rule(deg);
    double ws = 0;
    for (double w : r.weights) ws += w;
    EXPECT_NEAR(ws, 1, 1e-14);
    // int_T x^a y^b = a! b! / (a + b + 2)!, T of area 1/2.
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        double q = 0;
        for (size_t i = 0; i < r.points.size(); ++i)
          q += 0.5 * r.weights[i] * std::pow(r.points[i].x(), a) * std::pow(r.points[i].y(), b);
        double exact = std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
        EXPECT_NEAR(q, exact, 1e-14) << deg << " " << a << " " << b;
      }
  }
}

TEST(Quadrature, SwapSymmetric) {
  QuadratureRule r = swap_symmetric(triangle_rule(5));
  // Each point is followed by its mirror image.
  for (size_t i = 0; i < r.points.size(); i += 2) {
    EXPECT_EQ(r.points[i + 1].x(), r.points[i].y());
    EXPECT_EQ(r.points[i + 1].y(), r.points[i].x());
    EXPECT_EQ(r.weights[i + 1], r.weights[i]);
  }
}

TEST(Quadrature, GaussLegendre) {
  LineRule g = gauss_legendre(5);
  for (int k = 0; k <= 9; ++k) {
    double q = 0;
    for (size_t i = 0; i < g.points.size(); ++i) q += g.weights[i] * std::pow(g.points[i], k);
    EXPECT_NEAR(q, 1.0 / (k + 1), 1e-15);
  }
}

TEST(Lagrange, MassAndStiffnessOnSquare) {
  TriMesh m = mesh_domain(domains::Square{}, 0.25);
  for (int deg : {1, 2}) {
    LagrangeSpace V(m, deg);
    Eigen::VectorXd one = Eigen::VectorXd::Ones(V.num_nodes());
    Eigen::VectorXd x(V.num_nodes());
    for (int i = 0; i < V.num_nodes(); ++i) x[i] = V.node_coord(i).x();
    EXPECT_NEAR(one.dot(assemble_mass(V) * one), 1, 1e-13);
    EXPECT_NEAR((assemble_stiffness(V) * one).norm(), 0, 1e-12);
    EXPECT_NEAR(x.dot(assemble_stiffness(V) * x), 1, 1e-12);
  }
}
