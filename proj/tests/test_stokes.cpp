#include "slipflow/stokes.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace slipflow;

namespace {

std::shared_ptr<const TriMesh> mesh(const DomainSpec& d, double h) {
  return std::make_shared<TriMesh>(mesh_domain(d, h));
}

Eigen::VectorXd rotation_field(const LagrangeSpace& V) {
  Eigen::VectorXd z(2 * V.num_nodes());
  for (int i = 0; i < V.num_nodes(); ++i) {
    Vec2 x = V.node_coord(i);
    z[2 * i] = x.y();
    z[2 * i + 1] = -x.x();
  }
  return z;
}

}  // namespace

TEST(KernelBasis, Dimensions) {
  EXPECT_EQ(kernel_basis(SlipSpace(mesh(domains::Disc{}, 0.2), 2, all_tags())).dim(), 1);
  EXPECT_EQ(kernel_basis(SlipSpace(mesh(domains::Square{}, 0.2), 2, all_tags())).dim(), 0);
  EXPECT_EQ(kernel_basis(SlipSpace(mesh(domains::Annulus{}, 0.2), 2, all_tags())).dim(), 1);
}

TEST(KernelBasis, DiscRotationTangentAndNormalized) {
  SlipSpace V(mesh(domains::Disc{}, 0.2), 2, all_tags());
  RigidMotionBasis K = kernel_basis(V);
  ASSERT_EQ(K.dim(), 1);
  EXPECT_LE(K.coeffs[0].tail<2>().norm(), 1e-8 * std::abs(K.coeffs[0][0]));
  SpMat M = assemble_mass(V.space());
  const Eigen::VectorXd& z = K.nodal[0];
  double mass = 0;
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd zc(V.space().num_nodes());
    for (int i = 0; i < zc.size(); ++i) zc[i] = z[2 * i + c];
    mass += zc.dot(M * zc);
  }
  EXPECT_NEAR(mass, 1, 1e-10);
  for (const auto& sn : V.slip_nodes())
    EXPECT_LE(std::abs(Vec2(z[2 * sn.node], z[2 * sn.node + 1]).dot(V.node_normal(sn.node))), 1e-8);
}

TEST(Assemble, StiffnessSymmetricAndRigidFree) {
  StokesProblem p;
  p.mesh = mesh(domains::Disc{}, 0.25);
  SlipSpace V(p.mesh, 2, all_tags());
  LagrangeSpace Q(*p.mesh, 1);
  StokesBlocks b = assemble_blocks(p, V, Q);
  EXPECT_LE(SpMat(b.A - SpMat(b.A.transpose())).coeffs().cwiseAbs().maxCoeff(), 1e-12);
  Eigen::VectorXd z = rotation_field(V.space());
  EXPECT_LE(z.dot(b.A * z), 1e-10);
}

TEST(Assemble, FrictionBlockIsBoundaryMass) {
  // For the rotation field T z . t is the distance from the center to the
  // edge line, so the boundary integral of |T z|^2 is sum_e |e| d_e^2.
  StokesProblem p;
  p.mesh = mesh(domains::Disc{}, 0.25);
  p.beta = [](const Vec2&) { return 1.0; };
  SlipSpace V(p.mesh, 2, all_tags());
  LagrangeSpace Q(*p.mesh, 1);
  StokesBlocks b = assemble_blocks(p, V, Q);
  Eigen::VectorXd z = rotation_field(V.space());
  double exact = 0;
  for (const auto& e : p.mesh->boundary) {
    Vec2 a = p.mesh->vertices[e.a], c = p.mesh->vertices[e.b];
    double d = std::abs(a.x() * c.y() - a.y() * c.x()) / (c - a).norm();
    exact += (c - a).norm() * d * d;
  }
  EXPECT_NEAR(z.dot(b.Fr * z), exact, 1e-10 * exact);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(b.Fr));
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(Assemble, RejectsNegativeFrictionAndNormalTraction) {
  StokesProblem p;
  p.mesh = mesh(domains::Square{}, 0.25);
  p.beta = [](const Vec2&) { return -1.0; };
  EXPECT_THROW(solve(p), InvalidInput);
  p.beta = {};
  p.psi = [](const Vec2&, const Vec2& n) { return Vec2(n); };
  EXPECT_THROW(solve(p), InvalidInput);
}

TEST(Solve, ZeroDataOnSquare) {
  StokesProblem p;
  p.mesh = mesh(domains::Square{}, 0.25);
  SolveReport r = solve(p);
  EXPECT_LE(r.u.lpNorm<Eigen::Infinity>(), 1e-10);
  EXPECT_LE(r.p.lpNorm<Eigen::Infinity>(), 1e-10);
  EXPECT_EQ(r.kernel_dim, 0);
}

TEST(Solve, DiscKernelDeflation) {
  StokesProblem p;
  p.mesh = mesh(domains::Disc{}, 0.25);
  p.deflate = false;
  try {
    solve(p);
    FAIL() << "expected a singular system";
  } catch (const SingularSystem& e) {
    EXPECT_EQ(e.kernel_dim, 1);
  }
  p.deflate = true;
  SolveReport r = solve(p);
  EXPECT_TRUE(r.deflated);
  EXPECT_EQ(r.kernel_dim, 1);
  EXPECT_LE(r.u.lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(Solve, FrictionDisablesDeflation) {
  StokesProblem p;
  p.mesh = mesh(domains::Disc{}, 0.25);
  p.deflate = false;
  p.beta = [](const Vec2&) { return 1.0; };
  SolveReport r = solve(p);
  EXPECT_FALSE(r.deflated);
  EXPECT_LE(r.u.lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(Solve, IncompatibleDivergenceData) {
  StokesProblem p;
  p.mesh = mesh(domains::Square{}, 0.25);
  p.g = [](const Vec2&) { return 1.0; };
  EXPECT_THROW(solve(p), IncompatibleData);
}

TEST(Solve, LinearInData) {
  ManufacturedCase c = manufactured_case("square-slip");
  auto m = mesh(domains::Square{}, 0.25);
  StokesProblem p1 = make_problem(c, m);
  StokesProblem p2 = p1;
  VectorFn f = p1.f;
  TractionFn psi = p1.psi;
  p2.f = [f](const Vec2& x) { return Vec2(-2 * f(x)); };
  p2.psi = [psi](const Vec2& x, const Vec2& n) { return Vec2(-2 * psi(x, n)); };
  SolveReport r1 = solve(p1), r2 = solve(p2);
  EXPECT_LE((r2.u + 2 * r1.u).lpNorm<Eigen::Infinity>(), 1e-10 * r1.u.lpNorm<Eigen::Infinity>());
  EXPECT_LE((r2.p + 2 * r1.p).lpNorm<Eigen::Infinity>(), 1e-10 * r1.p.lpNorm<Eigen::Infinity>());
  EXPECT_LE(r1.residual, 1e-10);
}

TEST(Solve, ManufacturedSlipOnBoundary) {
  ManufacturedCase c = manufactured_case("square-slip");
  TriMesh m = mesh_domain(c.domain, 0.25);
  for (const auto& e : m.boundary)
    for (int v : {e.a, e.b}) EXPECT_LE(std::abs(c.u(m.vertices[v]).dot(edge_normal(m, e))), 1e-14);
  double prev = 1e300;
  for (double h : {0.25, 0.125}) {
    SolveReport r = solve(make_problem(c, mesh(c.domain, h)));
    Errors e = discretization_errors(r, c.u, c.p);
    EXPECT_LT(e.u_h1, prev);
    prev = e.u_h1;
  }
}

TEST(Lifting, ZeroAndCosine) {
  StokesProblem p;
  p.mesh = mesh(domains::Disc{}, 0.125);
  SlipSpace V(p.mesh, 2, all_tags());
  EXPECT_TRUE(lift_boundary_data(p, V).zero);
  p.phi = [](const Vec2& x) { return std::cos(std::atan2(x.y(), x.x())); };
  Lifting L = lift_boundary_data(p, V);
  EXPECT_FALSE(L.zero);
  for (const auto& sn : V.slip_nodes()) {
    Vec2 x = V.space().node_coord(sn.node);
    Vec2 want = p.phi(x) * V.node_normal(sn.node);
    EXPECT_LE((Vec2(L.L[2 * sn.node], L.L[2 * sn.node + 1]) - want).norm(), 1e-14);
  }
  SolveReport r = solve(p);
  EXPECT_LE(r.slip_residual, 1e-12);
  StokesProblem p2 = p;
  p2.phi = [](const Vec2& x) { return 3 * std::cos(std::atan2(x.y(), x.x())); };
  Lifting L2 = lift_boundary_data(p2, V);
  EXPECT_LE((L2.L - 3 * L.L).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(InfSup, CoarseSquareAndDegenerate) {
  InfSupReport r = estimate_infsup(mesh(domains::Square{}, 0.25), all_tags());
  EXPECT_GT(r.beta_h, 0.1);
  EXPECT_TRUE(r.stable);
  TriMesh one;
  one.vertices = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  one.triangles = {{0, 1, 2}};
  one.boundary = {{0, 1, BoundaryTag::Side}, {1, 2, BoundaryTag::Side}, {2, 0, BoundaryTag::Side}};
  one.update_h();
  InfSupReport d = estimate_infsup(std::make_shared<TriMesh>(one), all_tags(), 1);
  EXPECT_EQ(d.beta_h, 0);
  EXPECT_FALSE(d.stable);
}

TEST(Korn, SquareStableDiscFreeOneSide) {
  double k0 = estimate_korn(mesh(domains::Square{}, 0.25), KornOptions{all_tags(), false, true}).lambda;
  double k1 = estimate_korn(mesh(domains::Square{}, 0.125), KornOptions{all_tags(), false, true}).lambda;
  EXPECT_GT(k0, 0);
  EXPECT_LT(std::abs(k0 - k1) / std::max(k0, k1), 0.1);
  double free = estimate_korn(mesh(domains::Disc{}, 0.25), KornOptions{{}, false, false}).lambda;
  EXPECT_LE(std::abs(free), 1e-10);
  domains::BelowGraph unit{0, 1, 0, [](double) { return 1.0; }, [](double) { return 0.0; }};
  EXPECT_GT(estimate_korn(mesh(unit, 0.25), KornOptions{{BoundaryTag::Flat}, false, true}).lambda, 1e-8);
}

TEST(Convergence, ZeroCase) {
  RateTable t = convergence_study("zero", 2, 0.25);
  for (const auto& r : t.rows) {
    EXPECT_LE(r.err_u, 1e-10);
    EXPECT_LE(r.err_p, 1e-10);
  }
}

TEST(Convergence, FrictionCaseRates) {
  RateTable t = convergence_study("square-friction", 3, 0.125);
  EXPECT_GE(t.rows.back().rate_u, 1.7);
  EXPECT_LE(t.rows.back().rate_u, 2.2);
  EXPECT_GE(t.rows.back().rate_p, 1.6);
  EXPECT_LE(t.rows.back().rate_p, 2.2);
}

TEST(Convergence, UnknownCase) {
  EXPECT_THROW(manufactured_case("nope"), InvalidInput);
  EXPECT_THROW(convergence_study("square-slip", 1), InvalidInput);
}
