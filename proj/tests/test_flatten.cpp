#include "slipflow/flatten.hpp"
#include "slipflow/piola.hpp"
#include "suites.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace slipflow;

namespace {

// Includes the top vertices of the mesh, where the discrete data lives.
double boundary_max(const RealFn& C, const BubbleDomain& b, const TriMesh& mesh) {
  double m = 0;
  for (const auto& e : mesh.boundary)
    if (e.tag == BoundaryTag::Flat) m = std::max(m, std::abs(C(mesh.vertices[e.a].x())));
  for (int i = 0; i <= 4000; ++i) m = std::max(m, std::abs(C(b.center.x() - b.top_half_width() + 2 * b.top_half_width() * i / 4000)));
  return m;
}

Vec2 barycenter(const TriMesh& m) {
  Vec2 c = Vec2::Zero();
  for (int t = 0; t < m.num_triangles(); ++t) {
    Vec2 g = Vec2::Zero();
    for (int k = 0; k < 3; ++k) g += m.vertices[m.triangles[t][k]] / 3;
    c += m.triangle_area(t) * g;
  }
  return c / m.area();
}

}  // namespace

TEST(CompactSupport, ZeroGraph) {
  BoundaryGraph g = normalize_graph(make_graph([](double) { return 0.0; }, [](double) { return 0.0; }, 0, 0.5, 4));
  RealFn C = compact_support_graph(g, make_cutoff(Vec2::Zero(), 0.5));
  for (double y : {-0.6, -0.2, 0.0, 0.4}) EXPECT_EQ(C(y), 0);
}

TEST(CompactSupport, EqualsGraphOnInnerDisc) {
  const double d = 0.4;
  BoundaryGraph g = normalize_graph(suites::named_graph("sin", d, 4));
  RealFn C = compact_support_graph(g, make_cutoff(Vec2::Zero(), d));
  for (double y = -0.4 * d; y <= 0.4 * d; y += 0.05 * d) EXPECT_EQ(C(y), g.eval(y));
  EXPECT_EQ(C(1.01 * d), 0);
}

TEST(CompactSupport, SeminormRatioStableUnderAmplitude) {
  const double d = 0.5;
  double r[2];
  int i = 0;
  for (double eps : {0.01, 0.04}) {
    BoundaryGraph g = make_graph([=](double x) { return eps * std::sin(M_PI * x / d); },
                                 [=](double x) { return eps * M_PI / d * std::cos(M_PI * x / d); }, 0, d, 4);
    BoundaryGraph n = normalize_graph(g);
    // Compare on a disc holding the whole support of C omega.
    RealFn C = compact_support_graph(n, make_cutoff(Vec2::Zero(), d));
    Disc1 wide{0, 1.5 * d};
    double top = gagliardo_seminorm(C, wide, 0.75, 4);
    r[i++] = top / eps;
  }
  EXPECT_NEAR(r[0], r[1], 0.05 * r[0]);
}

TEST(HarmonicExtension, ZeroData) {
  ExtensionField E = harmonic_extension([](double) { return 0.0; }, make_bubble(Vec2::Zero(), 1), 0.2);
  EXPECT_EQ(E.values().cwiseAbs().maxCoeff(), 0);
}

TEST(HarmonicExtension, RejectsBadInput) {
  BubbleDomain b = make_bubble(Vec2::Zero(), 1);
  EXPECT_THROW(harmonic_extension([](double) { return 0.0; }, b, 0), InvalidInput);
  EXPECT_THROW(harmonic_extension([](double) { return 1.0; }, b, 0.2), InvalidInput);
}

TEST(HarmonicExtension, MaximumPrincipleOnRandomData) {
  BubbleDomain b = make_bubble(Vec2(0.2, -0.1), 0.5);
  std::mt19937_64 rng(17);
  for (int k = 0; k < 8; ++k) {
    symbolic::Expr e = suites::random_trig(rng, 6);
    const double a = b.top_half_width(), c = b.center.x();
    RealFn C = [=](double y) {
      double t = (y - c) / a;
      return t * t < 1 ? (1 - t * t) * e.eval(Vec2(y, 0)) : 0.0;
    };
    ExtensionField E = harmonic_extension(C, b, 0.05);
    EXPECT_LE(E.values().cwiseAbs().maxCoeff(), boundary_max(C, b, E.mesh()) + 1e-10);
    EXPECT_LE(E.solve_residual(), 1e-12);
  }
}

TEST(HarmonicExtension, Linear) {
  BubbleDomain b = make_bubble(Vec2::Zero(), 1);
  const double a = b.top_half_width();
  RealFn C1 = [a](double y) { return std::max(0.0, 1 - (y / a) * (y / a)); };
  RealFn C2 = [a](double y) { return y / a * std::max(0.0, 1 - (y / a) * (y / a)); };
  auto mesh = std::make_shared<TriMesh>(mesh_domain(domains::Bubble{b}, 0.1));
  ExtensionField E1 = harmonic_extension_on(C1, b, mesh), E2 = harmonic_extension_on(C2, b, mesh);
  ExtensionField E = harmonic_extension_on([&](double y) { return 2 * C1(y) - 3 * C2(y); }, b, mesh);
  EXPECT_LE((E.values() - 2 * E1.values() + 3 * E2.values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HarmonicExtension, BarycenterMatchesFineGrid) {
  BubbleDomain b = make_bubble(Vec2::Zero(), 1);
  CutoffFunction bump = make_cutoff(Vec2::Zero(), b.top_half_width());
  RealFn C = [bump](double y) { return bump.radial(std::abs(y)); };
  const double h = 0.1;
  ExtensionField coarse = harmonic_extension(C, b, h), fine = harmonic_extension(C, b, h / 4);
  Vec2 g = barycenter(coarse.mesh());
  double vc = coarse.eval(g), vf = fine.eval(g);
  EXPECT_GT(vf, 0.01);
  EXPECT_LT(std::abs(vc - vf), 0.005);
}

TEST(FullExtension, PlateauAndSupport) {
  BubbleDomain b = make_bubble(Vec2::Zero(), 1);
  ExtensionField E = harmonic_extension([&](double y) { return std::max(0.0, 1 - y * y / 1.1); }, b, 0.1);
  CutoffFunction rho = make_cutoff(Vec2::Zero(), 1);
  ExtensionField T = full_extension(E, rho);
  int inside = 0, outside = 0;
  for (const auto& v : E.mesh().vertices) {
    Vec2 x = v * (1 - 1e-9);
    double r = v.norm();
    if (r < 0.49) {
      EXPECT_EQ(T.eval(x), E.eval(x));
      ++inside;
    } else if (r > 1.0) {
      EXPECT_EQ(T.eval(x), 0);
      ++outside;
    }
  }
  EXPECT_GT(inside, 5);
  EXPECT_GT(outside, 5);
}

TEST(FullExtension, GradientScalesWithDelta) {
  // Fixed graph on shrinking discs: sup |grad E~| / (delta^{1/2} |omega|_top) stays bounded.
  auto w = [](double x) { return 0.3 * std::sin(2 * x) + 0.2 * x * x; };
  auto dw = [](double x) { return 0.6 * std::cos(2 * x) + 0.4 * x; };
  std::vector<double> r;
  for (int k = 1; k <= 5; ++k) {
    const double d = std::ldexp(1.0, -k);
    Flattening fl = flatten_graph(make_graph(w, dw, 0, d, 4), 1.0 / 16);
    double top = verify_graph_estimates(fl.graph).seminorm_top;
    r.push_back(w1inf_seminorm(*fl.psi) / (std::sqrt(d) * top));
  }
  auto [lo, hi] = std::minmax_element(r.begin(), r.end());
  EXPECT_GT(*lo, 0);
  EXPECT_LT(*hi / *lo, 3);
}

TEST(Diffeomorphism, ZeroGraphIsIdentity) {
  BoundaryGraph g = make_graph([](double) { return 0.0; }, [](double) { return 0.0; }, 0, 0.5, 4);
  Flattening fl = flatten_graph(g);
  EXPECT_EQ(fl.gap, 0);
  for (Vec2 x : {Vec2(0.1, -0.2), Vec2(-0.3, 0.0), Vec2(2.0, -3.0)}) {
    EXPECT_EQ(fl.psi->apply(x), x);
    EXPECT_EQ(fl.psi->jacobian(x), 1);
  }
  EXPECT_EQ(jacobian_gap(*fl.psi), 0);
}

TEST(Diffeomorphism, RandomGraphInvariants) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int k = 0; k < 5; ++k) {
    double delta = 0.2 + 0.2 * std::abs(U(rng));
    Flattening fl = flatten_graph(suites::random_graph(rng, 0.3 * U(rng), delta, 4), 1.0 / 16, true);
    const Diffeomorphism& d = *fl.psi;
    const double dl = fl.graph.delta;
    const Vec2 c = d.center();
    EXPECT_LT(fl.gap, 0.5);
    auto pts = interior_sample_points(fl.extension->mesh(), 100, 5 + k);
    for (const Vec2& x : pts) {
      if (!d.in_reference(x)) continue;
      EXPECT_NEAR(d.jacobian(x), 1 + fl.extension->grad(x).y(), 1e-10);
      EXPECT_NEAR(d.gradient(x).determinant(), d.jacobian(x), 1e-12);
      EXPECT_GT(d.jacobian(x), 0.5);
      int it = 0;
      Vec2 back = d.inverse(d.apply(x), &it);
      EXPECT_LE((back - x).norm(), 1e-10);
      EXPECT_LE(it, 50);
    }
    for (int i = 0; i < 50; ++i) {
      double a = M_PI * (1 + std::abs(U(rng))), r = dl * (1.01 + std::abs(U(rng)));
      Vec2 x = c + r * Vec2(std::cos(a), -std::abs(std::sin(a)));
      EXPECT_EQ(d.apply(x), x);
    }
    // The flat top inside D(center, delta/2) is mapped onto the graph.
    for (int i = 0; i < 20; ++i) {
      double y = c.x() + 0.45 * dl * U(rng);
      Vec2 p = d.apply(Vec2(y, c.y()));
      EXPECT_NEAR(p.y(), fl.graph.eval(y), 2e-3 * std::pow(dl, 1.5));
    }
  }
}

TEST(Diffeomorphism, InverseRejectsPointsAbove) {
  Flattening fl = flatten_graph(suites::named_graph("bump", 0.3, 4), 1.0 / 16);
  EXPECT_THROW(fl.psi->inverse(Vec2(0, 1.0)), DomainError);
  EXPECT_THROW(fl.psi->apply(Vec2(0, 0.1)), DomainError);
}

TEST(JacobianGap, SlopeNearHalf) {
  std::vector<double> lx, ly;
  for (int k = 1; k <= 6; ++k) {
    const double d = std::ldexp(1.0, -k);
    Flattening fl = flatten_graph(suites::named_graph("poly", d, 4), 1.0 / 16);
    EXPECT_LT(fl.gap, 0.5);
    lx.push_back(std::log(d));
    ly.push_back(std::log(fl.gap));
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < lx.size(); ++i) mx += lx[i] / lx.size(), my += ly[i] / ly.size();
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
  EXPECT_NEAR(sxy / sxx, 0.5, 0.15);
}

TEST(BuildDiffeomorphism, RejectsLargeGap) {
  BubbleDomain b = make_bubble(Vec2::Zero(), 0.2);
  ExtensionField E = harmonic_extension([](double y) { return 0.5 * std::max(0.0, 1 - 25 * y * y); }, b, 0.01);
  EXPECT_THROW(build_diffeomorphism(full_extension(E, make_cutoff(Vec2::Zero(), 0.2))), InvalidInput);
  EXPECT_THROW(build_diffeomorphism(E), InvalidInput);
}
