#include "slipflow/frac_geom.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace slipflow;

namespace {

BoundaryGraph quadratic(double eps, double delta) {
  return make_graph([=](double x) { return eps * (x * x - delta * delta / 3); },
                    [=](double x) { return 2 * eps * x; }, 0, delta, 4);
}

}  // namespace

TEST(NormalizeGraph, ConstantBecomesZero) {
  BoundaryGraph g = make_graph([](double) { return 0.3; }, [](double) { return 0.0; }, 0.1, 0.5, 4);
  BoundaryGraph n = normalize_graph(g);
  EXPECT_TRUE(n.normalized);
  for (double x : {-0.35, 0.0, 0.1, 0.55}) EXPECT_NEAR(n.eval(x), 0, 1e-12);
}

TEST(NormalizeGraph, LineRotatesToHorizontal) {
  const double d = 0.5;
  BoundaryGraph g = make_graph([](double x) { return x; }, [](double) { return 1.0; }, 0, d, 4);
  BoundaryGraph n = normalize_graph(g);
  EXPECT_NEAR(n.grad_eval(0), 0, 1e-12);
  EXPECT_NEAR(graph_mean(n), 0, 1e-10 * d);
  // The rotated line is the x-axis in the new frame: every original point
  // (t, t) maps to local height 0.
  for (double t : {-0.4, -0.1, 0.2, 0.45}) {
    Vec2 local = n.frame.to_local(Vec2(t, t));
    EXPECT_NEAR(n.eval(local.x()), local.y(), 1e-10);
  }
  EXPECT_NEAR(n.frame.angle, std::atan(1.0), 1e-12);
}

TEST(NormalizeGraph, NormalizedInputUnchanged) {
  const double d = 0.7;
  BoundaryGraph n = normalize_graph(quadratic(1, d));
  for (double x : {-0.6, -0.2, 0.0, 0.3, 0.69}) EXPECT_NEAR(n.eval(x), x * x - d * d / 3, 1e-12);
}

TEST(NormalizeGraph, RandomGraphsSatisfyInvariants) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-0.3, 0.3);
  for (int k = 0; k < 10; ++k) {
    double a = U(rng), b = U(rng), c = U(rng);
    BoundaryGraph g = make_graph([=](double x) { return a + b * x + c * std::sin(3 * x); },
                                 [=](double x) { return b + 3 * c * std::cos(3 * x); }, 0.2, 0.4, 4);
    BoundaryGraph n = normalize_graph(g);
    EXPECT_LE(std::abs(n.grad_eval(n.center)), 1e-12);
    EXPECT_LE(std::abs(graph_mean(n)), 1e-10 * n.delta);
  }
}

TEST(MakeGraph, RejectsSNotAboveN) {
  EXPECT_THROW(make_graph([](double) { return 0.0; }, [](double) { return 0.0; }, 0, 1, 2), InvalidInput);
}

TEST(Gagliardo, ConstantIsZero) {
  EXPECT_EQ(gagliardo_seminorm([](double) { return 1.0; }, Disc1{0, 1}, 0.75, 4), 0);
}

TEST(Gagliardo, LinearClosedForm) {
  for (double d : {0.2, 1.0, 3.0})
    EXPECT_NEAR(gagliardo_seminorm([](double x) { return x; }, Disc1{0, d}, 0.75, 4),
                std::pow(4 * d * d, 0.25), 1e-6 * std::pow(4 * d * d, 0.25));
}

TEST(Gagliardo, TranslationInvariantInValue) {
  auto f = [](double x) { return std::sin(2 * x) + x * x; };
  double a = gagliardo_seminorm(f, Disc1{0.3, 0.8}, 0.6, 3);
  double b = gagliardo_seminorm([&](double x) { return f(x) + 5.0; }, Disc1{0.3, 0.8}, 0.6, 3);
  EXPECT_NEAR(a, b, 1e-12 * a);
}

TEST(Gagliardo, HomogeneousOfDegreeOne) {
  auto f = [](double x) { return std::cos(x) * x; };
  double a = gagliardo_seminorm(f, Disc1{0, 1}, 0.5, 4);
  double b = gagliardo_seminorm([&](double x) { return -3 * f(x); }, Disc1{0, 1}, 0.5, 4);
  EXPECT_NEAR(b, 3 * a, 1e-12 * b);
}

TEST(Gagliardo, RejectsBadParameters) {
  auto f = [](double x) { return x; };
  EXPECT_THROW(gagliardo_seminorm(f, Disc1{0, 1}, 1.0, 4), InvalidInput);
  EXPECT_THROW(gagliardo_seminorm(f, Disc1{0, 1}, 0.5, 1.0), InvalidInput);
  EXPECT_THROW(gagliardo_seminorm(f, Disc1{0, 0}, 0.5, 4), InvalidInput);
}

TEST(GraphEstimates, ZeroGraphHasNoRatios) {
  BoundaryGraph g = normalize_graph(make_graph([](double) { return 0.0; }, [](double) { return 0.0; }, 0, 0.5, 4));
  GraphEstimates e = verify_graph_estimates(g);
  EXPECT_FALSE(e.inf_ratio);
  EXPECT_FALSE(e.grad_ratio);
  EXPECT_FALSE(e.low_ratio);
}

TEST(GraphEstimates, RatiosIndependentOfAmplitude) {
  GraphEstimates a = verify_graph_estimates(normalize_graph(quadratic(0.01, 0.5)));
  GraphEstimates b = verify_graph_estimates(normalize_graph(quadratic(0.1, 0.5)));
  ASSERT_TRUE(a.inf_ratio && b.inf_ratio && a.low_ratio && b.low_ratio);
  EXPECT_NEAR(*a.inf_ratio, *b.inf_ratio, 1e-3 * *a.inf_ratio);
  EXPECT_NEAR(*a.grad_ratio, *b.grad_ratio, 1e-3 * *a.grad_ratio);
  EXPECT_NEAR(*a.low_ratio, *b.low_ratio, 1e-3 * *a.low_ratio);
}

TEST(GraphEstimates, RatiosBoundedUnderRescaling) {
  // Fixed profile w(x / delta) with the natural height delta^{3/2}.
  double lo = 1e300, hi = 0;
  for (int k = 1; k <= 6; ++k) {
    double d = std::ldexp(1.0, -k), a = std::pow(d, 1.5);
    BoundaryGraph g = normalize_graph(make_graph(
        [=](double x) { return a * (std::cos(2 * x / d) + 0.3 * std::sin(x / d)); },
        [=](double x) { return a / d * (-2 * std::sin(2 * x / d) + 0.3 * std::cos(x / d)); }, 0, d, 4));
    GraphEstimates e = verify_graph_estimates(g);
    ASSERT_TRUE(e.inf_ratio && e.grad_ratio && e.low_ratio);
    for (double r : {*e.inf_ratio, *e.grad_ratio, *e.low_ratio}) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  EXPECT_GT(lo, 0);
  EXPECT_LT(hi, 100);
}

TEST(Cutoff, PlateauSupportAndProfile) {
  CutoffFunction c = make_cutoff(Vec2(0.2, -0.1), 0.4);
  EXPECT_EQ(c.eval(c.center), 1);
  EXPECT_EQ(c.eval(c.center + Vec2(1.01 * 0.4, 0)), 0);
  double v = c.eval(c.center + Vec2(0.75 * 0.4, 0));
  EXPECT_GT(v, 0);
  EXPECT_LT(v, 1);
  // t = 1/2 in the transition: e^{-2} / (e^{-2} + e^{-2}) = 1/2.
  EXPECT_NEAR(v, 0.5, 1e-14);
  double t = 0.3, r = 0.2 * (1 + t);
  double e0 = std::exp(-1 / t), e1 = std::exp(-1 / (1 - t));
  EXPECT_NEAR(c.radial(r), 1 - e0 / (e0 + e1), 1e-14);
}

TEST(Cutoff, RangeAndSmoothness) {
  CutoffFunction c = make_cutoff(Vec2::Zero(), 1);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> R(0.5, 1.0), A(0, 2 * M_PI);
  for (int i = 0; i < 20; ++i) {
    double r = R(rng), a = A(rng);
    Vec2 x(r * std::cos(a), r * std::sin(a));
    double v = c.eval(x);
    EXPECT_GE(v, 0);
    EXPECT_LE(v, 1);
    double prev = 0;
    for (double h : {1e-2, 1e-3, 1e-4}) {
      Vec2 e(h, 0);
      double d2 = (c.eval(x + e) - 2 * v + c.eval(x - e)) / (h * h);
      EXPECT_NEAR(d2, c.hessian(x)(0, 0), 0.2 + 100 * h);
      if (h < 1e-2) EXPECT_LT(std::abs(d2), std::abs(prev) + 50);
      prev = d2;
    }
  }
}

TEST(Cutoff, GradientMatchesDifferences) {
  CutoffFunction c = make_cutoff(Vec2(1, 1), 0.5);
  Vec2 x(1.3, 1.1);
  Vec2 fd = central_gradient([&](const Vec2& p) { return c.eval(p); }, x, 1e-6);
  EXPECT_NEAR((fd - c.grad(x)).norm(), 0, 1e-7);
}

TEST(Bubble, NestedBetweenHalfBalls) {
  BubbleDomain b = make_bubble(Vec2(0.3, 0.2), 0.4);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1, 1);
  int inner = 0;
  for (int i = 0; i < 20000; ++i) {
    Vec2 x = b.center + 1.6 * b.delta * Vec2(U(rng), U(rng));
    double r = (x - b.center).norm();
    bool below = x.y() < b.center.y();
    if (below && r < b.delta) {
      EXPECT_TRUE(b.contains(x));
      ++inner;
    }
    if (b.contains(x)) EXPECT_TRUE(r < 1.5 * b.delta && x.y() <= b.center.y() + 1e-15);
  }
  EXPECT_GT(inner, 100);
  EXPECT_GT(b.top_half_width(), b.delta);
  EXPECT_LT(b.top_half_width(), 1.5 * b.delta);
}
