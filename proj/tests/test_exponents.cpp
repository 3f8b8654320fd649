#include "slipflow/exponents.hpp"
#include "slipflow/common.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace slipflow;

TEST(Rational, ReducesAndCompares) {
  Rational a(6, -8);
  EXPECT_EQ(a.num, -3);
  EXPECT_EQ(a.den, 4);
  EXPECT_EQ(Rational(1, 3) + Rational(1, 6), Rational(1, 2));
  EXPECT_EQ(Rational(7, 2).floor(), 3);
  EXPECT_EQ(Rational(-7, 2).ceil(), -3);
  EXPECT_LT(compare(Rational(1, 3), Rational(1, 2)), 0);
  EXPECT_THROW(Rational(1, 0), std::domain_error);
}

TEST(Num, ParseAndFallback) {
  EXPECT_EQ(Num::parse("4/3").rational(), Rational(4, 3));
  EXPECT_EQ(Num::parse("-2.75").rational(), Rational(-11, 4));
  EXPECT_TRUE(Num::parse("1e-3").exact());
  EXPECT_THROW(Num::parse("abc"), InvalidInput);
  Num big = Num(Rational(1, 3037000499LL)) * Num(Rational(1, 3037000499LL)) * Num(Rational(1, 7));
  EXPECT_FALSE(big.exact());
  EXPECT_GT(big.value(), 0);
  EXPECT_FALSE((Num::real(0.5) + Num(1)).exact());
}

TEST(SlipLadder, FourTwo) {
  ExponentLadder L = slip_ladder(4, 2);
  ASSERT_TRUE(L.inv_t_minus1);
  EXPECT_EQ(L.inv_t_minus1->rational(), Rational(3, 4));
  EXPECT_EQ(L.inv(0).rational(), Rational(2, 3));
  EXPECT_EQ(L.M, 1);
  EXPECT_EQ(L.inv(1).rational(), Rational(5, 12));
  EXPECT_DOUBLE_EQ(L.t(1), 2.4);
  EXPECT_GE(L.t(L.M), 2);
}

TEST(SlipLadder, LargeS) {
  ExponentLadder L = slip_ladder(1000, 2);
  EXPECT_NEAR(L.t(0), 1.0 / (1 - 2.0 / 1002), 1e-12);
  EXPECT_NEAR(L.step.value(), 0.5 - 0.001, 1e-12);
}

TEST(SlipLadder, RandomReachTwoAndIncrease) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    int n = 2 + static_cast<int>(rng() % 3);
    double s = std::uniform_real_distribution<double>(n + 0.05, 20)(rng);
    ExponentLadder L = slip_ladder(Num::real(s), n);
    EXPECT_GE(L.t(L.M), 2 - 1e-12) << s << " " << n;
    for (std::int64_t m = 1; m <= L.M; ++m) EXPECT_GT(L.t(m), L.t(m - 1));
  }
}

TEST(SlipLadder, Preconditions) {
  EXPECT_THROW(slip_ladder(2, 2), InvalidInput);
  EXPECT_THROW(slip_ladder(4, 1), InvalidInput);
}

TEST(NavierLadder, FourTwoThree) {
  ExponentLadder L = navier_ladder(4, 2, 3);
  EXPECT_EQ(L.inv(0).rational(), Rational(3, 4));
  EXPECT_EQ(L.step.rational(), Rational(1, 3));
  EXPECT_EQ(L.inv(1).rational(), Rational(5, 12));
  EXPECT_DOUBLE_EQ(L.t(1), 2.4);
}

TEST(NavierLadder, StepLimits) {
  EXPECT_NEAR(navier_ladder(4, 2, Num::real(1e9)).step.value(), 0.5, 1e-8);
  ExponentLadder tiny = navier_ladder(4, 2, Num(Rational(1000001, 1000000)));
  EXPECT_GT(tiny.step.value(), 0);
  EXPECT_GT(tiny.M, 1000);
  EXPECT_TRUE(tiny.truncated || tiny.M < 4096);
  EXPECT_GE(tiny.t(tiny.M), 2);
  EXPECT_THROW(navier_ladder(4, 2, 1), InvalidInput);
}

TEST(EmbeddingChain, HoldsOnTestedPairs) {
  ChainReport r = check_embedding_chain(slip_ladder(4, 2));
  EXPECT_TRUE(r.holds);
  ASSERT_TRUE(r.first_gap);
  // (n^2 + s^2) / (s n (s + n)) = 20 / 48
  EXPECT_EQ(r.first_gap->rational(), Rational(5, 12));
  for (auto [s, n] : {std::pair{3, 2}, {5, 2}, {10, 2}}) EXPECT_TRUE(check_embedding_chain(slip_ladder(s, n)).holds);
}

TEST(EmbeddingChain, TerminatesWhenStarUndefined) {
  // Probing one index past M on (4, 2) reaches t_1 = 12/5 >= n.
  ExponentLadder L = slip_ladder(4, 2);
  L.M = 2;
  ChainReport r = check_embedding_chain(L);
  EXPECT_TRUE(r.terminated);
  EXPECT_EQ(r.terminated_at, 2);
}

TEST(FrictionGate, BranchExamples) {
  EXPECT_TRUE(friction_exponent_gate(2, 2, Num::parse("1.5")));
  EXPECT_FALSE(friction_exponent_gate(3, 2, Num::parse("1.4")));
  EXPECT_TRUE(friction_exponent_gate(3, 2, Num::parse("1.5")));
  EXPECT_TRUE(friction_exponent_gate(Num(Rational(4, 3)), 2, Num::parse("2.5")));
  EXPECT_FALSE(friction_exponent_gate(Num(Rational(4, 3)), 2, 2));
}

TEST(FrictionGate, MonotoneInQ) {
  for (int a = 11; a <= 60; a += 7)
    for (int n : {2, 3}) {
      bool seen = false;
      for (int b = 1; b <= 60; ++b) {
        bool g = friction_exponent_gate(Num(Rational(a, 10)), n, Num(Rational(b, 10)));
        EXPECT_FALSE(seen && !g) << a << " " << n << " " << b;
        seen = seen || g;
      }
    }
}
