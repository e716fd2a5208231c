#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "lanlab/rng.hpp"

using namespace lanlab;

TEST(Philox, KnownAnswerVectors) {
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}),
            (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(DeriveStream, SameSeedAndIndexReproduce) {
  CounterStream a = derive_stream(123, 7), b = derive_stream(123, 7);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
}

TEST(DeriveStream, NeighbouringIndicesDiffer) {
  CounterStream a = derive_stream(123, 0), b = derive_stream(123, 1);
  EXPECT_NE(a(), b());
}

TEST(DeriveStream, SeedAvalanche) {
  // Changing the master seed changes the first output of every stream.
  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    for (std::uint64_t idx : {0ULL, 1ULL, 17ULL}) {
      CounterStream s = derive_stream(seed, idx);
      firsts.insert(s());
    }
  }
  EXPECT_EQ(firsts.size(), 3000u);
}

TEST(CounterStream, DerivedChildrenAreDistinct) {
  const CounterStream root = derive_stream(5, 3);
  CounterStream c0 = root.derive(0), c1 = root.derive(1), again = root.derive(0);
  const auto x0 = c0(), x1 = c1();
  EXPECT_NE(x0, x1);
  EXPECT_EQ(x0, again());
}

TEST(CounterStream, UniformOpenIntervalAndMoments) {
  CounterStream s(42, 0);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 2e-3);
}

TEST(CounterStream, PoissonMeanAndVariance) {
  for (double mean : {0.5, 7.0, 120.0}) {
    CounterStream s(9, static_cast<std::uint64_t>(mean * 10));
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(s.poisson(mean));
      sum += k;
      sq += k * k;
    }
    const double m = sum / n;
    EXPECT_NEAR(m, mean, 4 * std::sqrt(mean / n)) << mean;
    EXPECT_NEAR((sq / n - m * m) / mean, 1.0, 0.03) << mean;
  }
}

TEST(CounterStream, NormalMoments) {
  CounterStream s(77, 1);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(sq / n, 1.0, 0.015);
}

TEST(CounterStream, BelowIsInRange) {
  CounterStream s(1, 1);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto k = s.below(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}
