#include <gtest/gtest.h>

#include <set>

#include "dkc/random.hpp"

namespace dkc {
namespace {

TEST(Random, UniformBelowStaysInRange) {
  Rng rng(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[uniform_below(rng, 7)];
  for (int h : hits) EXPECT_GT(h, 800);
  EXPECT_EQ(uniform_below(rng, 1), 0u);
}

TEST(Random, UnitRealInHalfOpenInterval) {
  Rng rng(2);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = unit_real(rng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 10000, 0.5, 0.02);
}

TEST(Random, SameSeedSameSequence) {
  Rng a(9), b(9);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(uniform_below(a, 1000), uniform_below(b, 1000));
}

TEST(Random, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t stream = 0; stream < 4; ++stream) seen.insert(derive_seed(s, stream));
  EXPECT_EQ(seen.size(), 16u);
  EXPECT_EQ(derive_seed(3, 1), derive_seed(3, 1));
}

}  // namespace
}  // namespace dkc
