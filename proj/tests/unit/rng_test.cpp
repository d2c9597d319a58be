#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "affect/rng.hpp"

namespace {

TEST(RngTest, SameSeedSameStream) {
  affect::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(RngTest, DrawsStayInRange) {
  affect::Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(rng.index(13), 13u);
    const double v = rng.uniform(-0.05, 0.05);
    EXPECT_GE(v, -0.05);
    EXPECT_LT(v, 0.05);
  }
}

TEST(RngTest, ShuffleIsPermutation) {
  affect::Rng rng(3);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(std::span<int>(v));
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(RngTest, StreamSeedsDiffer) {
  EXPECT_NE(affect::stream_seed(1, "init"), affect::stream_seed(1, "shuffle"));
  EXPECT_NE(affect::stream_seed(1, "init"), affect::stream_seed(2, "init"));
  EXPECT_EQ(affect::stream_seed(5, "dropout"), affect::stream_seed(5, "dropout"));
}

}  // namespace
