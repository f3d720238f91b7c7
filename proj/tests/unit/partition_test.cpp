#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "stppm/partition.hpp"

namespace stppm {
namespace {

Partition P(std::vector<int> labels) { return Partition::from_labels(labels); }

std::vector<int> random_labels(std::mt19937_64& gen, int n) {
  std::uniform_int_distribution<int> k_dist(1, n);
  std::uniform_int_distribution<int> lab(0, k_dist(gen) - 1);
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int& l : out) l = lab(gen);
  return out;
}

TEST(Partition, CanonicalFirstAppearance) {
  const Partition p = P({5, 5, 2, 9, 2});
  EXPECT_EQ(std::vector<int>(p.labels().begin(), p.labels().end()), (std::vector<int>{0, 0, 1, 2, 1}));
  EXPECT_EQ(p.block_count(), 3);
  EXPECT_EQ(p.block_sizes(), (std::vector<int>{2, 2, 1}));
  EXPECT_EQ(p.block(1), (std::vector<int>{2, 4}));
  const Partition again = Partition::from_labels(p.labels());
  EXPECT_EQ(again, p);
}

TEST(Partition, BlocksCoverAndAreDisjoint) {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 100; ++rep) {
    const Partition p = P(random_labels(gen, 9));
    std::vector<int> seen(9, 0);
    for (const auto& b : p.blocks())
      for (int i : b) ++seen[static_cast<std::size_t>(i)];
    for (int s : seen) EXPECT_EQ(s, 1);
    EXPECT_LE(p.block_count(), p.size());
  }
}

TEST(AdjustedRand, Examples) {
  const Partition p = P({0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(adjusted_rand_index(p, p), 1.0);
  EXPECT_NEAR(adjusted_rand_index(p, P({0, 1, 0, 1})), -0.5, 1e-15);
  EXPECT_NEAR(adjusted_rand_index(Partition::single_block(4), Partition::singletons(4)), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(Partition::singletons(4), Partition::singletons(4)), 1.0);
  EXPECT_DOUBLE_EQ(adjusted_rand_index(Partition::single_block(4), Partition::single_block(4)), 1.0);
}

TEST(AdjustedRand, RejectsSizeMismatch) {
  EXPECT_THROW(adjusted_rand_index(P({0, 1}), P({0, 1, 2})), std::invalid_argument);
  EXPECT_THROW(vi_distance(P({0, 1}), P({0, 1, 2})), std::invalid_argument);
}

TEST(VariationOfInformation, Examples) {
  const Partition p = P({0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(vi_distance(p, p), 0.0);
  EXPECT_NEAR(vi_distance(Partition::single_block(4), Partition::singletons(4)), std::log(4.0), 1e-15);
  EXPECT_NEAR(vi_distance(p, P({0, 1, 0, 1})), 2.0 * std::log(2.0), 1e-15);
}

TEST(PartitionDistances, MatchBruteForce) {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<int> size(1, 10);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = size(gen);
    const auto a = random_labels(gen, n);
    const auto b = random_labels(gen, n);
    EXPECT_EQ(adjusted_rand_index(P(a), P(b)), testing::ari_by_pairs(a, b));
    EXPECT_NEAR(vi_distance(P(a), P(b)), testing::vi_by_table(a, b), 1e-12);
  }
}

TEST(PartitionDistances, Properties) {
  std::mt19937_64 gen(23);
  for (int rep = 0; rep < 200; ++rep) {
    const auto a = random_labels(gen, 8);
    const auto b = random_labels(gen, 8);
    const auto c = random_labels(gen, 8);
    EXPECT_LE(adjusted_rand_index(P(a), P(b)), 1.0);
    EXPECT_LE(vi_distance(P(a), P(c)), vi_distance(P(a), P(b)) + vi_distance(P(b), P(c)) + 1e-12);
    EXPECT_NEAR(vi_distance(P(a), P(b)), vi_distance(P(b), P(a)), 1e-12);
    std::vector<int> relabeled = a;
    for (int& l : relabeled) l = 100 - 3 * l;
    EXPECT_EQ(adjusted_rand_index(P(relabeled), P(b)), adjusted_rand_index(P(a), P(b)));
    EXPECT_EQ(vi_distance(P(relabeled), P(b)), vi_distance(P(a), P(b)));
  }
}

TEST(PartitionDistances, EntropyOfSingletons) {
  EXPECT_NEAR(partition_entropy(Partition::singletons(5)), std::log(5.0), 1e-15);
  EXPECT_EQ(partition_entropy(Partition::single_block(5)), 0.0);
}

}  // namespace
}  // namespace stppm
