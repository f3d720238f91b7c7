#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "stppm/cohesion.hpp"

namespace stppm {
namespace {

TEST(Cohesion, HbWholeMapIsZero) {
  const ArealMap g = ArealMap::grid(3, 3);
  const std::vector<int> all{0, 1, 2, 3, 4, 5, 6, 7, 8};
  for (double eta : {0.0, 0.1, 0.35, 1.0}) EXPECT_EQ(log_cohesion(g, all, CohesionSpec::hb(eta)), 0.0);
}

TEST(Cohesion, DpBlockOfThree) {
  const ArealMap g = ArealMap::grid(3, 3);
  const std::vector<int> block{0, 1, 2};
  EXPECT_NEAR(log_cohesion(g, block, CohesionSpec::dp(1.0)), std::log(2.0), 1e-15);
}

TEST(Cohesion, HbSingletonOfDegreeFour) {
  const ArealMap g = ArealMap::grid(3, 3);
  const std::vector<int> centre{4};
  EXPECT_NEAR(log_cohesion(g, centre, CohesionSpec::hb(0.35)), 4.0 * std::log(0.35), 1e-15);
  EXPECT_NEAR(4.0 * std::log(0.35), -4.199, 5e-4);
}

TEST(Cohesion, EtaZeroLimit) {
  const ArealMap g = ArealMap::grid(2, 2);
  const std::vector<int> one{0};
  EXPECT_EQ(log_cohesion(g, one, CohesionSpec::hb(0.0)), -std::numeric_limits<double>::infinity());
}

TEST(Cohesion, RejectsEmptyBlockAndBadSpecs) {
  const ArealMap g = ArealMap::grid(2, 2);
  EXPECT_THROW(log_cohesion(g, std::vector<int>{}, CohesionSpec::hb(0.3)), std::invalid_argument);
  EXPECT_THROW(CohesionSpec::hb(1.5).validate(), std::invalid_argument);
  EXPECT_THROW(CohesionSpec::dp(0.0).validate(), std::invalid_argument);
}

TEST(PartitionPrior, Examples) {
  const ArealMap g = ArealMap::grid(2, 2);
  EXPECT_EQ(log_partition_prior(g, Partition::single_block(4), CohesionSpec::hb(0.4)), 0.0);
  const std::vector<int> rows{0, 0, 1, 1};
  EXPECT_NEAR(log_partition_prior(g, Partition::from_labels(rows), CohesionSpec::hb(0.4)), 4.0 * std::log(0.4), 1e-15);
  EXPECT_EQ(log_partition_prior(g, Partition::singletons(4), CohesionSpec::dp(1.0)), 0.0);
}

TEST(PartitionPrior, MergeChangesHbPriorByBetweenEdges) {
  const ArealMap m = ArealMap::grid(4, 4);
  std::mt19937_64 gen(9);
  std::uniform_int_distribution<int> lab(0, 3);
  const double eta = 0.27;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> labels(16);
    for (int& l : labels) l = lab(gen);
    const Partition split = Partition::from_labels(labels);
    if (split.block_count() < 2) continue;
    // Merge blocks 0 and 1; b counts edges between them.
    std::vector<int> merged(split.labels().begin(), split.labels().end());
    int b = 0;
    for (int i = 0; i < 16; ++i)
      for (int j : m.neighbors(i))
        if (i < j && ((merged[static_cast<std::size_t>(i)] == 0 && merged[static_cast<std::size_t>(j)] == 1) ||
                      (merged[static_cast<std::size_t>(i)] == 1 && merged[static_cast<std::size_t>(j)] == 0)))
          ++b;
    for (int& l : merged)
      if (l == 1) l = 0;
    const double before = log_partition_prior(m, split, CohesionSpec::hb(eta));
    const double after = log_partition_prior(m, Partition::from_labels(merged), CohesionSpec::hb(eta));
    EXPECT_NEAR(after - before, -2.0 * b * std::log(eta), 1e-12);
  }
}

}  // namespace
}  // namespace stppm
