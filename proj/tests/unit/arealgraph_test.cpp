#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "stppm/arealgraph.hpp"

namespace stppm {
namespace {

ArealMap path3() { return ArealMap(3, {{1}, {0, 2}, {1}}); }

TEST(ArealMap, PathByIndexPredecessors) {
  const DagOrdering o = dag_ordering(path3());
  EXPECT_TRUE(o.directed_neighbors[0].empty());
  EXPECT_EQ(o.directed_neighbors[1], std::vector<int>{0});
  EXPECT_EQ(o.directed_neighbors[2], std::vector<int>{1});
}

TEST(ArealMap, SingleArea) {
  const ArealMap m(1, {{}});
  const DagOrdering o = dag_ordering(m);
  EXPECT_EQ(o.predecessor_count(0), 0);
  EXPECT_EQ(m.edge_count(), 0u);
}

TEST(ArealMap, GridPredecessorCounts) {
  const DagOrdering o = dag_ordering(ArealMap::grid(2, 2));
  std::vector<int> counts;
  for (int i = 0; i < 4; ++i) counts.push_back(o.predecessor_count(i));
  EXPECT_EQ(counts, (std::vector<int>{0, 1, 1, 2}));
}

TEST(ArealMap, NeighborListToleratesDuplicates) {
  const std::vector<std::pair<int, int>> rows{{1, 2}, {2, 1}, {1, 2}, {2, 3}};
  const ArealMap m = ArealMap::from_neighbor_list(rows, 4);
  EXPECT_EQ(m.size(), 4);
  EXPECT_EQ(m.edge_count(), 2u);
  EXPECT_EQ(m.degree(3), 0);
  EXPECT_EQ(m.component_count(), 2);
}

TEST(ArealMap, RejectsSelfLoop) {
  EXPECT_THROW(ArealMap(2, {{0}, {}}), std::invalid_argument);
}

TEST(ArealMap, RejectsNonBijectiveUserOrder) {
  const std::vector<int> bad{0, 0, 2};
  EXPECT_THROW(dag_ordering(path3(), OrderingRule::UserPermutation, bad), std::invalid_argument);
  const std::vector<int> good{2, 0, 1};
  const DagOrdering o = dag_ordering(path3(), OrderingRule::UserPermutation, good);
  EXPECT_EQ(o.order, good);
  // Area 1 comes last, so both path neighbors precede it; area 0 precedes 1 only.
  EXPECT_EQ(o.directed_neighbors[1], (std::vector<int>{0, 2}));
  EXPECT_TRUE(o.directed_neighbors[0].empty());
  EXPECT_TRUE(o.directed_neighbors[2].empty());
}

TEST(ArealMap, ComponentsGetOrderPrefixes) {
  // Two components {0, 2} and {1, 3}.
  const ArealMap m(4, {{2}, {3}, {0}, {1}});
  const DagOrdering o = dag_ordering(m);
  EXPECT_EQ(o.order, (std::vector<int>{0, 2, 1, 3}));
}

TEST(ArealMap, PredecessorCountsSumToEdges) {
  const ArealMap m = ArealMap::grid(4, 5);
  for (auto rule : {OrderingRule::ByIndex, OrderingRule::MaxDegreeFirst}) {
    const DagOrdering o = dag_ordering(m, rule);
    std::size_t total = 0;
    for (int i = 0; i < m.size(); ++i) total += static_cast<std::size_t>(o.predecessor_count(i));
    EXPECT_EQ(total, m.edge_count());
  }
}

TEST(BoundaryLength, Examples) {
  const ArealMap g = ArealMap::grid(2, 2);
  EXPECT_EQ(boundary_length(g, Partition::single_block(4), 0), 0);
  const std::vector<int> rows{0, 0, 1, 1};
  EXPECT_EQ(boundary_length(g, Partition::from_labels(rows), 0), 2);
  const ArealMap g3 = ArealMap::grid(3, 3);
  const std::vector<int> centre{0, 0, 0, 0, 1, 0, 0, 0, 0};
  EXPECT_EQ(boundary_length(g3, Partition::from_labels(centre), 1), g3.degree(4));
}

TEST(BoundaryLength, MatchesScanAndEdgeIdentity) {
  const ArealMap m = ArealMap::grid(4, 4);
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> lab(0, 3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> labels(16);
    for (int& l : labels) l = lab(gen);
    const Partition p = Partition::from_labels(labels);
    const std::vector<int> canon(p.labels().begin(), p.labels().end());
    int total = 0;
    for (int j = 0; j < p.block_count(); ++j) {
      const int l = boundary_length(m, p, j);
      EXPECT_EQ(l, testing::boundary_by_scan(m, canon, j));
      EXPECT_EQ(l, boundary_length(m, p.block(j)));
      total += l;
    }
    EXPECT_EQ(total, 2 * between_block_edges(m, p));

    // Relabeling the raw labels does not change any block's boundary.
    std::vector<int> shifted = labels;
    for (int& l : shifted) l = 7 - l;
    const Partition q = Partition::from_labels(shifted);
    for (int j = 0; j < q.block_count(); ++j) {
      EXPECT_EQ(boundary_length(m, q, j), testing::boundary_by_scan(m, canon, canon[static_cast<std::size_t>(q.block(j)[0])]));
    }
  }
}

}  // namespace
}  // namespace stppm
