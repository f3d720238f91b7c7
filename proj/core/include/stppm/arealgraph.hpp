#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "stppm/partition.hpp"

namespace stppm {

/// Undirected neighbor structure over n areal units.
///
/// Areas are 0-based here; the 1-based convention of external files is
/// handled by the I/O layer. Adjacency lists are sorted and free of
/// duplicates and self-loops. Immutable after construction.
class ArealMap {
 public:
  ArealMap() = default;
  /// neighbors[i] may be unsorted and contain duplicates; the relation is
  /// symmetrized. Throws std::invalid_argument on self-loops or bad indices.
  ArealMap(int n_areas, const std::vector<std::vector<int>>& neighbors);

  /// Builds from 1-based (area, area) rows. Duplicates and both directions
  /// are tolerated. n_areas is the largest index seen unless declared larger.
  static ArealMap from_neighbor_list(std::span<const std::pair<int, int>> rows,
                                     std::optional<int> declared_areas = std::nullopt);

  /// Rook adjacency on a rows x cols lattice; area index = r * cols + c.
  /// Unit-spaced cell centers are attached as coordinates.
  static ArealMap grid(int rows, int cols);

  int size() const noexcept { return n_; }
  std::span<const int> neighbors(int i) const;
  int degree(int i) const;
  bool adjacent(int i, int j) const;
  std::size_t edge_count() const noexcept { return edges_; }
  int component_count() const noexcept { return components_; }
  /// Component id of each area, numbered by smallest member.
  const std::vector<int>& components() const noexcept { return component_of_; }

  /// Binary adjacency matrix M.
  const Eigen::SparseMatrix<double>& adjacency() const noexcept { return adjacency_; }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  void set_labels(std::vector<std::string> labels);

  const std::vector<std::array<double, 2>>& coordinates() const noexcept { return coords_; }
  void set_coordinates(std::vector<std::array<double, 2>> coords);

  /// Euclidean distance matrix from coordinates; throws if none attached.
  Eigen::MatrixXd distance_matrix() const;

 private:
  int n_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> indices_;
  std::size_t edges_ = 0;
  int components_ = 0;
  std::vector<int> component_of_;
  Eigen::SparseMatrix<double> adjacency_;
  std::vector<std::string> labels_;
  std::vector<std::array<double, 2>> coords_;
};

enum class OrderingRule { ByIndex, MaxDegreeFirst, UserPermutation };

const char* to_string(OrderingRule rule);
OrderingRule ordering_rule_from_string(const std::string& name);

/// Directed acyclic version of a map: a permutation of the areas and, for
/// each area, the neighbors that precede it.
struct DagOrdering {
  OrderingRule rule = OrderingRule::ByIndex;
  std::vector<int> order;                           ///< order[r] = area at rank r
  std::vector<int> rank;                            ///< inverse of order
  std::vector<std::vector<int>> directed_neighbors; ///< N(i), sorted by area index

  int size() const noexcept { return static_cast<int>(order.size()); }
  int predecessor_count(int i) const {
    return static_cast<int>(directed_neighbors[static_cast<std::size_t>(i)].size());
  }
};

/// Components are laid out one after another (by smallest member); within a
/// component, areas are ranked by the rule. A user permutation (0-based,
/// order[r] = area) is taken verbatim and must be a bijection.
DagOrdering dag_ordering(const ArealMap& map, OrderingRule rule = OrderingRule::ByIndex,
                         std::span<const int> user_order = {});

/// l(S_j): number of (area in S_j, neighbor outside S_j) pairs.
int boundary_length(const ArealMap& map, const Partition& partition, int block);
/// Same count for an explicit set of areas.
int boundary_length(const ArealMap& map, std::span<const int> areas);

/// Number of edges whose endpoints lie in different blocks.
int between_block_edges(const ArealMap& map, const Partition& partition);

}  // namespace stppm
