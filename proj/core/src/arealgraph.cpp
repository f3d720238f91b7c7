#include "stppm/arealgraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace stppm {

ArealMap::ArealMap(int n_areas, const std::vector<std::vector<int>>& neighbors) : n_(n_areas) {
  if (n_areas < 0) throw std::invalid_argument("negative area count");
  if (static_cast<int>(neighbors.size()) > n_areas) {
    throw std::invalid_argument("neighbor lists exceed the declared area count");
  }
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_));
  for (int i = 0; i < static_cast<int>(neighbors.size()); ++i) {
    for (int j : neighbors[static_cast<std::size_t>(i)]) {
      if (j < 0 || j >= n_) {
        throw std::invalid_argument("neighbor index " + std::to_string(j) + " out of range");
      }
      if (j == i) throw std::invalid_argument("self-loop at area " + std::to_string(i + 1));
      adj[static_cast<std::size_t>(i)].push_back(j);
      adj[static_cast<std::size_t>(j)].push_back(i);
    }
  }
  offsets_.assign(1, 0);
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    indices_.insert(indices_.end(), list.begin(), list.end());
    offsets_.push_back(static_cast<int>(indices_.size()));
  }
  edges_ = indices_.size() / 2;

  // Connected components, numbered in order of smallest member.
  component_of_.assign(static_cast<std::size_t>(n_), -1);
  components_ = 0;
  std::vector<int> stack;
  for (int s = 0; s < n_; ++s) {
    if (component_of_[static_cast<std::size_t>(s)] >= 0) continue;
    component_of_[static_cast<std::size_t>(s)] = components_;
    stack.push_back(s);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : this->neighbors(u)) {
        if (component_of_[static_cast<std::size_t>(v)] < 0) {
          component_of_[static_cast<std::size_t>(v)] = components_;
          stack.push_back(v);
        }
      }
    }
    ++components_;
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(indices_.size());
  for (int i = 0; i < n_; ++i)
    for (int j : this->neighbors(i)) triplets.emplace_back(i, j, 1.0);
  adjacency_.resize(n_, n_);
  adjacency_.setFromTriplets(triplets.begin(), triplets.end());
}

ArealMap ArealMap::from_neighbor_list(std::span<const std::pair<int, int>> rows,
                                      std::optional<int> declared_areas) {
  int n = declared_areas.value_or(0);
  for (const auto& [a, b] : rows) {
    if (a <= 0 || b <= 0) {
      throw std::invalid_argument("area indices are 1-based; got (" + std::to_string(a) + "," +
                                  std::to_string(b) + ")");
    }
    if (a == b) throw std::invalid_argument("self-loop at area " + std::to_string(a));
    n = std::max({n, a, b});
  }
  if (declared_areas && n > *declared_areas) {
    throw std::invalid_argument("neighbor list references area " + std::to_string(n) +
                                " beyond the declared " + std::to_string(*declared_areas));
  }
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& [a, b] : rows) adj[static_cast<std::size_t>(a - 1)].push_back(b - 1);
  return ArealMap(n, adj);
}

ArealMap ArealMap::grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid dimensions must be positive");
  const int n = rows * cols;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  std::vector<std::array<double, 2>> coords(static_cast<std::size_t>(n));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int i = r * cols + c;
      coords[static_cast<std::size_t>(i)] = {static_cast<double>(c), static_cast<double>(r)};
      if (c + 1 < cols) adj[static_cast<std::size_t>(i)].push_back(i + 1);
      if (r + 1 < rows) adj[static_cast<std::size_t>(i)].push_back(i + cols);
    }
  }
  ArealMap map(n, adj);
  map.set_coordinates(std::move(coords));
  return map;
}

std::span<const int> ArealMap::neighbors(int i) const {
  const auto begin = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(i)]);
  const auto end = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(i) + 1]);
  return std::span<const int>(indices_).subspan(begin, end - begin);
}

int ArealMap::degree(int i) const {
  return offsets_[static_cast<std::size_t>(i) + 1] - offsets_[static_cast<std::size_t>(i)];
}

bool ArealMap::adjacent(int i, int j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

void ArealMap::set_labels(std::vector<std::string> labels) {
  if (!labels.empty() && static_cast<int>(labels.size()) != n_) {
    throw std::invalid_argument("label count does not match area count");
  }
  labels_ = std::move(labels);
}

void ArealMap::set_coordinates(std::vector<std::array<double, 2>> coords) {
  if (!coords.empty() && static_cast<int>(coords.size()) != n_) {
    throw std::invalid_argument("coordinate count does not match area count");
  }
  coords_ = std::move(coords);
}

Eigen::MatrixXd ArealMap::distance_matrix() const {
  if (coords_.empty()) throw std::logic_error("map has no coordinates");
  Eigen::MatrixXd d(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      const double dx = coords_[static_cast<std::size_t>(i)][0] - coords_[static_cast<std::size_t>(j)][0];
      const double dy = coords_[static_cast<std::size_t>(i)][1] - coords_[static_cast<std::size_t>(j)][1];
      d(i, j) = std::hypot(dx, dy);
    }
  }
  return d;
}

const char* to_string(OrderingRule rule) {
  switch (rule) {
    case OrderingRule::ByIndex: return "by-index";
    case OrderingRule::MaxDegreeFirst: return "max-degree-first";
    case OrderingRule::UserPermutation: return "user-permutation";
  }
  return "by-index";
}

OrderingRule ordering_rule_from_string(const std::string& name) {
  if (name == "by-index") return OrderingRule::ByIndex;
  if (name == "max-degree-first") return OrderingRule::MaxDegreeFirst;
  if (name == "user-permutation") return OrderingRule::UserPermutation;
  throw std::invalid_argument("unknown ordering rule '" + name + "'");
}

DagOrdering dag_ordering(const ArealMap& map, OrderingRule rule, std::span<const int> user_order) {
  const int n = map.size();
  DagOrdering out;
  out.rule = rule;

  if (rule == OrderingRule::UserPermutation) {
    if (static_cast<int>(user_order.size()) != n) {
      throw std::invalid_argument("user ordering has wrong length");
    }
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int a : user_order) {
      if (a < 0 || a >= n || seen[static_cast<std::size_t>(a)]) {
        throw std::invalid_argument("user ordering is not a permutation of the areas");
      }
      seen[static_cast<std::size_t>(a)] = 1;
    }
    out.order.assign(user_order.begin(), user_order.end());
  } else {
    out.order.resize(static_cast<std::size_t>(n));
    std::iota(out.order.begin(), out.order.end(), 0);
    const auto& comp = map.components();
    std::stable_sort(out.order.begin(), out.order.end(), [&](int a, int b) {
      if (comp[static_cast<std::size_t>(a)] != comp[static_cast<std::size_t>(b)]) {
        return comp[static_cast<std::size_t>(a)] < comp[static_cast<std::size_t>(b)];
      }
      if (rule == OrderingRule::MaxDegreeFirst && map.degree(a) != map.degree(b)) {
        return map.degree(a) > map.degree(b);
      }
      return a < b;
    });
  }

  out.rank.assign(static_cast<std::size_t>(n), 0);
  for (int r = 0; r < n; ++r) out.rank[static_cast<std::size_t>(out.order[static_cast<std::size_t>(r)])] = r;
  out.directed_neighbors.assign(static_cast<std::size_t>(n), {});
  for (int i = 0; i < n; ++i) {
    for (int j : map.neighbors(i)) {
      if (out.rank[static_cast<std::size_t>(j)] < out.rank[static_cast<std::size_t>(i)]) {
        out.directed_neighbors[static_cast<std::size_t>(i)].push_back(j);
      }
    }
  }
  return out;
}

int boundary_length(const ArealMap& map, std::span<const int> areas) {
  std::vector<char> inside(static_cast<std::size_t>(map.size()), 0);
  for (int a : areas) inside[static_cast<std::size_t>(a)] = 1;
  int ell = 0;
  for (int a : areas)
    for (int b : map.neighbors(a))
      if (!inside[static_cast<std::size_t>(b)]) ++ell;
  return ell;
}

int boundary_length(const ArealMap& map, const Partition& partition, int block) {
  if (block < 0 || block >= partition.block_count()) {
    throw std::invalid_argument("block index out of range");
  }
  int ell = 0;
  for (int i = 0; i < map.size(); ++i) {
    if (partition.label(i) != block) continue;
    for (int j : map.neighbors(i))
      if (partition.label(j) != block) ++ell;
  }
  return ell;
}

int between_block_edges(const ArealMap& map, const Partition& partition) {
  int count = 0;
  for (int i = 0; i < map.size(); ++i)
    for (int j : map.neighbors(i))
      if (j > i && partition.label(i) != partition.label(j)) ++count;
  return count;
}

}  // namespace stppm
