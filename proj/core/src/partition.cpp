#include "stppm/partition.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace stppm {

std::vector<int> canonical_labels(std::span<const int> labels) {
  std::unordered_map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

Partition Partition::from_labels(std::span<const int> labels) {
  Partition p;
  p.labels_ = canonical_labels(labels);
  p.k_ = 0;
  for (int l : p.labels_) p.k_ = std::max(p.k_, l + 1);
  return p;
}

Partition Partition::single_block(int n) {
  Partition p;
  p.labels_.assign(static_cast<std::size_t>(n), 0);
  p.k_ = n > 0 ? 1 : 0;
  return p;
}

Partition Partition::singletons(int n) {
  Partition p;
  p.labels_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p.labels_[static_cast<std::size_t>(i)] = i;
  p.k_ = n;
  return p;
}

std::vector<std::vector<int>> Partition::blocks() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(k_));
  for (int i = 0; i < size(); ++i) out[static_cast<std::size_t>(labels_[static_cast<std::size_t>(i)])].push_back(i);
  return out;
}

std::vector<int> Partition::block_sizes() const {
  std::vector<int> out(static_cast<std::size_t>(k_), 0);
  for (int l : labels_) ++out[static_cast<std::size_t>(l)];
  return out;
}

std::vector<int> Partition::block(int j) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (labels_[static_cast<std::size_t>(i)] == j) out.push_back(i);
  return out;
}

namespace {

struct Contingency {
  std::vector<int> rows;
  std::vector<int> cols;
  std::map<std::pair<int, int>, int> cells;
  int n = 0;
};

Contingency contingency(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw std::invalid_argument("partitions have different sizes");
  Contingency c;
  c.n = a.size();
  c.rows = a.block_sizes();
  c.cols = b.block_sizes();
  for (int i = 0; i < a.size(); ++i) ++c.cells[{a.label(i), b.label(i)}];
  return c;
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

double entropy_of(const std::vector<int>& sizes, int n) {
  double h = 0.0;
  for (int s : sizes) {
    if (s == 0) continue;
    const double p = static_cast<double>(s) / n;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

double adjusted_rand_index(const Partition& a, const Partition& b) {
  const Contingency c = contingency(a, b);
  double index = 0.0;
  for (const auto& [key, count] : c.cells) index += choose2(count);
  double sum_a = 0.0;
  for (int s : c.rows) sum_a += choose2(s);
  double sum_b = 0.0;
  for (int s : c.cols) sum_b += choose2(s);
  const double total = choose2(c.n);
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return a == b ? 1.0 : 0.0;
  return (index - expected) / (max_index - expected);
}

double partition_entropy(const Partition& p) { return entropy_of(p.block_sizes(), p.size()); }

double vi_distance(const Partition& a, const Partition& b) {
  const Contingency c = contingency(a, b);
  if (c.n == 0) return 0.0;
  const double n = c.n;
  double mutual = 0.0;
  for (const auto& [key, count] : c.cells) {
    const double pij = count / n;
    const double pi = c.rows[static_cast<std::size_t>(key.first)] / n;
    const double pj = c.cols[static_cast<std::size_t>(key.second)] / n;
    mutual += pij * std::log(pij / (pi * pj));
  }
  const double vi = entropy_of(c.rows, c.n) + entropy_of(c.cols, c.n) - 2.0 * mutual;
  // Identical partitions must give exactly zero, not rounding residue.
  if (a == b) return 0.0;
  return std::max(vi, 0.0);
}

}  // namespace stppm
