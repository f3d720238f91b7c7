#pragma once

#include <compare>
#include <span>
#include <vector>

namespace stppm {

/// A partition of n items (areas) into k blocks.
///
/// Labels are always canonical: 0-based and numbered in order of first
/// appearance, so two partitions that differ only by relabeling compare equal
/// and the lexicographic order on label sequences is a total order on
/// partitions (used for deterministic tie-breaking).
class Partition {
 public:
  Partition() = default;

  /// Canonicalizes arbitrary integer labels.
  static Partition from_labels(std::span<const int> labels);
  static Partition single_block(int n);
  static Partition singletons(int n);

  int size() const noexcept { return static_cast<int>(labels_.size()); }
  int block_count() const noexcept { return k_; }
  int label(int i) const { return labels_[static_cast<std::size_t>(i)]; }
  std::span<const int> labels() const noexcept { return labels_; }

  std::vector<std::vector<int>> blocks() const;
  std::vector<int> block_sizes() const;
  std::vector<int> block(int j) const;

  friend bool operator==(const Partition&, const Partition&) = default;
  friend auto operator<=>(const Partition& a, const Partition& b) { return a.labels_ <=> b.labels_; }

 private:
  std::vector<int> labels_;
  int k_ = 0;
};

/// First-appearance relabeling of an arbitrary label sequence.
std::vector<int> canonical_labels(std::span<const int> labels);

/// Hubert-Arabie adjusted Rand index. Two degenerate partitions that agree
/// exactly (both one block, or both all singletons) score 1.
double adjusted_rand_index(const Partition& a, const Partition& b);

/// Variation of information in nats: H(a) + H(b) - 2 I(a, b).
double vi_distance(const Partition& a, const Partition& b);

/// Entropy (nats) of the block-size distribution.
double partition_entropy(const Partition& p);

}  // namespace stppm
