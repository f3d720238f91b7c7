#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Core>

#include "stppm/partition.hpp"

namespace stppm {

/// Posterior similarity matrix: fraction of samples in which i and j share a block.
Eigen::MatrixXd coclustering_matrix(std::span<const Partition> samples);

/// Lower bound of the posterior expected VI loss of `candidate` computed from
/// pairwise co-clustering probabilities (Wade & Ghahramani), in nats.
double expected_vi_lower_bound(const Partition& candidate, const Eigen::MatrixXd& coclustering);

/// Monte Carlo expected VI: mean of vi_distance(candidate, s) over samples.
double expected_vi_exact(const Partition& candidate, std::span<const Partition> samples);

enum class ViLoss { LowerBound, Exact };

struct ViSearchOptions {
  int restarts = 16;
  std::uint64_t seed = 0;
  int max_sweeps = 100;
  ViLoss loss = ViLoss::LowerBound;
};

struct ViEstimate {
  Partition partition;
  double expected_loss = 0.0;
  int restarts_run = 0;
};

/// Stochastic greedy search for the partition minimizing expected VI loss:
/// each restart allocates items sequentially in a random order and then sweeps
/// single-item reassignments to a local optimum. Every distinct sampled
/// partition is also scored, so the result is never worse than the best
/// sample. Ties go to the lexicographically smallest canonical labeling.
///
/// With ViLoss::Exact the final candidates are re-scored and refined with the
/// Monte Carlo loss; this is slow and meant for verification.
ViEstimate estimate_partition_vi(std::span<const Partition> samples,
                                 const ViSearchOptions& options = {});

}  // namespace stppm
