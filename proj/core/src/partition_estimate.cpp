#include "stppm/partition_estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "stppm/random.hpp"

namespace stppm {

Eigen::MatrixXd coclustering_matrix(std::span<const Partition> samples) {
  if (samples.empty()) throw std::invalid_argument("no partition samples");
  const int n = samples.front().size();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  for (const auto& s : samples) {
    if (s.size() != n) throw std::invalid_argument("partition samples differ in size");
    for (const auto& block : s.blocks())
      for (int a : block)
        for (int b : block) counts(a, b) += 1.0;
  }
  return counts / static_cast<double>(samples.size());
}

double expected_vi_lower_bound(const Partition& candidate, const Eigen::MatrixXd& psm) {
  const int n = candidate.size();
  if (psm.rows() != n || psm.cols() != n) {
    throw std::invalid_argument("co-clustering matrix does not match the partition size");
  }
  const auto sizes = candidate.block_sizes();
  double total = 0.0;
  for (int u = 0; u < n; ++u) {
    double same = 0.0;
    double all = 0.0;
    for (int v = 0; v < n; ++v) {
      all += psm(u, v);
      if (candidate.label(v) == candidate.label(u)) same += psm(u, v);
    }
    total += std::log(static_cast<double>(sizes[static_cast<std::size_t>(candidate.label(u))])) -
             2.0 * std::log(same) + std::log(all);
  }
  return total / n;
}

double expected_vi_exact(const Partition& candidate, std::span<const Partition> samples) {
  if (samples.empty()) throw std::invalid_argument("no partition samples");
  double total = 0.0;
  for (const auto& s : samples) total += vi_distance(candidate, s);
  return total / static_cast<double>(samples.size());
}

namespace {

constexpr double kImprovement = 1e-12;
constexpr double kTie = 1e-10;

// Allocation state for the greedy search. For item u in block c, the loss
// term is log|c| - 2 log sum_{v in c} p_uv (the row sums of the PSM do not
// depend on the allocation). mass(u, b) = sum_{v in b} p_uv.
class Allocation {
 public:
  explicit Allocation(const Eigen::MatrixXd& psm)
      : psm_(psm), n_(static_cast<int>(psm.rows())), label_(static_cast<std::size_t>(n_), -1),
        size_(static_cast<std::size_t>(n_), 0), mass_(Eigen::MatrixXd::Zero(n_, n_)) {}

  int label(int i) const { return label_[static_cast<std::size_t>(i)]; }

  void remove(int i) {
    const int a = label(i);
    for (int u = 0; u < n_; ++u) mass_(u, a) -= psm_(u, i);
    --size_[static_cast<std::size_t>(a)];
    label_[static_cast<std::size_t>(i)] = -1;
  }

  void add(int i, int b) {
    for (int u = 0; u < n_; ++u) mass_(u, b) += psm_(u, i);
    ++size_[static_cast<std::size_t>(b)];
    label_[static_cast<std::size_t>(i)] = b;
  }

  // Change in the summed loss terms when unallocated item i joins block b.
  double join_cost(int i, int b) const {
    const int sz = size_[static_cast<std::size_t>(b)];
    double delta = term(sz + 1, mass_(i, b) + psm_(i, i));
    if (sz == 0) return delta;
    for (int u = 0; u < n_; ++u) {
      if (label_[static_cast<std::size_t>(u)] != b) continue;
      delta += term(sz + 1, mass_(u, b) + psm_(u, i)) - term(sz, mass_(u, b));
    }
    return delta;
  }

  int empty_block() const {
    for (int b = 0; b < n_; ++b)
      if (size_[static_cast<std::size_t>(b)] == 0) return b;
    return -1;
  }

  // Best block for unallocated item i: (block, cost). Existing blocks first in
  // index order, then one empty block; strict improvement needed to switch.
  std::pair<int, double> best_block(int i) const {
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int b = 0; b < n_; ++b) {
      if (size_[static_cast<std::size_t>(b)] == 0) continue;
      const double c = join_cost(i, b);
      if (c < best_cost - kImprovement) {
        best = b;
        best_cost = c;
      }
    }
    const int e = empty_block();
    if (e >= 0) {
      const double c = join_cost(i, e);
      if (c < best_cost - kImprovement) {
        best = e;
        best_cost = c;
      }
    }
    return {best, best_cost};
  }

  Partition partition() const { return Partition::from_labels(label_); }

 private:
  static double term(int size, double mass) {
    return std::log(static_cast<double>(size)) - 2.0 * std::log(mass);
  }

  const Eigen::MatrixXd& psm_;
  int n_;
  std::vector<int> label_;
  std::vector<int> size_;
  Eigen::MatrixXd mass_;
};

Partition greedy_restart(const Eigen::MatrixXd& psm, Rng& rng, int max_sweeps) {
  const int n = static_cast<int>(psm.rows());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());

  Allocation alloc(psm);
  // Sequential allocation against the items placed so far.
  for (int i : order) alloc.add(i, alloc.best_block(i).first);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool moved = false;
    for (int i : order) {
      const int from = alloc.label(i);
      alloc.remove(i);
      const double stay = alloc.join_cost(i, from);
      const auto [to, cost] = alloc.best_block(i);
      if (to != from && cost < stay - kImprovement) {
        alloc.add(i, to);
        moved = true;
      } else {
        alloc.add(i, from);
      }
    }
    if (!moved) break;
  }
  return alloc.partition();
}

// Greedy single-item moves under the Monte Carlo loss.
Partition exact_refine(Partition start, std::span<const Partition> samples, int max_sweeps) {
  const int n = start.size();
  std::vector<int> labels(start.labels().begin(), start.labels().end());
  double current = expected_vi_exact(start, samples);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool moved = false;
    for (int i = 0; i < n; ++i) {
      const int from = labels[static_cast<std::size_t>(i)];
      const int k = *std::max_element(labels.begin(), labels.end()) + 1;
      int best_label = from;
      double best = current;
      for (int b = 0; b <= k; ++b) {
        if (b == from) continue;
        labels[static_cast<std::size_t>(i)] = b;
        const double loss = expected_vi_exact(Partition::from_labels(labels), samples);
        if (loss < best - kImprovement) {
          best = loss;
          best_label = b;
        }
      }
      labels[static_cast<std::size_t>(i)] = best_label;
      if (best_label != from) {
        labels = canonical_labels(labels);
        current = best;
        moved = true;
      }
    }
    if (!moved) break;
  }
  return Partition::from_labels(labels);
}

struct Scored {
  Partition partition;
  double loss;
};

bool better(const Scored& a, const Scored& b) {
  if (a.loss < b.loss - kTie) return true;
  if (a.loss > b.loss + kTie) return false;
  return a.partition < b.partition;
}

}  // namespace

ViEstimate estimate_partition_vi(std::span<const Partition> samples,
                                 const ViSearchOptions& options) {
  if (samples.empty()) throw std::invalid_argument("no partition samples");
  if (options.restarts < 0) throw std::invalid_argument("negative restart count");
  const Eigen::MatrixXd psm = coclustering_matrix(samples);

  std::set<Partition> candidates(samples.begin(), samples.end());
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng(Rng::derive_seed(options.seed, static_cast<std::uint64_t>(r)));
    candidates.insert(greedy_restart(psm, rng, options.max_sweeps));
  }

  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (const auto& c : candidates) scored.push_back({c, expected_vi_lower_bound(c, psm)});
  std::sort(scored.begin(), scored.end(), better);

  ViEstimate out;
  out.restarts_run = options.restarts;
  if (options.loss == ViLoss::LowerBound) {
    out.partition = scored.front().partition;
    out.expected_loss = scored.front().loss;
    return out;
  }

  // Exact mode: re-score every candidate, then refine the best.
  std::vector<Scored> exact;
  exact.reserve(scored.size());
  for (const auto& s : scored) exact.push_back({s.partition, expected_vi_exact(s.partition, samples)});
  std::sort(exact.begin(), exact.end(), better);
  Scored best = exact.front();
  const Partition refined = exact_refine(best.partition, samples, options.max_sweeps);
  const Scored candidate{refined, expected_vi_exact(refined, samples)};
  if (better(candidate, best)) best = candidate;
  out.partition = best.partition;
  out.expected_loss = best.loss;
  return out;
}

}  // namespace stppm
