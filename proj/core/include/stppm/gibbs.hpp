#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "stppm/arealgraph.hpp"
#include "stppm/dagar.hpp"
#include "stppm/distributions.hpp"
#include "stppm/model.hpp"
#include "stppm/random.hpp"
#include "stppm/temporal.hpp"

namespace stppm {

/// Sums over the usable time range for one (area, disease) cell. Every
/// conditional of the sampler is expressed through these, so a sweep costs
/// O(n D (p + q)^2) regardless of T.
struct AreaStats {
  Eigen::MatrixXd zz;     ///< sum Z Z^T      (q x q)
  Eigen::MatrixXd zx;     ///< sum Z X^T      (q x p)
  Eigen::MatrixXd xx;     ///< sum X X^T      (p x p)
  Eigen::VectorXd z_sum;  ///< sum Z
  Eigen::VectorXd x_sum;  ///< sum X
  Eigen::VectorXd zy;     ///< sum Z y
  Eigen::VectorXd xy;     ///< sum X y
  double yy = 0.0;
  double y_sum = 0.0;
};

/// Data-derived, read-only inputs of a chain: panel, map, DAG ordering,
/// lag design, hyperparameters and the per-cell sufficient statistics.
class ModelContext {
 public:
  ModelContext(ObservationPanel panel, ArealMap map, LagSpec lags, Hyperparameters hyper,
               OrderingRule rule = OrderingRule::ByIndex, std::vector<int> user_order = {});

  const ObservationPanel& panel() const noexcept { return panel_; }
  const ArealMap& map() const noexcept { return map_; }
  const DagOrdering& ordering() const noexcept { return ordering_; }
  const TemporalDesign& design() const noexcept { return design_; }
  const Hyperparameters& hyper() const noexcept { return hyper_; }
  const ModelDims& dims() const noexcept { return dims_; }
  int usable_count() const noexcept { return design_.usable_count(); }

  const AreaStats& stats(int i, int d) const {
    return stats_[static_cast<std::size_t>(i) * static_cast<std::size_t>(dims_.diseases) +
                  static_cast<std::size_t>(d)];
  }

  const Eigen::MatrixXd& beta_precision() const noexcept { return beta_precision_; }
  const Eigen::MatrixXd& mu_precision() const noexcept { return mu_precision_; }
  const Eigen::Matrix2d& omega_precision() const noexcept { return omega_precision_; }

  /// Swaps in new outcomes of the same shape and recomputes design and statistics.
  void replace_outcomes(const ObservationPanel& panel);

 private:
  void compute_stats();

  ObservationPanel panel_;
  ArealMap map_;
  DagOrdering ordering_;
  LagSpec lags_;
  TemporalDesign design_;
  Hyperparameters hyper_;
  ModelDims dims_;
  std::vector<AreaStats> stats_;
  Eigen::MatrixXd beta_precision_;
  Eigen::MatrixXd mu_precision_;
  Eigen::Matrix2d omega_precision_;
};

/// Components of the unnormalized log joint posterior density.
struct LogJoint {
  double likelihood = 0.0;
  double beta = 0.0;
  double gamma_star = 0.0;
  double mu_gamma = 0.0;
  double sigma_gamma = 0.0;
  double phi = 0.0;
  double omega = 0.0;
  double alpha = 0.0;
  double sigma2_phi = 0.0;
  double sigma2_star = 0.0;
  double xi = 0.0;
  double partition = 0.0;

  double total() const noexcept {
    return likelihood + beta + gamma_star + mu_gamma + sigma_gamma + phi + omega + alpha +
           sigma2_phi + sigma2_star + xi + partition;
  }
};

/// Direct evaluation (residual by residual, no sufficient statistics).
LogJoint log_joint(const ModelState& state, const ModelContext& ctx);
double log_likelihood(const ModelState& state, const ModelContext& ctx);

/// Fitted mean X^T beta_d + Z^T gamma*_{c_i d} + phi_id at a usable time.
double fitted_mean(const ModelState& state, const ModelContext& ctx, int i, int t, int d);

// ---------------------------------------------------------------------------
// Full conditionals, one per sweep step. Each update_* draws from the
// corresponding *_conditional and writes the block back.

/// xi | . ~ Gamma(a_xi + k D nu, b_xi + sum_{j,d} nu / sigma*^2_{jd}).
GammaParams xi_conditional(const ModelState& state, const ModelContext& ctx);
GaussianCanonical mu_gamma_conditional(const ModelState& state, const ModelContext& ctx);
/// inv-Wishart(df + k, S + sum_j (gamma*_j - mu)(gamma*_j - mu)^T).
InvWishartParams sigma_gamma_conditional(const ModelState& state, const ModelContext& ctx);
/// inv-Gamma(n_j T_eff / 2 + nu, SS_{jd} / 2 + nu xi), SS over areas of block j only.
InvGammaParams cluster_variance_conditional(const ModelState& state, const ModelContext& ctx,
                                            int cluster, int disease);
GaussianCanonical gamma_star_conditional(const ModelState& state, const ModelContext& ctx,
                                         int cluster);
/// Bridge coefficients of disease d >= 1 stacked over d' < d (2d entries).
GaussianCanonical omega_conditional(const ModelState& state, const ModelContext& ctx, int disease);
InvGammaParams sigma_phi_conditional(const ModelState& state, const ModelContext& ctx,
                                     int disease);
/// Log target of logit(alpha_d) up to a constant: DAGAR density of phi_d,
/// Beta prior and the Jacobian alpha (1 - alpha).
double alpha_log_target(const ModelState& state, const ModelContext& ctx, int disease,
                        double logit_alpha);
SparseGaussianCanonical phi_conditional(const ModelState& state, const ModelContext& ctx,
                                        int disease);
GaussianCanonical beta_conditional(const ModelState& state, const ModelContext& ctx);

/// Parameters of one cluster: gamma* (qD) and sigma*^2 (D).
struct ClusterParams {
  Eigen::VectorXd gamma;
  Eigen::VectorXd sigma2;
};

/// Draw from the cluster-parameter base measure N(mu_gamma, Sigma_gamma) x inv-Gamma(nu, nu xi).
ClusterParams draw_cluster_prior(const ModelState& state, const ModelContext& ctx, Rng& rng);

/// sum_{t,d} log N(y_itd; X beta_d + Z gamma_d + phi_id, sigma2_d) for one area.
double area_log_likelihood(const ModelState& state, const ModelContext& ctx, int area,
                           const Eigen::VectorXd& gamma, const Eigen::VectorXd& sigma2);

/// Log allocation weights for `area` given the other labels. The first
/// state.clusters() entries correspond to the current blocks (-inf for the
/// area's own block if it would be empty after removal); the remaining
/// entries are the auxiliary components, each carrying the new-block prior
/// term divided by aux.size().
std::vector<double> allocation_log_weights(const ModelState& state, const ModelContext& ctx,
                                           int area, std::span<const ClusterParams> aux);

void update_xi(ModelState& state, const ModelContext& ctx, Rng& rng);
void update_mu_gamma(ModelState& state, const ModelContext& ctx, Rng& rng);
void update_sigma_gamma(ModelState& state, const ModelContext& ctx, Rng& rng);
/// Auxiliary-variable (Neal's Algorithm 8) sweep over all areas. Empty
/// blocks are dropped and cluster arrays are kept aligned with the canonical labels.
void update_partition(ModelState& state, const ModelContext& ctx, Rng& rng);
void update_cluster_variances(ModelState& state, const ModelContext& ctx, Rng& rng);
void update_gamma_star(ModelState& state, const ModelContext& ctx, Rng& rng);
void update_omega(ModelState& state, const ModelContext& ctx, Rng& rng);
void update_sigma_phi(ModelState& state, const ModelContext& ctx, Rng& rng);
void update_phi(ModelState& state, const ModelContext& ctx, Rng& rng);
void update_beta(ModelState& state, const ModelContext& ctx, Rng& rng);

/// Random-walk scale for the alpha updates. Robbins-Monro on the log step
/// during burn-in, frozen afterwards.
class AlphaAdapter {
 public:
  AlphaAdapter(int diseases, double initial_step, double target);

  double step(int d) const { return std::exp(log_step_[d]); }
  bool frozen() const noexcept { return frozen_; }
  /// Stops adaptation and restarts the acceptance counters.
  void freeze() noexcept;
  /// Records one proposal; adapts the step while not frozen.
  void record(int d, double accept_prob, bool accepted);
  /// Acceptance rate since freezing (or overall if never frozen).
  Eigen::VectorXd acceptance_rates() const;
  Eigen::VectorXd steps() const;

 private:
  Eigen::VectorXd log_step_;
  double target_;
  bool frozen_ = false;
  std::vector<long> adapt_count_;
  std::vector<long> proposals_;
  std::vector<long> accepted_;
};

void update_alpha(ModelState& state, const ModelContext& ctx, AlphaAdapter& adapter, Rng& rng);

/// One chain: the strictly ordered sweep xi, mu_gamma, Sigma_gamma, partition,
/// sigma*^2, gamma*, omega, sigma^2_phi, alpha, phi, beta.
class GibbsSampler {
 public:
  GibbsSampler(const ModelContext& ctx, ModelState initial, std::uint64_t seed);

  /// Runs one sweep; throws NumericalError (with a state dump) if any
  /// factorization fails.
  void sweep();
  const ModelState& state() const noexcept { return state_; }
  ModelState& state() noexcept { return state_; }
  AlphaAdapter& adapter() noexcept { return adapter_; }
  Rng& rng() noexcept { return rng_; }

 private:
  const ModelContext& ctx_;
  ModelState state_;
  Rng rng_;
  AlphaAdapter adapter_;
};

/// Runs the sampler for the schedule. Deterministic given the seed; the
/// alpha step adapts during burn-in only.
PosteriorChain run_chain(const ModelContext& ctx, const Schedule& schedule, std::uint64_t seed,
                         std::optional<ModelState> initial = std::nullopt);

/// Draw of every parameter from its prior with the partition held fixed.
ModelState sample_prior_given_partition(const ModelContext& ctx, const Partition& partition,
                                        Rng& rng);

}  // namespace stppm
