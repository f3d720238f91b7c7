#pragma once

#include <optional>

#include <Eigen/Core>

#include "stppm/gibbs.hpp"
#include "stppm/model.hpp"
#include "stppm/partition.hpp"

namespace stppm {

struct FitReport {
  double log_likelihood = 0.0;       ///< at the plug-in state
  double mean_log_likelihood = 0.0;  ///< posterior mean over draws
  double rmse = 0.0;
  int p_total = 0;
  double aic = 0.0;
  double bic = 0.0;
  std::optional<double> p_dic;
  std::optional<double> dic;
  std::optional<double> p_waic;
  std::optional<double> waic;
  std::optional<double> lppd;
  long n_obs = 0;
};

/// Log density of every usable observation under one state, ordered (i, t, d)
/// with d fastest.
Eigen::VectorXd observation_loglik(const ModelState& state, const ModelContext& ctx);

/// Draws x observations matrix of observation_loglik rows.
Eigen::MatrixXd pointwise_loglik(const PosteriorChain& chain, const ModelContext& ctx);

/// AIC and BIC from the plug-in log-likelihood; DIC and WAIC from the
/// pointwise matrix. With a single draw DIC and WAIC are left empty.
///   p_DIC  = 2 (logL(plug-in) - mean_s logL_s)
///   lppd   = sum_obs log mean_s exp(ll)
///   p_WAIC = sum_obs sample variance_s(ll)
FitReport information_criteria(const Eigen::MatrixXd& pointwise,
                               const Eigen::VectorXd& plugin_pointwise, int p_total);

/// Root mean squared residual of posterior-mean fitted values over the usable range.
double rmse(const PosteriorChain& chain, const ModelContext& ctx);

/// Parameter count at a point estimate: beta, gamma*, sigma*^2, phi, omega,
/// alpha, sigma^2_phi, xi, mu_gamma and the free entries of Sigma_gamma.
int count_parameters(const ModelDims& dims, int clusters);

/// For each block of `reference`, the block of `draw` with the largest
/// overlap (ties to the lowest label).
std::vector<int> match_clusters(const Partition& reference, const Partition& draw);

/// Posterior means of the continuous parameters, with cluster-specific
/// parameters averaged after matching every draw's blocks to `estimate`.
ModelState plugin_state(const PosteriorChain& chain, const Partition& estimate);

/// Convenience: pointwise matrix, plug-in state, criteria and RMSE together.
FitReport evaluate_fit(const PosteriorChain& chain, const ModelContext& ctx,
                       const Partition& estimate);

}  // namespace stppm
