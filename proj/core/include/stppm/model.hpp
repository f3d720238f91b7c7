#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stppm/cohesion.hpp"
#include "stppm/dagar.hpp"
#include "stppm/partition.hpp"
#include "stppm/temporal.hpp"

namespace stppm {

struct ModelDims {
  int areas = 0;      ///< n
  int times = 0;      ///< T (outcome rows, including the lag warm-up)
  int diseases = 0;   ///< D
  int covariates = 0; ///< p
  int lags = 0;       ///< q

  int beta_size() const noexcept { return covariates * diseases; }
  int gamma_size() const noexcept { return lags * diseases; }

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Prior hyperparameters plus sampler tuning constants.
struct Hyperparameters {
  Eigen::VectorXd beta_mean;       ///< mu_beta (pD)
  Eigen::MatrixXd beta_cov;        ///< Sigma_beta
  double nu = 2.0;                 ///< sigma*^2 | xi ~ inv-Gamma(nu, nu xi)
  double xi_shape = 1.0;           ///< xi ~ Gamma(a_xi, b_xi), rate form
  double xi_rate = 2.0;
  CohesionSpec cohesion = CohesionSpec::hb(0.35);
  Eigen::VectorXd mu_mean;         ///< mu_mu (qD)
  Eigen::MatrixXd mu_cov;          ///< Sigma_mu
  double iw_df = 0.0;              ///< df
  Eigen::MatrixXd iw_scale;        ///< S
  Eigen::Vector2d omega_mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d omega_cov = Eigen::Matrix2d::Identity();
  double alpha_a = 300.0;          ///< alpha_d ~ Beta(a, b)
  double alpha_b = 300.0;
  double phi_shape = 2.0;          ///< sigma^2_phi ~ inv-Gamma(a_phi, b_phi)
  double phi_scale = 0.1;
  int aux_components = 3;          ///< m in the auxiliary-variable partition update
  double alpha_target_acceptance = 0.44;
  double alpha_initial_step = 0.5; ///< initial random-walk sd on logit(alpha)

  /// Defaults with the given dimensions: mu_beta = 0, Sigma_beta = I,
  /// mu_mu = 0, Sigma_mu = I, S = 0.1 I, df = max(2(q + 1), qD + 2).
  static Hyperparameters defaults(const ModelDims& dims);

  /// Throws std::invalid_argument on wrong sizes, non-SPD matrices, df <= qD - 1,
  /// nonpositive shapes/scales or an invalid cohesion.
  void validate(const ModelDims& dims) const;
};

/// One point of the parameter space.
struct ModelState {
  Eigen::VectorXd beta;          ///< pD, disease-major blocks of p
  Eigen::MatrixXd gamma;         ///< k x qD, row j = gamma*_j, disease-major blocks of q
  Eigen::VectorXd mu_gamma;      ///< qD
  Eigen::MatrixXd sigma_gamma;   ///< qD x qD
  Partition partition;
  Eigen::MatrixXd phi;           ///< n x D
  Eigen::MatrixXd omega;         ///< pairs x 2
  Eigen::VectorXd alpha;         ///< D
  Eigen::VectorXd sigma2_phi;    ///< D
  Eigen::MatrixXd sigma2;        ///< k x D, sigma*^2_{jd}
  double xi = 1.0;

  int clusters() const noexcept { return partition.block_count(); }
  SpatialState spatial() const;
  void set_spatial(const SpatialState& s);

  /// Initial state: one cluster, beta and mu_gamma and gamma* at prior means,
  /// phi = 0, alpha = 0.5, sigma*^2 = xi = 1, omega at its prior mean,
  /// Sigma_gamma at the inv-Wishart mean when defined (else S), sigma^2_phi = 1.
  static ModelState initial(const ModelDims& dims, const Hyperparameters& hyper);

  /// Shape and range checks; throws std::invalid_argument.
  void validate(const ModelDims& dims) const;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

/// Human-readable dump used in numerical-failure diagnostics.
std::string describe(const ModelState& state);

/// Iteration schedule. Iterations are 1-based; iteration it is saved when
/// it > burnin and (it - burnin) % thin == 0.
struct Schedule {
  int iterations = 20000;
  int burnin = 10000;
  int thin = 10;

  int saved_count() const noexcept;
  bool saves(int iteration) const noexcept;
  /// iterations >= 0, 0 <= burnin <= iterations (burnin < iterations when iterations > 0), thin >= 1.
  void validate() const;
};

struct PosteriorChain {
  ModelDims dims;
  LagSpec lags;
  Schedule schedule;
  std::uint64_t seed = 0;
  OrderingRule ordering_rule = OrderingRule::ByIndex;
  std::vector<int> iterations;        ///< iteration stamp of each saved state
  std::vector<ModelState> states;
  std::vector<double> log_posterior;  ///< unnormalized log joint at each saved state
  Eigen::VectorXd alpha_acceptance;   ///< post-burn-in acceptance rate per disease
  Eigen::VectorXd alpha_step;         ///< frozen random-walk sd per disease

  std::size_t size() const noexcept { return states.size(); }
  bool empty() const noexcept { return states.empty(); }
};

}  // namespace stppm
