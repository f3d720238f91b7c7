#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stppm/arealgraph.hpp"
#include "stppm/cohesion.hpp"
#include "stppm/criteria.hpp"
#include "stppm/model.hpp"
#include "stppm/partition.hpp"
#include "stppm/temporal.hpp"

namespace stppm {

/// Data-generating setup on a lattice map. Cluster coefficients are shared
/// by every disease unless `gamma` already has qD columns.
struct Scenario {
  int grid_rows = 7;
  int grid_cols = 10;
  Partition truth;
  Eigen::MatrixXd gamma;           ///< k x q (shared) or k x qD
  std::vector<Eigen::VectorXd> beta;  ///< per disease, length p
  double sigma2 = 0.001;
  LagSpec lags;
  int times = 120;
  int diseases = 2;
  Eigen::VectorXd alpha;           ///< spatial decay per disease
  Eigen::MatrixXd omega;           ///< bridge_pair_count(D) x 2
  double spatial_scale = 1e-5;     ///< phi ~ N(0, spatial_scale V)
  int warmup = 200;
  int season_period = 24;          ///< high season = first half of each period
  double covariate_variance = 0.5;
  std::uint64_t seed = 1;
  std::uint64_t covariate_seed = 7;
};

/// Lattice partition used as truth: k vertical strips of near-equal width,
/// except k = 4 which uses quadrants.
Partition grid_truth_partition(int rows, int cols, int k);

/// Simulation 1: AR(3) plus a 24-lag seasonal term, k in 1..4, the
/// cluster rows of the first k coefficient rows.
Scenario simulation1_scenario(int k, int rows, int cols, std::uint64_t seed);
/// Simulation 2: AR(2), k in 1..3.
Scenario simulation2_scenario(int k, int rows, int cols, std::uint64_t seed);

struct SyntheticDataset {
  ObservationPanel panel;
  ArealMap map;
  ModelState truth;   ///< generating parameters (gamma, sigma2, beta, phi, partition)
  int spd_adjustments = 0;  ///< eigenvalue floors applied to the spatial law
};

/// Generates covariates (season indicator, N(0, v) noise), spatial effects
/// from the power-of-distance law and outcomes by the model recursion after a
/// discarded warm-up. Throws NumericalError if the recursion overflows.
SyntheticDataset generate(const Scenario& scenario);

/// Covariance-like matrix alpha^{distance}, projected to SPD (eigenvalue
/// floor 1e-10) when needed; returns the number of eigenvalues raised.
int distance_power_matrix(const Eigen::MatrixXd& distances, double alpha, Eigen::MatrixXd& out);

struct StudyConfig {
  std::string name;
  CohesionSpec cohesion;
};

struct StudyOptions {
  int study = 1;       ///< 1: partition recovery, 2: fit and holdout prediction
  int clusters = 2;
  int datasets = 1;
  int grid_rows = 7;
  int grid_cols = 10;
  int holdout = 20;    ///< study 2 only
  std::vector<StudyConfig> configs;
  Schedule schedule;
  std::uint64_t seed = 1;
  int vi_restarts = 16;
};

struct StudyRow {
  int dataset = 0;
  std::string config;
  bool ok = false;
  std::string error;
  double ari = 0.0;
  int clusters_estimated = 0;
  double rmse = 0.0;
  FitReport fit;
  double holdout_rmse = 0.0;      ///< study 2, recursive multi-step forecast
  double holdout_rmse_one_step = 0.0;  ///< study 2, one-step-ahead with observed lags
  double holdout_coverage = 0.0;  ///< study 2, 95% intervals
};

struct StudySummary {
  std::vector<StudyRow> rows;
  std::vector<std::string> configs;
  std::vector<int> best_ari_count;  ///< ties credit every tied config
  std::vector<double> mean_ari;
  std::vector<double> mean_rmse;
};

/// Hyperparameters used by the simulation fits (informative settings of the
/// corresponding study design).
Hyperparameters study_hyperparameters(int study, const ModelDims& dims,
                                      const CohesionSpec& cohesion);

/// Fits every config to every replica. A failing fit is recorded in its row
/// and does not stop the batch.
StudySummary replicate_study(const StudyOptions& options);

}  // namespace stppm
