#include "stppm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "stppm/errors.hpp"
#include "stppm/forecast.hpp"
#include "stppm/gibbs.hpp"
#include "stppm/partition_estimate.hpp"
#include "stppm/random.hpp"

namespace stppm {

Partition grid_truth_partition(int rows, int cols, int k) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid dimensions must be positive");
  if (k < 1 || k > rows * cols) throw std::invalid_argument("cluster count out of range");
  std::vector<int> labels(static_cast<std::size_t>(rows * cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      int label;
      if (k == 4 && rows >= 2 && cols >= 2) {
        label = (r < rows / 2 ? 0 : 2) + (c < cols / 2 ? 0 : 1);
      } else if (k <= cols) {
        label = c * k / cols;
      } else {
        label = (r * cols + c) * k / (rows * cols);
      }
      labels[static_cast<std::size_t>(r * cols + c)] = label;
    }
  }
  return Partition::from_labels(labels);
}

namespace {

Scenario base_scenario(int rows, int cols, std::uint64_t seed) {
  Scenario s;
  s.grid_rows = rows;
  s.grid_cols = cols;
  s.beta = {Eigen::Vector2d(0.1, 0.4), Eigen::Vector2d(0.2, 0.3)};
  s.diseases = 2;
  s.alpha = Eigen::Vector2d(0.5, 0.5);
  s.omega = Eigen::MatrixXd(1, 2);
  s.omega << 1.0, 0.1;
  s.seed = seed;
  return s;
}

}  // namespace

Scenario simulation1_scenario(int k, int rows, int cols, std::uint64_t seed) {
  if (k < 1 || k > 4) throw std::invalid_argument("simulation 1 supports 1 to 4 clusters");
  Eigen::MatrixXd rows4(4, 4);
  rows4 << 0.5, 0.3, -0.5, 0.4,
           0.1, -0.2, -0.1, 0.3,
           1.6, -0.9, 0.1, 0.1,
           0.8, 0.2, -0.4, 0.2;
  Scenario s = base_scenario(rows, cols, seed);
  s.truth = grid_truth_partition(rows, cols, k);
  s.gamma = rows4.topRows(k);
  s.lags.ar_lags = {1, 2, 3};
  s.lags.seasonal_lags = {24};
  return s;
}

Scenario simulation2_scenario(int k, int rows, int cols, std::uint64_t seed) {
  if (k < 1 || k > 3) throw std::invalid_argument("simulation 2 supports 1 to 3 clusters");
  Eigen::MatrixXd rows3(3, 2);
  rows3 << 1.6, -0.7,
           0.9, -0.1,
           0.3, 0.1;
  Scenario s = base_scenario(rows, cols, seed);
  s.truth = grid_truth_partition(rows, cols, k);
  s.gamma = rows3.topRows(k);
  s.lags.ar_lags = {1, 2};
  s.lags.seasonal_lags = {};
  return s;
}

int distance_power_matrix(const Eigen::MatrixXd& distances, double alpha, Eigen::MatrixXd& out) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  out = distances.unaryExpr([alpha](double d) { return std::pow(alpha, d); });
  Eigen::LLT<Eigen::MatrixXd> llt(out);
  if (llt.info() == Eigen::Success) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out);
  Eigen::VectorXd values = eig.eigenvalues();
  int raised = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) < 1e-10) {
      values(i) = 1e-10;
      ++raised;
    }
  }
  out = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  out = 0.5 * (out + out.transpose());
  return raised;
}

SyntheticDataset generate(const Scenario& sc) {
  const int D = sc.diseases;
  const int rows = sc.grid_rows;
  const int cols = sc.grid_cols;
  const int n = rows * cols;
  if (sc.truth.size() != n) throw std::invalid_argument("truth partition does not match the grid");
  const int k = sc.truth.block_count();
  const int q = sc.lags.q();
  if (sc.gamma.rows() != k || (sc.gamma.cols() != q && sc.gamma.cols() != q * D)) {
    throw std::invalid_argument("gamma must be k x q or k x qD");
  }
  if (static_cast<int>(sc.beta.size()) != D) throw std::invalid_argument("one beta vector per disease");
  const int p = 2;
  for (const auto& b : sc.beta)
    if (b.size() != p) throw std::invalid_argument("beta vectors must have two entries");
  if (sc.alpha.size() != D || sc.omega.rows() != bridge_pair_count(D) || sc.omega.cols() != 2) {
    throw std::invalid_argument("spatial parameters do not match the disease count");
  }
  sc.lags.validate(sc.times);
  if (sc.sigma2 <= 0.0 || sc.spatial_scale < 0.0 || sc.warmup < 0 || sc.season_period < 1) {
    throw std::invalid_argument("invalid scenario constants");
  }

  SyntheticDataset out;
  out.map = ArealMap::grid(rows, cols);
  const int lag0 = sc.lags.max_lag();
  const int total = lag0 + sc.warmup + sc.times;
  const int keep_from = total - sc.times;

  // Covariates: season indicator and a continuous N(0, v) term; fixed by covariate_seed.
  Rng cov_rng(sc.covariate_seed);
  std::vector<double> cont(static_cast<std::size_t>(n) * total);
  for (auto& v : cont) v = std::sqrt(sc.covariate_variance) * cov_rng.normal();
  auto season = [&](int t) {
    const int phase = ((t - keep_from) % sc.season_period + sc.season_period) % sc.season_period;
    return phase < sc.season_period / 2 ? 1.0 : 0.0;
  };

  Rng rng(sc.seed);

  // Spatial effects: phi_1 ~ N(0, s Q_1^{-1}), phi_d | earlier ~ N(sum A phi, s Q_d^{-1}).
  const Eigen::MatrixXd dist = out.map.distance_matrix();
  SpatialState sp;
  sp.phi = Eigen::MatrixXd::Zero(n, D);
  sp.alpha = sc.alpha;
  sp.sigma2 = Eigen::VectorXd::Constant(D, sc.spatial_scale);
  sp.omega = sc.omega;
  for (int d = 0; d < D; ++d) {
    Eigen::MatrixXd qd;
    out.spd_adjustments += distance_power_matrix(dist, sc.alpha(d), qd);
    Eigen::LLT<Eigen::MatrixXd> llt(qd);
    const Eigen::VectorXd z = rng.normal_vector(n);
    const Eigen::VectorXd draw = llt.matrixU().solve(z);
    sp.phi.col(d) = mdagar_conditional_mean(sp, out.map, d) + std::sqrt(sc.spatial_scale) * draw;
  }

  // Truth record.
  ModelDims dims{n, sc.times, D, p, q};
  ModelState truth = ModelState::initial(dims, Hyperparameters::defaults(dims));
  truth.partition = sc.truth;
  truth.beta.resize(p * D);
  for (int d = 0; d < D; ++d) truth.beta.segment(d * p, p) = sc.beta[static_cast<std::size_t>(d)];
  truth.gamma.resize(k, q * D);
  for (int j = 0; j < k; ++j)
    for (int d = 0; d < D; ++d)
      truth.gamma.row(j).segment(d * q, q) =
          sc.gamma.row(j).segment(sc.gamma.cols() == q ? 0 : d * q, q);
  truth.sigma2 = Eigen::MatrixXd::Constant(k, D, sc.sigma2);
  truth.set_spatial(sp);
  truth.sigma2_phi = Eigen::VectorXd::Constant(D, sc.spatial_scale);

  // Outcomes over the full span, warm-up included.
  ObservationPanel full(n, total, D);
  full.reset_covariates({"season", "noise"}, total);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < total; ++t)
      for (int d = 0; d < D; ++d) {
        full.x(i, t, d, 0) = season(t);
        full.x(i, t, d, 1) = cont[static_cast<std::size_t>(i) * total + t];
      }
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < lag0; ++t)
      for (int d = 0; d < D; ++d) full.y(i, t, d) = std::sqrt(sc.sigma2) * rng.normal();
  simulate_outcomes(full, sc.lags, truth, lag0, rng, true);
  for (double v : full.raw_outcomes()) {
    if (!std::isfinite(v) || std::abs(v) > 1e12) {
      throw NumericalError("synthetic recursion diverged; check the coefficient rows");
    }
  }

  out.panel = ObservationPanel(n, sc.times, D);
  out.panel.reset_covariates({"season", "noise"}, sc.times);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < sc.times; ++t)
      for (int d = 0; d < D; ++d) {
        out.panel.y(i, t, d) = full.y(i, keep_from + t, d);
        for (int l = 0; l < p; ++l) out.panel.x(i, t, d, l) = full.x(i, keep_from + t, d, l);
      }
  for (int d = 0; d < D; ++d) out.panel.disease_names.push_back("d" + std::to_string(d + 1));
  truth.partition = sc.truth;
  out.truth = std::move(truth);
  return out;
}

Hyperparameters study_hyperparameters(int study, const ModelDims& dims,
                                      const CohesionSpec& cohesion) {
  Hyperparameters h = Hyperparameters::defaults(dims);
  const int pd = dims.beta_size();
  const int qd = dims.gamma_size();
  h.cohesion = cohesion;
  h.beta_mean = Eigen::VectorXd::Constant(pd, 0.25);
  h.beta_cov = 0.5 * Eigen::MatrixXd::Identity(pd, pd);
  h.nu = 2.0;
  h.xi_shape = 1.0;
  h.xi_rate = 2.0;
  h.omega_mean.setZero();
  h.omega_cov.setIdentity();
  h.alpha_a = 300.0;
  h.alpha_b = 300.0;
  h.iw_df = 2.0 * (dims.lags + 1);
  if (study == 1) {
    h.mu_mean = Eigen::VectorXd::Zero(qd);
    h.mu_cov = 0.1 * Eigen::MatrixXd::Identity(qd, qd);
    h.iw_scale = h.mu_cov;
  } else if (study == 2) {
    h.mu_mean = Eigen::VectorXd::Zero(qd);
    for (int d = 0; d < dims.diseases; ++d) h.mu_mean(d * dims.lags) = 1.0;
    h.mu_cov = 0.5 * Eigen::MatrixXd::Identity(qd, qd);
    h.iw_scale = h.mu_cov;
  } else {
    throw std::invalid_argument("study must be 1 or 2");
  }
  if (h.iw_df <= qd - 1) h.iw_df = qd + 2;
  return h;
}

StudySummary replicate_study(const StudyOptions& options) {
  if (options.configs.empty()) throw std::invalid_argument("at least one configuration is required");
  if (options.datasets < 1) throw std::invalid_argument("at least one dataset is required");
  const std::size_t nc = options.configs.size();
  StudySummary summary;
  for (const auto& c : options.configs) summary.configs.push_back(c.name);
  summary.best_ari_count.assign(nc, 0);
  summary.mean_ari.assign(nc, 0.0);
  summary.mean_rmse.assign(nc, 0.0);
  std::vector<int> ok_count(nc, 0);

  for (int r = 0; r < options.datasets; ++r) {
    const std::uint64_t data_seed = Rng::derive_seed(options.seed, static_cast<std::uint64_t>(r));
    std::vector<StudyRow> rows;
    try {
      const Scenario sc = options.study == 1
                              ? simulation1_scenario(options.clusters, options.grid_rows, options.grid_cols, data_seed)
                              : simulation2_scenario(options.clusters, options.grid_rows, options.grid_cols, data_seed);
      const SyntheticDataset data = generate(sc);
      const int fit_times = options.study == 2 ? sc.times - options.holdout : sc.times;
      if (fit_times <= sc.lags.max_lag() + 1) throw std::invalid_argument("holdout leaves too little data");
      const ObservationPanel fit_panel = data.panel.truncated(fit_times);
      const ModelDims dims{fit_panel.areas(), fit_times, fit_panel.diseases(), fit_panel.covariate_count(),
                           sc.lags.q()};

      for (std::size_t c = 0; c < nc; ++c) {
        StudyRow row;
        row.dataset = r;
        row.config = options.configs[c].name;
        try {
          const Hyperparameters hyper = study_hyperparameters(options.study, dims, options.configs[c].cohesion);
          const ModelContext ctx(fit_panel, data.map, sc.lags, hyper);
          // Common random numbers: every config of a replica shares the chain seed.
          const std::uint64_t chain_seed = Rng::derive_seed(data_seed, 1);
          const PosteriorChain chain = run_chain(ctx, options.schedule, chain_seed);
          if (chain.empty()) throw std::invalid_argument("schedule saves no states");
          std::vector<Partition> parts;
          parts.reserve(chain.size());
          for (const auto& s : chain.states) parts.push_back(s.partition);
          ViSearchOptions vo;
          vo.restarts = options.vi_restarts;
          vo.seed = chain_seed;
          const Partition est = estimate_partition_vi(parts, vo).partition;
          row.ari = adjusted_rand_index(est, sc.truth);
          row.clusters_estimated = est.block_count();
          row.fit = evaluate_fit(chain, ctx, est);
          row.rmse = row.fit.rmse;
          if (options.study == 2 && options.holdout > 0) {
            ObservationPanel history = data.panel.truncated(fit_times);
            ForecastOptions fo;
            fo.horizon = options.holdout;
            fo.seed = chain_seed ^ 0x5eedULL;
            const ForecastDraws draws = forecast(chain, history, fo);
            const ForecastSummary fs = summarize_forecast(draws, 0.95);
            double ss = 0.0;
            long covered = 0;
            long cells = 0;
            for (int i = 0; i < draws.areas; ++i)
              for (int h = 0; h < draws.horizon; ++h)
                for (int d = 0; d < draws.diseases; ++d) {
                  const double actual = data.panel.y(i, fit_times + h, d);
                  const std::size_t idx = fs.index(i, h, d);
                  ss += (actual - fs.mean[idx]) * (actual - fs.mean[idx]);
                  if (actual >= fs.lower[idx] && actual <= fs.upper[idx]) ++covered;
                  ++cells;
                }
            row.holdout_rmse = std::sqrt(ss / static_cast<double>(cells));
            const std::vector<double> one = one_step_means(chain, data.panel, fit_times);
            double ss1 = 0.0;
            for (int i = 0; i < draws.areas; ++i)
              for (int h = 0; h < draws.horizon; ++h)
                for (int d = 0; d < draws.diseases; ++d) {
                  const double e = data.panel.y(i, fit_times + h, d) -
                                   one[(static_cast<std::size_t>(i) * draws.horizon + h) * draws.diseases + d];
                  ss1 += e * e;
                }
            row.holdout_rmse_one_step = std::sqrt(ss1 / static_cast<double>(cells));
            row.holdout_coverage = static_cast<double>(covered) / static_cast<double>(cells);
          }
          row.ok = true;
        } catch (const std::exception& e) {
          row.ok = false;
          row.error = e.what();
        }
        rows.push_back(std::move(row));
      }
    } catch (const std::exception& e) {
      for (std::size_t c = 0; c < nc; ++c) {
        StudyRow row;
        row.dataset = r;
        row.config = options.configs[c].name;
        row.error = e.what();
        rows.push_back(std::move(row));
      }
    }

    double best = -std::numeric_limits<double>::infinity();
    for (const auto& row : rows)
      if (row.ok) best = std::max(best, row.ari);
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& row = rows[c];
      if (!row.ok) continue;
      if (row.ari >= best - 1e-12) ++summary.best_ari_count[c];
      summary.mean_ari[c] += row.ari;
      summary.mean_rmse[c] += row.rmse;
      ++ok_count[c];
    }
    summary.rows.insert(summary.rows.end(), rows.begin(), rows.end());
  }
  for (std::size_t c = 0; c < nc; ++c) {
    if (ok_count[c] > 0) {
      summary.mean_ari[c] /= ok_count[c];
      summary.mean_rmse[c] /= ok_count[c];
    } else {
      summary.mean_ari[c] = std::numeric_limits<double>::quiet_NaN();
      summary.mean_rmse[c] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return summary;
}

}  // namespace stppm
