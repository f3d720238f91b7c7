#include "stppm/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

#include "stppm/errors.hpp"

namespace stppm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::VectorXd beta_block(const ModelState& s, const ModelDims& dims, int d) {
  return s.beta.segment(static_cast<Eigen::Index>(d) * dims.covariates, dims.covariates);
}

Eigen::VectorXd gamma_block(const Eigen::VectorXd& gamma, const ModelDims& dims, int d) {
  return gamma.segment(static_cast<Eigen::Index>(d) * dims.lags, dims.lags);
}

// Residual sums for one (area, disease) cell with w = y - X beta_d - phi_id:
// ww = sum w^2 and zw = sum Z w.
struct CellResidual {
  double ww = 0.0;
  Eigen::VectorXd zw;
};

CellResidual cell_residual(const ModelState& s, const ModelContext& ctx, int i, int d) {
  const auto& st = ctx.stats(i, d);
  const Eigen::VectorXd b = beta_block(s, ctx.dims(), d);
  const double phi = s.phi(i, d);
  const double teff = ctx.usable_count();
  CellResidual r;
  const double xb_sum = b.dot(st.x_sum);
  r.ww = st.yy - 2.0 * b.dot(st.xy) + b.dot(st.xx * b) - 2.0 * phi * (st.y_sum - xb_sum) +
         teff * phi * phi;
  r.zw = st.zy - st.zx * b - phi * st.z_sum;
  return r;
}

// sum_t (w - Z gamma)^2 from the cell residual sums.
double residual_ss(const CellResidual& r, const AreaStats& st, const Eigen::VectorXd& g) {
  return std::max(0.0, r.ww - 2.0 * g.dot(r.zw) + g.dot(st.zz * g));
}

double cell_log_likelihood(const CellResidual& r, const AreaStats& st, const Eigen::VectorXd& g,
                           double sigma2, double teff) {
  return -0.5 * teff * (kLog2Pi + std::log(sigma2)) - 0.5 * residual_ss(r, st, g) / sigma2;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

// ---------------------------------------------------------------------------
// ModelContext

ModelContext::ModelContext(ObservationPanel panel, ArealMap map, LagSpec lags, Hyperparameters hyper,
                           OrderingRule rule, std::vector<int> user_order)
    : panel_(std::move(panel)), map_(std::move(map)), lags_(std::move(lags)), hyper_(std::move(hyper)) {
  if (panel_.areas() != map_.size()) {
    throw DataError("panel has " + std::to_string(panel_.areas()) + " areas but the map has " +
                    std::to_string(map_.size()));
  }
  if (panel_.diseases() < 1) throw DataError("at least one disease is required");
  try {
    lags_.validate(panel_.times());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  dims_ = ModelDims{panel_.areas(), panel_.times(), panel_.diseases(), panel_.covariate_count(),
                    lags_.q()};
  try {
    hyper_.validate(dims_);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  try {
    ordering_ = dag_ordering(map_, rule, user_order);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  beta_precision_ = dims_.beta_size() > 0 ? spd_inverse(hyper_.beta_cov) : Eigen::MatrixXd();
  mu_precision_ = spd_inverse(hyper_.mu_cov);
  omega_precision_ = hyper_.omega_cov.inverse();
  replace_outcomes(panel_);
}

void ModelContext::replace_outcomes(const ObservationPanel& panel) {
  if (panel.areas() != panel_.areas() || panel.times() != panel_.times() ||
      panel.diseases() != panel_.diseases() || panel.covariate_count() != panel_.covariate_count()) {
    throw DataError("replacement panel has a different shape");
  }
  if (&panel != &panel_) panel_ = panel;
  design_ = build_design(panel_, lags_);
  for (int i = 0; i < dims_.areas; ++i) {
    for (int t = design_.first_time(); t < design_.end_time(); ++t) {
      for (int d = 0; d < dims_.diseases; ++d) {
        if (!std::isfinite(panel_.y(i, t, d))) {
          throw DataError("missing outcome at area " + std::to_string(i + 1) + ", time " +
                          std::to_string(t + 1) + ", disease " + std::to_string(d + 1));
        }
        for (int l = 0; l < dims_.covariates; ++l) {
          if (!std::isfinite(panel_.x(i, t, d, l))) {
            throw DataError("missing covariate '" + panel_.covariate_names()[static_cast<std::size_t>(l)] +
                            "' at area " + std::to_string(i + 1) + ", time " + std::to_string(t + 1));
          }
        }
      }
    }
  }
  compute_stats();
}

void ModelContext::compute_stats() {
  const int p = dims_.covariates;
  const int q = dims_.lags;
  stats_.assign(static_cast<std::size_t>(dims_.areas) * static_cast<std::size_t>(dims_.diseases), {});
  for (int i = 0; i < dims_.areas; ++i) {
    for (int d = 0; d < dims_.diseases; ++d) {
      AreaStats st;
      st.zz = Eigen::MatrixXd::Zero(q, q);
      st.zx = Eigen::MatrixXd::Zero(q, p);
      st.xx = Eigen::MatrixXd::Zero(p, p);
      st.z_sum = Eigen::VectorXd::Zero(q);
      st.x_sum = Eigen::VectorXd::Zero(p);
      st.zy = Eigen::VectorXd::Zero(q);
      st.xy = Eigen::VectorXd::Zero(p);
      for (int t = design_.first_time(); t < design_.end_time(); ++t) {
        const auto z = design_.z(i, t, d);
        const auto x = panel_.covariates(i, t, d);
        const double y = panel_.y(i, t, d);
        st.zz.noalias() += z * z.transpose();
        st.zx.noalias() += z * x.transpose();
        st.xx.noalias() += x * x.transpose();
        st.z_sum += z;
        st.x_sum += x;
        st.zy += y * z;
        st.xy += y * x;
        st.yy += y * y;
        st.y_sum += y;
      }
      stats_[static_cast<std::size_t>(i) * static_cast<std::size_t>(dims_.diseases) +
             static_cast<std::size_t>(d)] = std::move(st);
    }
  }
}

// ---------------------------------------------------------------------------
// Joint density

double fitted_mean(const ModelState& state, const ModelContext& ctx, int i, int t, int d) {
  const auto& dims = ctx.dims();
  const int c = state.partition.label(i);
  const Eigen::VectorXd g = gamma_block(state.gamma.row(c).transpose(), dims, d);
  double m = ctx.design().z(i, t, d).dot(g) + state.phi(i, d);
  if (dims.covariates > 0) m += ctx.panel().covariates(i, t, d).dot(beta_block(state, dims, d));
  return m;
}

double log_likelihood(const ModelState& state, const ModelContext& ctx) {
  const auto& dims = ctx.dims();
  double total = 0.0;
  for (int i = 0; i < dims.areas; ++i) {
    const int c = state.partition.label(i);
    for (int t = ctx.design().first_time(); t < ctx.design().end_time(); ++t) {
      for (int d = 0; d < dims.diseases; ++d) {
        total += log_normal_pdf(ctx.panel().y(i, t, d), fitted_mean(state, ctx, i, t, d),
                                state.sigma2(c, d));
      }
    }
  }
  return total;
}

LogJoint log_joint(const ModelState& state, const ModelContext& ctx) {
  const auto& h = ctx.hyper();
  const auto& dims = ctx.dims();
  LogJoint lj;
  lj.likelihood = log_likelihood(state, ctx);
  if (dims.beta_size() > 0) lj.beta = log_mvn_pdf(state.beta, h.beta_mean, h.beta_cov);
  for (int j = 0; j < state.clusters(); ++j) {
    lj.gamma_star += log_mvn_pdf(state.gamma.row(j).transpose(), state.mu_gamma, state.sigma_gamma);
    for (int d = 0; d < dims.diseases; ++d) {
      lj.sigma2_star += log_inv_gamma_pdf(state.sigma2(j, d), h.nu, h.nu * state.xi);
    }
  }
  lj.mu_gamma = log_mvn_pdf(state.mu_gamma, h.mu_mean, h.mu_cov);
  lj.sigma_gamma = log_inv_wishart_pdf(state.sigma_gamma, h.iw_df, h.iw_scale);
  lj.phi = mdagar_log_density(state.spatial(), ctx.ordering(), ctx.map());
  for (Eigen::Index r = 0; r < state.omega.rows(); ++r) {
    lj.omega += log_mvn_pdf(state.omega.row(r).transpose(), h.omega_mean, h.omega_cov);
  }
  for (int d = 0; d < dims.diseases; ++d) {
    lj.alpha += log_beta_pdf(state.alpha(d), h.alpha_a, h.alpha_b);
    lj.sigma2_phi += log_inv_gamma_pdf(state.sigma2_phi(d), h.phi_shape, h.phi_scale);
  }
  lj.xi = log_gamma_pdf(state.xi, h.xi_shape, h.xi_rate);
  lj.partition = log_partition_prior(ctx.map(), state.partition, h.cohesion);
  return lj;
}

// ---------------------------------------------------------------------------
// Conditionals

GammaParams xi_conditional(const ModelState& state, const ModelContext& ctx) {
  const auto& h = ctx.hyper();
  const double k = state.clusters();
  const double D = ctx.dims().diseases;
  return {h.xi_shape + k * D * h.nu, h.xi_rate + h.nu * state.sigma2.cwiseInverse().sum()};
}

GaussianCanonical mu_gamma_conditional(const ModelState& state, const ModelContext& ctx) {
  const Eigen::MatrixXd sg_inv = spd_inverse(state.sigma_gamma);
  const Eigen::VectorXd gamma_sum = state.gamma.colwise().sum().transpose();
  const Eigen::MatrixXd precision = state.clusters() * sg_inv + ctx.mu_precision();
  const Eigen::VectorXd linear = sg_inv * gamma_sum + ctx.mu_precision() * ctx.hyper().mu_mean;
  return GaussianCanonical(precision, linear);
}

InvWishartParams sigma_gamma_conditional(const ModelState& state, const ModelContext& ctx) {
  const auto& h = ctx.hyper();
  Eigen::MatrixXd scatter = h.iw_scale;
  for (int j = 0; j < state.clusters(); ++j) {
    const Eigen::VectorXd r = state.gamma.row(j).transpose() - state.mu_gamma;
    scatter.noalias() += r * r.transpose();
  }
  return {h.iw_df + state.clusters(), scatter};
}

InvGammaParams cluster_variance_conditional(const ModelState& state, const ModelContext& ctx,
                                            int cluster, int disease) {
  const auto& h = ctx.hyper();
  const Eigen::VectorXd g = gamma_block(state.gamma.row(cluster).transpose(), ctx.dims(), disease);
  double ss = 0.0;
  int members = 0;
  for (int i = 0; i < ctx.dims().areas; ++i) {
    if (state.partition.label(i) != cluster) continue;
    ++members;
    ss += residual_ss(cell_residual(state, ctx, i, disease), ctx.stats(i, disease), g);
  }
  return {0.5 * members * ctx.usable_count() + h.nu, 0.5 * ss + h.nu * state.xi};
}

GaussianCanonical gamma_star_conditional(const ModelState& state, const ModelContext& ctx,
                                         int cluster) {
  const auto& dims = ctx.dims();
  const int q = dims.lags;
  const Eigen::MatrixXd sg_inv = spd_inverse(state.sigma_gamma);
  Eigen::MatrixXd precision = sg_inv;
  Eigen::VectorXd linear = sg_inv * state.mu_gamma;
  for (int i = 0; i < dims.areas; ++i) {
    if (state.partition.label(i) != cluster) continue;
    for (int d = 0; d < dims.diseases; ++d) {
      const double inv_s2 = 1.0 / state.sigma2(cluster, d);
      const auto r = cell_residual(state, ctx, i, d);
      precision.block(d * q, d * q, q, q) += inv_s2 * ctx.stats(i, d).zz;
      linear.segment(d * q, q) += inv_s2 * r.zw;
    }
  }
  return GaussianCanonical(precision, linear);
}

GaussianCanonical omega_conditional(const ModelState& state, const ModelContext& ctx, int disease) {
  if (disease < 1 || disease >= ctx.dims().diseases) {
    throw std::invalid_argument("bridge coefficients exist only for diseases after the first");
  }
  const auto& map = ctx.map();
  const int n = map.size();
  const DagarPrecision q(ctx.ordering(), state.alpha(disease));
  const double s2 = state.sigma2_phi(disease);
  Eigen::MatrixXd delta(n, 2 * disease);
  for (int dp = 0; dp < disease; ++dp) {
    const Eigen::VectorXd v = state.phi.col(dp);
    delta.col(2 * dp) = v;
    delta.col(2 * dp + 1) = bridge_apply({0.0, 1.0}, map, v);
  }
  Eigen::MatrixXd q_delta(n, 2 * disease);
  for (int c = 0; c < 2 * disease; ++c) q_delta.col(c) = q.multiply(delta.col(c)) / s2;
  Eigen::MatrixXd precision = delta.transpose() * q_delta;
  Eigen::VectorXd linear = q_delta.transpose() * state.phi.col(disease);
  const Eigen::Vector2d prior_linear = ctx.omega_precision() * ctx.hyper().omega_mean;
  for (int dp = 0; dp < disease; ++dp) {
    precision.block<2, 2>(2 * dp, 2 * dp) += ctx.omega_precision();
    linear.segment<2>(2 * dp) += prior_linear;
  }
  return GaussianCanonical(precision, linear);
}

InvGammaParams sigma_phi_conditional(const ModelState& state, const ModelContext& ctx,
                                     int disease) {
  const auto& h = ctx.hyper();
  const DagarPrecision q(ctx.ordering(), state.alpha(disease));
  const Eigen::VectorXd r =
      state.phi.col(disease) - mdagar_conditional_mean(state.spatial(), ctx.map(), disease);
  return {h.phi_shape + 0.5 * ctx.dims().areas, h.phi_scale + 0.5 * q.quadratic_form(r)};
}

double alpha_log_target(const ModelState& state, const ModelContext& ctx, int disease,
                        double logit_alpha) {
  const auto& h = ctx.hyper();
  const double a = logistic(logit_alpha);
  if (!(a > 0.0 && a < 1.0)) return kNegInf;
  const DagarPrecision q(ctx.ordering(), a);
  const Eigen::VectorXd r =
      state.phi.col(disease) - mdagar_conditional_mean(state.spatial(), ctx.map(), disease);
  const double s2 = state.sigma2_phi(disease);
  const double log_a = -std::log1p(std::exp(-logit_alpha));
  const double log_1ma = -std::log1p(std::exp(logit_alpha));
  return 0.5 * q.log_determinant() - 0.5 * q.quadratic_form(r) / s2 +
         (h.alpha_a - 1.0) * log_a + (h.alpha_b - 1.0) * log_1ma + log_a + log_1ma;
}

SparseGaussianCanonical phi_conditional(const ModelState& state, const ModelContext& ctx,
                                        int disease) {
  const auto& dims = ctx.dims();
  const auto& map = ctx.map();
  const int n = dims.areas;
  const SpatialState sp = state.spatial();

  const DagarPrecision qd(ctx.ordering(), state.alpha(disease));
  Eigen::SparseMatrix<double> precision = qd.matrix() / state.sigma2_phi(disease);
  Eigen::VectorXd linear =
      qd.multiply(mdagar_conditional_mean(sp, map, disease)) / state.sigma2_phi(disease);

  for (int l = disease + 1; l < dims.diseases; ++l) {
    const DagarPrecision ql(ctx.ordering(), state.alpha(l));
    const double s2 = state.sigma2_phi(l);
    const Eigen::SparseMatrix<double> a = bridge_matrix(sp.bridge(l, disease), map);
    Eigen::VectorXd e = state.phi.col(l);
    for (int lp = 0; lp < l; ++lp) {
      if (lp == disease) continue;
      e -= bridge_apply(sp.bridge(l, lp), map, state.phi.col(lp));
    }
    const Eigen::SparseMatrix<double> at = a.transpose();
    precision += Eigen::SparseMatrix<double>(at * ql.matrix() * a) / s2;
    linear += at * ql.multiply(e) / s2;
  }

  const double teff = ctx.usable_count();
  std::vector<Eigen::Triplet<double>> diag;
  diag.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int c = state.partition.label(i);
    const double inv_s2 = 1.0 / state.sigma2(c, disease);
    const auto& st = ctx.stats(i, disease);
    const Eigen::VectorXd g = gamma_block(state.gamma.row(c).transpose(), dims, disease);
    double resid_sum = st.y_sum - g.dot(st.z_sum);
    if (dims.covariates > 0) resid_sum -= beta_block(state, dims, disease).dot(st.x_sum);
    diag.emplace_back(i, i, teff * inv_s2);
    linear(i) += resid_sum * inv_s2;
  }
  Eigen::SparseMatrix<double> data(n, n);
  data.setFromTriplets(diag.begin(), diag.end());
  precision += data;
  return SparseGaussianCanonical(precision, linear);
}

GaussianCanonical beta_conditional(const ModelState& state, const ModelContext& ctx) {
  const auto& dims = ctx.dims();
  const int p = dims.covariates;
  Eigen::MatrixXd precision = ctx.beta_precision();
  Eigen::VectorXd linear = ctx.beta_precision() * ctx.hyper().beta_mean;
  for (int i = 0; i < dims.areas; ++i) {
    const int c = state.partition.label(i);
    for (int d = 0; d < dims.diseases; ++d) {
      const auto& st = ctx.stats(i, d);
      const double inv_s2 = 1.0 / state.sigma2(c, d);
      const Eigen::VectorXd g = gamma_block(state.gamma.row(c).transpose(), dims, d);
      precision.block(d * p, d * p, p, p) += inv_s2 * st.xx;
      linear.segment(d * p, p) +=
          inv_s2 * (st.xy - st.zx.transpose() * g - state.phi(i, d) * st.x_sum);
    }
  }
  return GaussianCanonical(precision, linear);
}

// ---------------------------------------------------------------------------
// Partition update

ClusterParams draw_cluster_prior(const ModelState& state, const ModelContext& ctx, Rng& rng) {
  const auto& h = ctx.hyper();
  Eigen::LLT<Eigen::MatrixXd> llt(state.sigma_gamma);
  if (llt.info() != Eigen::Success) throw NumericalError("Sigma_gamma is not positive definite");
  ClusterParams out;
  out.gamma = state.mu_gamma + llt.matrixL() * rng.normal_vector(state.mu_gamma.size());
  out.sigma2.resize(ctx.dims().diseases);
  for (int d = 0; d < ctx.dims().diseases; ++d) out.sigma2(d) = rng.inv_gamma(h.nu, h.nu * state.xi);
  return out;
}

double area_log_likelihood(const ModelState& state, const ModelContext& ctx, int area,
                           const Eigen::VectorXd& gamma, const Eigen::VectorXd& sigma2) {
  double total = 0.0;
  for (int d = 0; d < ctx.dims().diseases; ++d) {
    total += cell_log_likelihood(cell_residual(state, ctx, area, d), ctx.stats(area, d),
                                 gamma_block(gamma, ctx.dims(), d), sigma2(d), ctx.usable_count());
  }
  return total;
}

namespace {

// Log prior weight of placing `area` in each current block (given the other
// labels) and in a fresh block, up to a common constant. Uses the full
// product-partition prior ratio: for HB the total boundary length is twice
// the number of between-block edges, so joining block j contributes
// eta^{2 (deg - m_j)} and a new block eta^{2 deg}, where m_j counts the
// neighbors of `area` in block j.
std::vector<double> prior_log_weights(const std::vector<int>& labels, const std::vector<int>& sizes,
                                      const ModelContext& ctx, int area, double& new_block) {
  const auto& spec = ctx.hyper().cohesion;
  const std::size_t k = sizes.size();
  std::vector<double> out(k, kNegInf);
  if (spec.kind == CohesionSpec::Kind::HB) {
    std::vector<int> m(k, 0);
    for (int j : ctx.map().neighbors(area)) ++m[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])];
    const int deg = ctx.map().degree(area);
    for (std::size_t j = 0; j < k; ++j) {
      if (sizes[j] > 0) out[j] = log_eta_power(spec.eta, 2.0 * (deg - m[j]));
    }
    new_block = log_eta_power(spec.eta, 2.0 * deg);
  } else {
    for (std::size_t j = 0; j < k; ++j) {
      if (sizes[j] > 0) out[j] = std::log(static_cast<double>(sizes[j]));
    }
    new_block = std::log(spec.mass);
  }
  return out;
}

}  // namespace

std::vector<double> allocation_log_weights(const ModelState& state, const ModelContext& ctx,
                                           int area, std::span<const ClusterParams> aux) {
  const int k = state.clusters();
  std::vector<int> labels(state.partition.labels().begin(), state.partition.labels().end());
  std::vector<int> sizes = state.partition.block_sizes();
  --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(area)])];
  double new_block = 0.0;
  std::vector<double> w = prior_log_weights(labels, sizes, ctx, area, new_block);
  for (int j = 0; j < k; ++j) {
    if (w[static_cast<std::size_t>(j)] == kNegInf) continue;
    w[static_cast<std::size_t>(j)] += area_log_likelihood(
        state, ctx, area, state.gamma.row(j).transpose(), state.sigma2.row(j).transpose());
  }
  const double log_m = std::log(static_cast<double>(aux.size()));
  for (const auto& a : aux) {
    w.push_back(new_block == kNegInf
                    ? kNegInf
                    : new_block - log_m + area_log_likelihood(state, ctx, area, a.gamma, a.sigma2));
  }
  return w;
}

void update_partition(ModelState& state, const ModelContext& ctx, Rng& rng) {
  const auto& dims = ctx.dims();
  const int n = dims.areas;
  const int m = ctx.hyper().aux_components;
  const double teff = ctx.usable_count();

  std::vector<int> labels(state.partition.labels().begin(), state.partition.labels().end());
  std::vector<int> sizes = state.partition.block_sizes();
  std::vector<ClusterParams> params;
  for (int j = 0; j < state.clusters(); ++j) {
    params.push_back({state.gamma.row(j).transpose(), state.sigma2.row(j).transpose()});
  }

  // beta and phi are fixed during this step, so the residual sums are too.
  std::vector<CellResidual> resid(static_cast<std::size_t>(n) * static_cast<std::size_t>(dims.diseases));
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < dims.diseases; ++d)
      resid[static_cast<std::size_t>(i * dims.diseases + d)] = cell_residual(state, ctx, i, d);
  auto loglik = [&](int i, const ClusterParams& cp) {
    double total = 0.0;
    for (int d = 0; d < dims.diseases; ++d) {
      total += cell_log_likelihood(resid[static_cast<std::size_t>(i * dims.diseases + d)],
                                   ctx.stats(i, d), gamma_block(cp.gamma, dims, d), cp.sigma2(d), teff);
    }
    return total;
  };

  std::vector<ClusterParams> aux(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) {
    const int own = labels[static_cast<std::size_t>(i)];
    --sizes[static_cast<std::size_t>(own)];
    const bool singleton = sizes[static_cast<std::size_t>(own)] == 0;
    for (int a = 0; a < m; ++a) {
      if (a == 0 && singleton) {
        aux[0] = params[static_cast<std::size_t>(own)];
      } else {
        aux[static_cast<std::size_t>(a)] = draw_cluster_prior(state, ctx, rng);
      }
    }

    double new_block = 0.0;
    std::vector<double> w = prior_log_weights(labels, sizes, ctx, i, new_block);
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (w[j] != kNegInf) w[j] += loglik(i, params[j]);
    }
    const double log_m = std::log(static_cast<double>(m));
    for (const auto& a : aux) {
      w.push_back(new_block == kNegInf ? kNegInf : new_block - log_m + loglik(i, a));
    }

    const std::size_t pick = rng.categorical_from_log(w);
    if (pick >= w.size()) {
      throw NumericalError("allocation weights of area " + std::to_string(i + 1) + " all vanish",
                           describe(state));
    }
    const std::size_t k = sizes.size();
    int target;
    if (pick < k) {
      target = static_cast<int>(pick);
    } else if (singleton) {
      target = own;
      params[static_cast<std::size_t>(own)] = aux[pick - k];
    } else {
      target = static_cast<int>(k);
      sizes.push_back(0);
      params.push_back(aux[pick - k]);
    }
    labels[static_cast<std::size_t>(i)] = target;
    ++sizes[static_cast<std::size_t>(target)];

    if (singleton && target != own) {
      // Drop the emptied block and shift the labels above it.
      sizes.erase(sizes.begin() + own);
      params.erase(params.begin() + own);
      for (int& c : labels)
        if (c > own) --c;
    }
  }

  // Canonical relabeling with the parameter rows permuted to match.
  const Partition part = Partition::from_labels(labels);
  const int k = part.block_count();
  std::vector<int> old_of_new(static_cast<std::size_t>(k), -1);
  for (int i = 0; i < n; ++i) old_of_new[static_cast<std::size_t>(part.label(i))] = labels[static_cast<std::size_t>(i)];
  state.gamma.resize(k, dims.gamma_size());
  state.sigma2.resize(k, dims.diseases);
  for (int j = 0; j < k; ++j) {
    const auto& cp = params[static_cast<std::size_t>(old_of_new[static_cast<std::size_t>(j)])];
    state.gamma.row(j) = cp.gamma.transpose();
    state.sigma2.row(j) = cp.sigma2.transpose();
  }
  state.partition = part;
}

// ---------------------------------------------------------------------------
// Block updates

void update_xi(ModelState& state, const ModelContext& ctx, Rng& rng) {
  state.xi = xi_conditional(state, ctx).sample(rng);
}

void update_mu_gamma(ModelState& state, const ModelContext& ctx, Rng& rng) {
  state.mu_gamma = mu_gamma_conditional(state, ctx).sample(rng);
}

void update_sigma_gamma(ModelState& state, const ModelContext& ctx, Rng& rng) {
  state.sigma_gamma = sigma_gamma_conditional(state, ctx).sample(rng);
}

void update_cluster_variances(ModelState& state, const ModelContext& ctx, Rng& rng) {
  for (int j = 0; j < state.clusters(); ++j)
    for (int d = 0; d < ctx.dims().diseases; ++d)
      state.sigma2(j, d) = cluster_variance_conditional(state, ctx, j, d).sample(rng);
}

void update_gamma_star(ModelState& state, const ModelContext& ctx, Rng& rng) {
  for (int j = 0; j < state.clusters(); ++j)
    state.gamma.row(j) = gamma_star_conditional(state, ctx, j).sample(rng).transpose();
}

void update_omega(ModelState& state, const ModelContext& ctx, Rng& rng) {
  for (int d = 1; d < ctx.dims().diseases; ++d) {
    const Eigen::VectorXd w = omega_conditional(state, ctx, d).sample(rng);
    for (int dp = 0; dp < d; ++dp) state.omega.row(bridge_pair_index(d, dp)) = w.segment<2>(2 * dp).transpose();
  }
}

void update_sigma_phi(ModelState& state, const ModelContext& ctx, Rng& rng) {
  for (int d = 0; d < ctx.dims().diseases; ++d)
    state.sigma2_phi(d) = sigma_phi_conditional(state, ctx, d).sample(rng);
}

void update_phi(ModelState& state, const ModelContext& ctx, Rng& rng) {
  for (int d = 0; d < ctx.dims().diseases; ++d)
    state.phi.col(d) = phi_conditional(state, ctx, d).sample(rng);
}

void update_beta(ModelState& state, const ModelContext& ctx, Rng& rng) {
  if (ctx.dims().beta_size() == 0) return;
  state.beta = beta_conditional(state, ctx).sample(rng);
}

AlphaAdapter::AlphaAdapter(int diseases, double initial_step, double target)
    : log_step_(Eigen::VectorXd::Constant(diseases, std::log(initial_step))), target_(target),
      adapt_count_(static_cast<std::size_t>(diseases), 0),
      proposals_(static_cast<std::size_t>(diseases), 0),
      accepted_(static_cast<std::size_t>(diseases), 0) {}

void AlphaAdapter::record(int d, double accept_prob, bool accepted) {
  const auto idx = static_cast<std::size_t>(d);
  if (!frozen_) {
    const double gain = 1.0 / std::sqrt(static_cast<double>(++adapt_count_[idx]));
    log_step_(d) += gain * (accept_prob - target_);
    log_step_(d) = std::clamp(log_step_(d), -12.0, 3.0);
  }
  ++proposals_[idx];
  if (accepted) ++accepted_[idx];
}

void AlphaAdapter::freeze() noexcept {
  frozen_ = true;
  std::fill(proposals_.begin(), proposals_.end(), 0);
  std::fill(accepted_.begin(), accepted_.end(), 0);
}

Eigen::VectorXd AlphaAdapter::acceptance_rates() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(proposals_.size()));
  for (std::size_t d = 0; d < proposals_.size(); ++d) {
    out(static_cast<Eigen::Index>(d)) =
        proposals_[d] == 0 ? 0.0 : static_cast<double>(accepted_[d]) / static_cast<double>(proposals_[d]);
  }
  return out;
}

Eigen::VectorXd AlphaAdapter::steps() const { return log_step_.array().exp(); }

void update_alpha(ModelState& state, const ModelContext& ctx, AlphaAdapter& adapter, Rng& rng) {
  for (int d = 0; d < ctx.dims().diseases; ++d) {
    const double a = state.alpha(d);
    const double current = std::log(a) - std::log1p(-a);
    const double proposal = current + adapter.step(d) * rng.normal();
    const double log_ratio =
        alpha_log_target(state, ctx, d, proposal) - alpha_log_target(state, ctx, d, current);
    const double prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
    const bool accept = std::log(rng.uniform()) < log_ratio;
    if (accept) state.alpha(d) = logistic(proposal);
    adapter.record(d, std::isfinite(prob) ? prob : 0.0, accept);
  }
}

// ---------------------------------------------------------------------------
// Driver

GibbsSampler::GibbsSampler(const ModelContext& ctx, ModelState initial, std::uint64_t seed)
    : ctx_(ctx), state_(std::move(initial)), rng_(seed),
      adapter_(ctx.dims().diseases, ctx.hyper().alpha_initial_step,
               ctx.hyper().alpha_target_acceptance) {
  try {
    state_.validate(ctx.dims());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid initial state: ") + e.what());
  }
}

void GibbsSampler::sweep() {
  try {
    update_xi(state_, ctx_, rng_);
    update_mu_gamma(state_, ctx_, rng_);
    update_sigma_gamma(state_, ctx_, rng_);
    update_partition(state_, ctx_, rng_);
    update_cluster_variances(state_, ctx_, rng_);
    update_gamma_star(state_, ctx_, rng_);
    update_omega(state_, ctx_, rng_);
    update_sigma_phi(state_, ctx_, rng_);
    update_alpha(state_, ctx_, adapter_, rng_);
    update_phi(state_, ctx_, rng_);
    update_beta(state_, ctx_, rng_);
  } catch (const NumericalError& e) {
    throw NumericalError(e.what(), describe(state_));
  }
}

PosteriorChain run_chain(const ModelContext& ctx, const Schedule& schedule, std::uint64_t seed,
                         std::optional<ModelState> initial) {
  try {
    schedule.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  PosteriorChain chain;
  chain.dims = ctx.dims();
  chain.lags = ctx.design().lags();
  chain.schedule = schedule;
  chain.seed = seed;
  chain.ordering_rule = ctx.ordering().rule;
  chain.states.reserve(static_cast<std::size_t>(schedule.saved_count()));

  GibbsSampler sampler(ctx, initial ? std::move(*initial) : ModelState::initial(ctx.dims(), ctx.hyper()),
                       seed);
  if (schedule.burnin == 0) sampler.adapter().freeze();
  for (int it = 1; it <= schedule.iterations; ++it) {
    sampler.sweep();
    if (it == schedule.burnin) sampler.adapter().freeze();
    if (schedule.saves(it)) {
      const double lp = log_joint(sampler.state(), ctx).total();
      if (!std::isfinite(lp)) {
        throw NumericalError("log joint density is not finite at iteration " + std::to_string(it),
                             describe(sampler.state()));
      }
      chain.iterations.push_back(it);
      chain.states.push_back(sampler.state());
      chain.log_posterior.push_back(lp);
    }
  }
  chain.alpha_acceptance = sampler.adapter().acceptance_rates();
  chain.alpha_step = sampler.adapter().steps();
  return chain;
}

ModelState sample_prior_given_partition(const ModelContext& ctx, const Partition& partition,
                                        Rng& rng) {
  const auto& h = ctx.hyper();
  const auto& dims = ctx.dims();
  ModelState s = ModelState::initial(dims, h);
  s.partition = partition;
  const int k = partition.block_count();

  s.xi = rng.gamma(h.xi_shape, h.xi_rate);
  s.mu_gamma = GaussianCanonical(ctx.mu_precision(), ctx.mu_precision() * h.mu_mean).sample(rng);
  s.sigma_gamma = InvWishartParams{h.iw_df, h.iw_scale}.sample(rng);
  s.gamma.resize(k, dims.gamma_size());
  s.sigma2.resize(k, dims.diseases);
  for (int j = 0; j < k; ++j) {
    const ClusterParams cp = draw_cluster_prior(s, ctx, rng);
    s.gamma.row(j) = cp.gamma.transpose();
    s.sigma2.row(j) = cp.sigma2.transpose();
  }
  const Eigen::LLT<Eigen::Matrix2d> omega_chol(h.omega_cov);
  for (Eigen::Index r = 0; r < s.omega.rows(); ++r) {
    s.omega.row(r) = (h.omega_mean + omega_chol.matrixL() * rng.normal_vector(2)).transpose();
  }
  for (int d = 0; d < dims.diseases; ++d) {
    s.alpha(d) = rng.beta(h.alpha_a, h.alpha_b);
    s.sigma2_phi(d) = rng.inv_gamma(h.phi_shape, h.phi_scale);
  }
  for (int d = 0; d < dims.diseases; ++d) {
    const DagarPrecision q(ctx.ordering(), s.alpha(d));
    s.phi.col(d) = mdagar_conditional_mean(s.spatial(), ctx.map(), d) +
                   std::sqrt(s.sigma2_phi(d)) * q.sample(rng);
  }
  if (dims.beta_size() > 0) {
    s.beta = GaussianCanonical(ctx.beta_precision(), ctx.beta_precision() * h.beta_mean).sample(rng);
  }
  return s;
}

}  // namespace stppm
