#include "stppm/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "stppm/errors.hpp"

namespace stppm {

namespace {

// Running mean that returns the common value exactly when all inputs agree.
template <typename T>
class RunningMean {
 public:
  void add(const T& x) {
    ++count_;
    if (count_ == 1) {
      mean_ = x;
    } else {
      mean_ = mean_ + (x - mean_) / static_cast<double>(count_);
    }
  }
  const T& value() const { return mean_; }

 private:
  long count_ = 0;
  T mean_{};
};

double sequential_sum(const double* data, Eigen::Index size, Eigen::Index stride) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < size; ++i) s += data[i * stride];
  return s;
}

}  // namespace

Eigen::VectorXd observation_loglik(const ModelState& state, const ModelContext& ctx) {
  const auto& dims = ctx.dims();
  const int teff = ctx.usable_count();
  Eigen::VectorXd out(static_cast<Eigen::Index>(dims.areas) * teff * dims.diseases);
  Eigen::Index pos = 0;
  for (int i = 0; i < dims.areas; ++i) {
    const int c = state.partition.label(i);
    for (int t = ctx.design().first_time(); t < ctx.design().end_time(); ++t) {
      for (int d = 0; d < dims.diseases; ++d) {
        out(pos++) = log_normal_pdf(ctx.panel().y(i, t, d), fitted_mean(state, ctx, i, t, d),
                                    state.sigma2(c, d));
      }
    }
  }
  return out;
}

Eigen::MatrixXd pointwise_loglik(const PosteriorChain& chain, const ModelContext& ctx) {
  if (chain.empty()) throw std::invalid_argument("chain has no saved states");
  if (!(chain.dims == ctx.dims())) throw DataError("chain dimensions do not match the data");
  const Eigen::Index obs = static_cast<Eigen::Index>(ctx.dims().areas) * ctx.usable_count() * ctx.dims().diseases;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(chain.size()), obs);
  for (std::size_t s = 0; s < chain.size(); ++s) {
    out.row(static_cast<Eigen::Index>(s)) = observation_loglik(chain.states[s], ctx).transpose();
  }
  return out;
}

FitReport information_criteria(const Eigen::MatrixXd& pointwise,
                               const Eigen::VectorXd& plugin_pointwise, int p_total) {
  const Eigen::Index draws = pointwise.rows();
  const Eigen::Index obs = pointwise.cols();
  if (draws < 1) throw std::invalid_argument("pointwise log-likelihood has no draws");
  if (plugin_pointwise.size() != obs) {
    throw std::invalid_argument("plug-in log-likelihood has the wrong length");
  }
  FitReport r;
  r.n_obs = static_cast<long>(obs);
  r.p_total = p_total;
  r.log_likelihood = sequential_sum(plugin_pointwise.data(), obs, 1);

  RunningMean<double> mean_ll;
  for (Eigen::Index s = 0; s < draws; ++s) {
    mean_ll.add(sequential_sum(pointwise.data() + s, obs, draws));
  }
  r.mean_log_likelihood = mean_ll.value();

  r.aic = -2.0 * r.log_likelihood + 2.0 * p_total;
  r.bic = -2.0 * r.log_likelihood + p_total * std::log(static_cast<double>(obs));
  if (draws < 2) return r;

  r.p_dic = 2.0 * (r.log_likelihood - r.mean_log_likelihood);
  r.dic = -2.0 * r.log_likelihood + 2.0 * *r.p_dic;

  double lppd = 0.0;
  double p_waic = 0.0;
  for (Eigen::Index o = 0; o < obs; ++o) {
    const auto col = pointwise.col(o);
    const double top = col.maxCoeff();
    double acc = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
    for (Eigen::Index s = 0; s < draws; ++s) {
      const double v = col(s);
      acc += std::exp(v - top);
      const double delta = v - mean;
      mean += delta / static_cast<double>(s + 1);
      m2 += delta * (v - mean);
    }
    lppd += top + std::log(acc / static_cast<double>(draws));
    p_waic += std::max(0.0, m2 / static_cast<double>(draws - 1));
  }
  r.lppd = lppd;
  r.p_waic = p_waic;
  r.waic = -2.0 * (lppd - p_waic);
  return r;
}

double rmse(const PosteriorChain& chain, const ModelContext& ctx) {
  if (chain.empty()) throw std::invalid_argument("chain has no saved states");
  const auto& dims = ctx.dims();
  double ss = 0.0;
  long count = 0;
  for (int i = 0; i < dims.areas; ++i) {
    for (int t = ctx.design().first_time(); t < ctx.design().end_time(); ++t) {
      for (int d = 0; d < dims.diseases; ++d) {
        RunningMean<double> fit;
        for (const auto& s : chain.states) fit.add(fitted_mean(s, ctx, i, t, d));
        const double r = ctx.panel().y(i, t, d) - fit.value();
        ss += r * r;
        ++count;
      }
    }
  }
  return std::sqrt(ss / static_cast<double>(count));
}

int count_parameters(const ModelDims& dims, int clusters) {
  const int qd = dims.gamma_size();
  return dims.beta_size() + clusters * qd + clusters * dims.diseases + dims.areas * dims.diseases +
         2 * bridge_pair_count(dims.diseases) + dims.diseases + dims.diseases + 1 + qd +
         qd * (qd + 1) / 2;
}

std::vector<int> match_clusters(const Partition& reference, const Partition& draw) {
  if (reference.size() != draw.size()) throw std::invalid_argument("partitions have different sizes");
  const int kr = reference.block_count();
  const int kd = draw.block_count();
  std::vector<std::vector<int>> overlap(static_cast<std::size_t>(kr), std::vector<int>(static_cast<std::size_t>(kd), 0));
  for (int i = 0; i < reference.size(); ++i) {
    ++overlap[static_cast<std::size_t>(reference.label(i))][static_cast<std::size_t>(draw.label(i))];
  }
  std::vector<int> out(static_cast<std::size_t>(kr), 0);
  for (int j = 0; j < kr; ++j) {
    const auto& row = overlap[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(j)] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

ModelState plugin_state(const PosteriorChain& chain, const Partition& estimate) {
  if (chain.empty()) throw std::invalid_argument("chain has no saved states");
  const int k = estimate.block_count();
  RunningMean<Eigen::VectorXd> beta, mu_gamma, alpha, sigma2_phi;
  RunningMean<Eigen::MatrixXd> sigma_gamma, phi, omega;
  RunningMean<double> xi;
  std::vector<RunningMean<Eigen::VectorXd>> gamma(static_cast<std::size_t>(k));
  std::vector<RunningMean<Eigen::VectorXd>> sigma2(static_cast<std::size_t>(k));
  for (const auto& s : chain.states) {
    beta.add(s.beta);
    mu_gamma.add(s.mu_gamma);
    alpha.add(s.alpha);
    sigma2_phi.add(s.sigma2_phi);
    sigma_gamma.add(s.sigma_gamma);
    phi.add(s.phi);
    omega.add(s.omega);
    xi.add(s.xi);
    const auto match = match_clusters(estimate, s.partition);
    for (int j = 0; j < k; ++j) {
      const int c = match[static_cast<std::size_t>(j)];
      gamma[static_cast<std::size_t>(j)].add(s.gamma.row(c).transpose());
      sigma2[static_cast<std::size_t>(j)].add(s.sigma2.row(c).transpose());
    }
  }
  ModelState out;
  out.beta = beta.value();
  out.mu_gamma = mu_gamma.value();
  out.alpha = alpha.value();
  out.sigma2_phi = sigma2_phi.value();
  out.sigma_gamma = sigma_gamma.value();
  out.phi = phi.value();
  out.omega = omega.value();
  out.xi = xi.value();
  out.partition = estimate;
  out.gamma.resize(k, chain.dims.gamma_size());
  out.sigma2.resize(k, chain.dims.diseases);
  for (int j = 0; j < k; ++j) {
    out.gamma.row(j) = gamma[static_cast<std::size_t>(j)].value().transpose();
    out.sigma2.row(j) = sigma2[static_cast<std::size_t>(j)].value().transpose();
  }
  return out;
}

FitReport evaluate_fit(const PosteriorChain& chain, const ModelContext& ctx,
                       const Partition& estimate) {
  const Eigen::MatrixXd pw = pointwise_loglik(chain, ctx);
  const ModelState plug = plugin_state(chain, estimate);
  FitReport r = information_criteria(pw, observation_loglik(plug, ctx),
                                     count_parameters(ctx.dims(), estimate.block_count()));
  r.rmse = rmse(chain, ctx);
  return r;
}

}  // namespace stppm
