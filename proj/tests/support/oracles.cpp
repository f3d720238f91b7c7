#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

namespace stppm::testing {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

double log_multigamma(int p, double a) {
  double out = 0.25 * p * (p - 1) * std::log(std::numbers::pi);
  for (int j = 1; j <= p; ++j) out += std::lgamma(a + 0.5 * (1 - j));
  return out;
}

}  // namespace

double ari_by_pairs(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  double both = 0.0, in_a = 0.0, in_b = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      total += 1.0;
      if (sa) in_a += 1.0;
      if (sb) in_b += 1.0;
      if (sa && sb) both += 1.0;
    }
  }
  const double expected = total > 0.0 ? in_a * in_b / total : 0.0;
  const double max_index = 0.5 * (in_a + in_b);
  if (max_index == expected) return same_partition(a, b) ? 1.0 : 0.0;
  return (both - expected) / (max_index - expected);
}

double vi_by_table(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  double vi = 0.0;
  for (const auto& [key, c] : joint) {
    const double p = c / n;
    vi -= p * (std::log(p / (ra[key.first] / n)) + std::log(p / (rb[key.second] / n)));
  }
  return vi;
}

std::vector<std::vector<int>> set_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> rgs(static_cast<std::size_t>(n), 0);
  auto rec = [&](auto&& self, int pos, int max_label) -> void {
    if (pos == n) {
      out.push_back(rgs);
      return;
    }
    for (int l = 0; l <= max_label + 1; ++l) {
      rgs[static_cast<std::size_t>(pos)] = l;
      self(self, pos + 1, std::max(max_label, l));
    }
  };
  if (n == 0) return {{}};
  rec(rec, 1, 0);
  return out;
}

int boundary_by_scan(const ArealMap& map, const std::vector<int>& labels, int block) {
  const Eigen::MatrixXd m = dense_adjacency(map);
  int count = 0;
  for (int i = 0; i < map.size(); ++i) {
    if (labels[static_cast<std::size_t>(i)] != block) continue;
    for (int j = 0; j < map.size(); ++j) {
      if (m(i, j) != 0.0 && labels[static_cast<std::size_t>(j)] != block) ++count;
    }
  }
  return count;
}

Eigen::MatrixXd dense_adjacency(const ArealMap& map) {
  const int n = map.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && map.adjacent(i, j)) m(i, j) = 1.0;
  return m;
}

Eigen::MatrixXd dense_dagar(const ArealMap& map, const std::vector<int>& rank, double alpha) {
  const int n = map.size();
  const Eigen::MatrixXd m = dense_adjacency(map);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    int preds = 0;
    for (int j = 0; j < n; ++j)
      if (m(i, j) != 0.0 && rank[static_cast<std::size_t>(j)] < rank[static_cast<std::size_t>(i)]) ++preds;
    const double denom = 1.0 + (preds - 1) * alpha * alpha;
    for (int j = 0; j < n; ++j)
      if (m(i, j) != 0.0 && rank[static_cast<std::size_t>(j)] < rank[static_cast<std::size_t>(i)]) b(i, j) = alpha / denom;
    lambda(i, i) = denom / (1.0 - alpha * alpha);
  }
  const Eigen::MatrixXd ib = Eigen::MatrixXd::Identity(n, n) - b;
  return ib.transpose() * lambda * ib;
}

double mvn_logpdf_precision(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                            const Eigen::MatrixXd& precision) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(precision);
  const Eigen::VectorXd r = x - mean;
  const double log_det = es.eigenvalues().array().log().sum();
  return -0.5 * static_cast<double>(x.size()) * kLog2Pi + 0.5 * log_det - 0.5 * r.dot(precision * r);
}

double mvn_logpdf_cov(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd r = es.eigenvectors().transpose() * (x - mean);
  double out = -0.5 * static_cast<double>(x.size()) * kLog2Pi;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    out -= 0.5 * std::log(es.eigenvalues()(i)) + 0.5 * r(i) * r(i) / es.eigenvalues()(i);
  }
  return out;
}

Eigen::MatrixXd stacked_mdagar_precision(const ArealMap& map, const std::vector<int>& rank,
                                         const SpatialState& s) {
  const int n = map.size();
  const int nd = static_cast<int>(s.alpha.size());
  const Eigen::MatrixXd m = dense_adjacency(map);
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n * nd, n * nd);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n * nd, n * nd);
  for (int d = 0; d < nd; ++d) {
    p.block(d * n, d * n, n, n) = dense_dagar(map, rank, s.alpha(d)) / s.sigma2(d);
    for (int dp = 0; dp < d; ++dp) {
      const int row = d * (d - 1) / 2 + dp;
      const Eigen::MatrixXd a = s.omega(row, 0) * Eigen::MatrixXd::Identity(n, n) + s.omega(row, 1) * m;
      l.block(d * n, dp * n, n, n) = -a;
    }
  }
  return l.transpose() * p * l;
}

double stacked_mdagar_logpdf(const ArealMap& map, const std::vector<int>& rank, const SpatialState& s) {
  const int n = map.size();
  const int nd = static_cast<int>(s.alpha.size());
  Eigen::VectorXd x(n * nd);
  for (int d = 0; d < nd; ++d) x.segment(d * n, n) = s.phi.col(d);
  return mvn_logpdf_precision(x, Eigen::VectorXd::Zero(n * nd), stacked_mdagar_precision(map, rank, s));
}

double gamma_logpdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double inv_gamma_logpdf(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double beta_logpdf(double x, double a, double b) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log(1.0 - x);
}

double inv_wishart_logpdf(const Eigen::MatrixXd& x, double df, const Eigen::MatrixXd& scale) {
  const int p = static_cast<int>(x.rows());
  const double log_det_s = std::log(scale.determinant());
  const double log_det_x = std::log(x.determinant());
  const double trace = (scale * x.inverse()).trace();
  return 0.5 * df * log_det_s - 0.5 * df * p * std::log(2.0) - log_multigamma(p, 0.5 * df) -
         0.5 * (df + p + 1.0) * log_det_x - 0.5 * trace;
}

double oracle_log_likelihood(const ModelState& s, const ModelContext& ctx) {
  const ObservationPanel& panel = ctx.panel();
  const std::vector<int> lags = ctx.design().lags().all_lags();
  const int maxlag = *std::max_element(lags.begin(), lags.end());
  const int p = panel.covariate_count();
  const int q = static_cast<int>(lags.size());
  double out = 0.0;
  for (int i = 0; i < panel.areas(); ++i) {
    const int c = s.partition.label(i);
    for (int t = maxlag; t < panel.times(); ++t) {
      for (int d = 0; d < panel.diseases(); ++d) {
        double mean = s.phi(i, d);
        for (int l = 0; l < p; ++l) mean += panel.x(i, t, d, l) * s.beta(d * p + l);
        for (int r = 0; r < q; ++r) mean += panel.y(i, t - lags[static_cast<std::size_t>(r)], d) * s.gamma(c, d * q + r);
        const double var = s.sigma2(c, d);
        const double e = panel.y(i, t, d) - mean;
        out += -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * e * e / var;
      }
    }
  }
  return out;
}

double oracle_cluster_prior(const ModelState& s, const ModelContext& ctx, const ClusterParams& cp) {
  const auto& h = ctx.hyper();
  double out = mvn_logpdf_cov(cp.gamma, s.mu_gamma, s.sigma_gamma);
  for (Eigen::Index d = 0; d < cp.sigma2.size(); ++d) out += inv_gamma_logpdf(cp.sigma2(d), h.nu, h.nu * s.xi);
  return out;
}

double oracle_log_joint(const ModelState& s, const ModelContext& ctx) {
  const auto& h = ctx.hyper();
  const ArealMap& map = ctx.map();
  double out = oracle_log_likelihood(s, ctx);
  if (s.beta.size() > 0) out += mvn_logpdf_cov(s.beta, h.beta_mean, h.beta_cov);
  for (int j = 0; j < s.clusters(); ++j) {
    out += oracle_cluster_prior(s, ctx, {s.gamma.row(j).transpose(), s.sigma2.row(j).transpose()});
  }
  out += mvn_logpdf_cov(s.mu_gamma, h.mu_mean, h.mu_cov);
  out += inv_wishart_logpdf(s.sigma_gamma, h.iw_df, h.iw_scale);
  out += stacked_mdagar_logpdf(map, ctx.ordering().rank, s.spatial());
  for (Eigen::Index r = 0; r < s.omega.rows(); ++r) {
    out += mvn_logpdf_cov(s.omega.row(r).transpose(), h.omega_mean, h.omega_cov);
  }
  for (Eigen::Index d = 0; d < s.alpha.size(); ++d) {
    out += beta_logpdf(s.alpha(d), h.alpha_a, h.alpha_b);
    out += inv_gamma_logpdf(s.sigma2_phi(d), h.phi_shape, h.phi_scale);
  }
  out += gamma_logpdf(s.xi, h.xi_shape, h.xi_rate);
  const std::vector<int> labels(s.partition.labels().begin(), s.partition.labels().end());
  for (int j = 0; j < s.clusters(); ++j) {
    if (h.cohesion.kind == CohesionSpec::Kind::HB) {
      out += boundary_by_scan(map, labels, j) * std::log(h.cohesion.eta);
    } else {
      const auto size = std::count(labels.begin(), labels.end(), j);
      out += std::log(h.cohesion.mass) + std::lgamma(static_cast<double>(size));
    }
  }
  return out;
}

Eigen::MatrixXd random_spd(int dim, std::uint64_t seed, double scale) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = nd(gen);
  return scale * (a * a.transpose() / dim + Eigen::MatrixXd::Identity(dim, dim));
}

Toy make_toy(const ToyOptions& o) {
  std::mt19937_64 gen(o.seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = o.map.size();
  const int nd_ = o.diseases;
  const int p = o.covariates;
  const int q = o.lags.q();

  ObservationPanel panel(n, o.times, nd_);
  std::vector<std::string> names;
  for (int l = 0; l < p; ++l) names.push_back("x" + std::to_string(l + 1));
  panel.reset_covariates(names, o.times);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < o.times; ++t)
      for (int d = 0; d < nd_; ++d) {
        panel.y(i, t, d) = nd(gen);
        for (int l = 0; l < p; ++l) panel.x(i, t, d, l) = nd(gen);
      }

  ModelDims dims{n, o.times, nd_, p, q};
  Hyperparameters h = Hyperparameters::defaults(dims);
  h.beta_mean = Eigen::VectorXd::NullaryExpr(p * nd_, [&] { return 0.3 * nd(gen); });
  h.beta_cov = random_spd(p * nd_, o.seed + 11, 0.8);
  h.nu = 3.0;
  h.xi_shape = 1.5;
  h.xi_rate = 2.0;
  h.cohesion = o.cohesion;
  h.mu_mean = Eigen::VectorXd::NullaryExpr(q * nd_, [&] { return 0.2 * nd(gen); });
  h.mu_cov = random_spd(q * nd_, o.seed + 12, 0.5);
  h.iw_df = q * nd_ + 3.0;
  h.iw_scale = random_spd(q * nd_, o.seed + 13, 0.3);
  h.omega_mean = Eigen::Vector2d(0.4, -0.1);
  h.omega_cov = random_spd(2, o.seed + 14, 0.6);
  h.alpha_a = 3.0;
  h.alpha_b = 4.0;
  h.phi_shape = 2.5;
  h.phi_scale = 0.7;

  Toy toy;
  toy.ctx = std::make_unique<ModelContext>(std::move(panel), o.map, o.lags, h);

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i % o.clusters;
  std::shuffle(labels.begin(), labels.end(), gen);
  ModelState s = ModelState::initial(dims, h);
  s.partition = Partition::from_labels(labels);
  const int k = s.partition.block_count();
  s.beta = Eigen::VectorXd::NullaryExpr(p * nd_, [&] { return 0.5 * nd(gen); });
  s.gamma = Eigen::MatrixXd::NullaryExpr(k, q * nd_, [&] { return 0.3 * nd(gen); });
  s.mu_gamma = Eigen::VectorXd::NullaryExpr(q * nd_, [&] { return 0.2 * nd(gen); });
  s.sigma_gamma = random_spd(q * nd_, o.seed + 21, 0.4);
  s.phi = Eigen::MatrixXd::NullaryExpr(n, nd_, [&] { return 0.5 * nd(gen); });
  s.omega = Eigen::MatrixXd::NullaryExpr(bridge_pair_count(nd_), 2, [&] { return 0.4 * nd(gen); });
  s.alpha = Eigen::VectorXd::NullaryExpr(nd_, [&] { return 0.2 + 0.6 * unif(gen); });
  s.sigma2_phi = Eigen::VectorXd::NullaryExpr(nd_, [&] { return 0.5 + unif(gen); });
  s.sigma2 = Eigen::MatrixXd::NullaryExpr(k, nd_, [&] { return 0.5 + unif(gen); });
  s.xi = 0.5 + 1.5 * unif(gen);
  toy.state = s;
  return toy;
}

ModelState move_area(const ModelState& s, int area, int target, const ClusterParams* fresh) {
  const int k = s.clusters();
  std::vector<int> labels(s.partition.labels().begin(), s.partition.labels().end());
  std::vector<ClusterParams> params;
  for (int j = 0; j < k; ++j) params.push_back({s.gamma.row(j).transpose(), s.sigma2.row(j).transpose()});
  if (target < 0) {
    labels[static_cast<std::size_t>(area)] = k;
    params.push_back(*fresh);
  } else {
    labels[static_cast<std::size_t>(area)] = target;
  }
  const Partition part = Partition::from_labels(labels);
  ModelState out = s;
  out.partition = part;
  out.gamma.resize(part.block_count(), s.gamma.cols());
  out.sigma2.resize(part.block_count(), s.sigma2.cols());
  for (int i = 0; i < s.partition.size(); ++i) {
    const auto& cp = params[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    out.gamma.row(part.label(i)) = cp.gamma.transpose();
    out.sigma2.row(part.label(i)) = cp.sigma2.transpose();
  }
  return out;
}

}  // namespace stppm::testing
