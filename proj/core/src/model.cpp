#include "stppm/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

namespace stppm {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

bool is_spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (!m.isApprox(m.transpose(), 1e-12) && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

void require_spd(const Eigen::MatrixXd& m, Eigen::Index size, const std::string& name) {
  require(m.rows() == size && m.cols() == size,
          name + " must be " + std::to_string(size) + " x " + std::to_string(size));
  require(is_spd(m), name + " must be symmetric positive definite");
}

}  // namespace

Hyperparameters Hyperparameters::defaults(const ModelDims& dims) {
  Hyperparameters h;
  const int pd = dims.beta_size();
  const int qd = dims.gamma_size();
  h.beta_mean = Eigen::VectorXd::Zero(pd);
  h.beta_cov = Eigen::MatrixXd::Identity(pd, pd);
  h.mu_mean = Eigen::VectorXd::Zero(qd);
  h.mu_cov = Eigen::MatrixXd::Identity(qd, qd);
  h.iw_scale = 0.1 * Eigen::MatrixXd::Identity(qd, qd);
  h.iw_df = std::max(2.0 * (dims.lags + 1), static_cast<double>(qd + 2));
  return h;
}

void Hyperparameters::validate(const ModelDims& dims) const {
  const int pd = dims.beta_size();
  const int qd = dims.gamma_size();
  require(beta_mean.size() == pd, "mu_beta must have length pD = " + std::to_string(pd));
  if (pd > 0) require_spd(beta_cov, pd, "Sigma_beta");
  require(mu_mean.size() == qd, "mu_mu must have length qD = " + std::to_string(qd));
  require_spd(mu_cov, qd, "Sigma_mu");
  require_spd(iw_scale, qd, "S");
  require(iw_df > qd - 1, "df must exceed qD - 1");
  require_spd(omega_cov, 2, "Sigma_omega");
  require(nu > 0 && std::isfinite(nu), "nu must be positive");
  require(xi_shape > 0 && xi_rate > 0, "a_xi and b_xi must be positive");
  require(alpha_a > 0 && alpha_b > 0, "a_alpha and b_alpha must be positive");
  require(phi_shape > 0 && phi_scale > 0, "a_phi and b_phi must be positive");
  require(aux_components >= 1, "at least one auxiliary component is required");
  require(alpha_target_acceptance > 0 && alpha_target_acceptance < 1,
          "alpha target acceptance must lie in (0, 1)");
  require(alpha_initial_step > 0, "alpha initial step must be positive");
  cohesion.validate();
}

SpatialState ModelState::spatial() const { return SpatialState{phi, alpha, sigma2_phi, omega}; }

void ModelState::set_spatial(const SpatialState& s) {
  phi = s.phi;
  alpha = s.alpha;
  sigma2_phi = s.sigma2;
  omega = s.omega;
}

ModelState ModelState::initial(const ModelDims& dims, const Hyperparameters& hyper) {
  const int qd = dims.gamma_size();
  ModelState s;
  s.beta = hyper.beta_mean;
  s.mu_gamma = hyper.mu_mean;
  s.gamma = hyper.mu_mean.transpose();
  if (hyper.iw_df > qd + 1) {
    s.sigma_gamma = hyper.iw_scale / (hyper.iw_df - qd - 1);
  } else {
    s.sigma_gamma = hyper.iw_scale;
  }
  s.partition = Partition::single_block(dims.areas);
  s.phi = Eigen::MatrixXd::Zero(dims.areas, dims.diseases);
  const int pairs = bridge_pair_count(dims.diseases);
  s.omega.resize(pairs, 2);
  for (int r = 0; r < pairs; ++r) s.omega.row(r) = hyper.omega_mean.transpose();
  s.alpha = Eigen::VectorXd::Constant(dims.diseases, 0.5);
  s.sigma2_phi = Eigen::VectorXd::Ones(dims.diseases);
  s.sigma2 = Eigen::MatrixXd::Ones(1, dims.diseases);
  s.xi = 1.0;
  return s;
}

void ModelState::validate(const ModelDims& dims) const {
  const int k = clusters();
  require(partition.size() == dims.areas, "partition size does not match the area count");
  require(beta.size() == dims.beta_size(), "beta has the wrong length");
  require(gamma.rows() == k && gamma.cols() == dims.gamma_size(), "gamma* has the wrong shape");
  require(sigma2.rows() == k && sigma2.cols() == dims.diseases, "sigma*^2 has the wrong shape");
  require(mu_gamma.size() == dims.gamma_size(), "mu_gamma has the wrong length");
  require_spd(sigma_gamma, dims.gamma_size(), "Sigma_gamma");
  require(phi.rows() == dims.areas && phi.cols() == dims.diseases, "phi has the wrong shape");
  require(omega.rows() == bridge_pair_count(dims.diseases) && omega.cols() == 2,
          "omega has the wrong shape");
  require(alpha.size() == dims.diseases && sigma2_phi.size() == dims.diseases,
          "alpha and sigma^2_phi need one entry per disease");
  for (int d = 0; d < dims.diseases; ++d) {
    require(alpha(d) > 0 && alpha(d) < 1, "alpha must lie in (0, 1)");
    require(sigma2_phi(d) > 0, "sigma^2_phi must be positive");
  }
  require((sigma2.array() > 0).all(), "sigma*^2 must be positive");
  require(xi > 0, "xi must be positive");
}

std::string describe(const ModelState& s) {
  const Eigen::IOFormat fmt(Eigen::FullPrecision, Eigen::DontAlignCols, ", ", "; ", "", "", "[", "]");
  std::ostringstream os;
  os.precision(17);
  os << "clusters: " << s.clusters() << "\n";
  os << "labels:";
  for (int c : s.partition.labels()) os << ' ' << c;
  os << "\n";
  os << "beta: " << s.beta.transpose().format(fmt) << "\n";
  os << "gamma*: " << s.gamma.format(fmt) << "\n";
  os << "sigma*^2: " << s.sigma2.format(fmt) << "\n";
  os << "mu_gamma: " << s.mu_gamma.transpose().format(fmt) << "\n";
  os << "Sigma_gamma: " << s.sigma_gamma.format(fmt) << "\n";
  os << "alpha: " << s.alpha.transpose().format(fmt) << "\n";
  os << "sigma^2_phi: " << s.sigma2_phi.transpose().format(fmt) << "\n";
  os << "omega: " << s.omega.format(fmt) << "\n";
  os << "xi: " << s.xi << "\n";
  os << "phi: " << s.phi.format(fmt) << "\n";
  return os.str();
}

int Schedule::saved_count() const noexcept {
  if (iterations <= burnin || thin < 1) return 0;
  return (iterations - burnin) / thin;
}

bool Schedule::saves(int iteration) const noexcept {
  return iteration > burnin && iteration <= iterations && (iteration - burnin) % thin == 0;
}

void Schedule::validate() const {
  require(iterations >= 0, "iterations must be nonnegative");
  require(burnin >= 0 && burnin <= iterations, "burn-in must lie in [0, iterations]");
  require(iterations == 0 || burnin < iterations, "burn-in must be smaller than iterations");
  require(thin >= 1, "thin must be at least 1");
}

}  // namespace stppm
