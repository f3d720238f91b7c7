#include "stppm/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "stppm/errors.hpp"

namespace stppm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

double log_normal_pdf(double x, double mean, double variance) {
  const double r = x - mean;
  return -0.5 * (kLog2Pi + std::log(variance) + r * r / variance);
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (x <= 0.0) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_inv_gamma_pdf(double x, double shape, double scale) {
  if (x <= 0.0) return kNegInf;
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double log_beta_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return kNegInf;
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log1p(-x);
}

double log_mvn_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                   const Eigen::MatrixXd& covariance) {
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance not positive definite");
  const Eigen::VectorXd w = llt.matrixL().solve(x - mean);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det + w.squaredNorm());
}

double log_multivariate_gamma(int p, double a) {
  double out = 0.25 * p * (p - 1) * std::log(std::numbers::pi);
  for (int j = 0; j < p; ++j) out += std::lgamma(a - 0.5 * j);
  return out;
}

double log_inv_wishart_pdf(const Eigen::MatrixXd& x, double df, const Eigen::MatrixXd& scale) {
  const int p = static_cast<int>(x.rows());
  Eigen::LLT<Eigen::MatrixXd> lx(x);
  Eigen::LLT<Eigen::MatrixXd> ls(scale);
  if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return kNegInf;
  const double log_det_x = 2.0 * lx.matrixLLT().diagonal().array().log().sum();
  const double log_det_s = 2.0 * ls.matrixLLT().diagonal().array().log().sum();
  const double trace = (scale * lx.solve(Eigen::MatrixXd::Identity(p, p))).trace();
  return 0.5 * df * log_det_s - 0.5 * df * p * std::log(2.0) - log_multivariate_gamma(p, 0.5 * df) -
         0.5 * (df + p + 1.0) * log_det_x - 0.5 * trace;
}

Eigen::MatrixXd InvWishartParams::sample(Rng& rng) const {
  const int p = static_cast<int>(scale.rows());
  // Sigma^{-1} ~ Wishart(df, S^{-1}) = L A A^T L^T with L L^T = S^{-1}.
  const Eigen::MatrixXd scale_inv = spd_inverse(scale);
  Eigen::LLT<Eigen::MatrixXd> llt(scale_inv);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(rng.chi_squared(df - i));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Eigen::MatrixXd la = llt.matrixL() * a;
  const Eigen::MatrixXd wishart = la * la.transpose();
  Eigen::MatrixXd out = spd_inverse(wishart);
  return 0.5 * (out + out.transpose());
}

GaussianCanonical::GaussianCanonical(const Eigen::MatrixXd& precision, const Eigen::VectorXd& linear)
    : chol_(precision) {
  if (chol_.info() != Eigen::Success) {
    throw NumericalError("Cholesky of a conditional precision failed");
  }
  mean_ = chol_.solve(linear);
  log_det_precision_ = 2.0 * chol_.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd GaussianCanonical::covariance() const {
  return chol_.solve(Eigen::MatrixXd::Identity(mean_.size(), mean_.size()));
}

double GaussianCanonical::log_density(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd w = chol_.matrixU() * (x - mean_);
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi - log_det_precision_ + w.squaredNorm());
}

Eigen::VectorXd GaussianCanonical::sample(Rng& rng) const {
  const Eigen::VectorXd z = rng.normal_vector(mean_.size());
  return mean_ + chol_.matrixU().solve(z);
}

SparseGaussianCanonical::SparseGaussianCanonical(const Eigen::SparseMatrix<double>& precision,
                                                 const Eigen::VectorXd& linear)
    : precision_(precision) {
  chol_.compute(precision_);
  if (chol_.info() != Eigen::Success) {
    throw NumericalError("sparse Cholesky of a conditional precision failed");
  }
  mean_ = chol_.solve(linear);
  const Eigen::VectorXd diag = Eigen::SparseMatrix<double>(chol_.matrixL()).diagonal();
  log_det_precision_ = 2.0 * diag.array().log().sum();
}

double SparseGaussianCanonical::log_density(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd r = x - mean_;
  const double quad = r.dot(precision_ * r);
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi - log_det_precision_ + quad);
}

Eigen::VectorXd SparseGaussianCanonical::sample(Rng& rng) const {
  // P A P^T = L L^T  =>  x = P^T L^{-T} z has covariance A^{-1}.
  const Eigen::VectorXd z = rng.normal_vector(mean_.size());
  const Eigen::VectorXd w = chol_.matrixU().solve(z);
  return mean_ + chol_.permutationPinv() * w;
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("matrix not positive definite");
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

}  // namespace stppm
