#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "stppm/random.hpp"

namespace stppm {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_normal_pdf(double x, double mean, double variance);
/// Gamma(shape, rate) log density.
double log_gamma_pdf(double x, double shape, double rate);
/// inv-Gamma(shape, scale) log density.
double log_inv_gamma_pdf(double x, double shape, double scale);
double log_beta_pdf(double x, double a, double b);
double log_mvn_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                   const Eigen::MatrixXd& covariance);
/// Log multivariate gamma function Gamma_p(a).
double log_multivariate_gamma(int p, double a);
/// inv-Wishart(df, scale) log density: |S|^{df/2} |X|^{-(df+p+1)/2} exp(-tr(S X^{-1})/2) / norm.
double log_inv_wishart_pdf(const Eigen::MatrixXd& x, double df, const Eigen::MatrixXd& scale);

struct GammaParams {
  double shape;
  double rate;

  double log_density(double x) const { return log_gamma_pdf(x, shape, rate); }
  double sample(Rng& rng) const { return rng.gamma(shape, rate); }
};

struct InvGammaParams {
  double shape;
  double scale;

  double log_density(double x) const { return log_inv_gamma_pdf(x, shape, scale); }
  double sample(Rng& rng) const { return rng.inv_gamma(shape, scale); }
};

struct InvWishartParams {
  double df;
  Eigen::MatrixXd scale;

  double log_density(const Eigen::MatrixXd& x) const { return log_inv_wishart_pdf(x, df, scale); }
  /// Bartlett decomposition of the matching Wishart(df, scale^{-1}) draw, inverted.
  Eigen::MatrixXd sample(Rng& rng) const;
};

/// Gaussian given in canonical form: precision P and linear term h, so that
/// the mean is P^{-1} h. Construction throws NumericalError when P is not
/// positive definite.
class GaussianCanonical {
 public:
  GaussianCanonical(const Eigen::MatrixXd& precision, const Eigen::VectorXd& linear);

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  Eigen::MatrixXd covariance() const;
  double log_density(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(Rng& rng) const;

 private:
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd mean_;
  double log_det_precision_ = 0.0;
};

/// Sparse-precision counterpart of GaussianCanonical, factorized with a
/// fill-reducing simplicial Cholesky.
class SparseGaussianCanonical {
 public:
  SparseGaussianCanonical(const Eigen::SparseMatrix<double>& precision,
                          const Eigen::VectorXd& linear);

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  double log_density(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(Rng& rng) const;

 private:
  Eigen::SparseMatrix<double> precision_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol_;
  Eigen::VectorXd mean_;
  double log_det_precision_ = 0.0;
};

/// Symmetric positive-definite inverse through Cholesky; throws NumericalError otherwise.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m);

}  // namespace stppm
