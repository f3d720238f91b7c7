#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "stppm/arealgraph.hpp"
#include "stppm/random.hpp"

namespace stppm {

/// DAGAR precision Q(alpha) = (I - B)^T Lambda (I - B).
///
/// For area i with n_i directed neighbors:
///   b_{i i'} = alpha / (1 + (n_i - 1) alpha^2)   for i' in N(i)
///   lambda_i = (1 + (n_i - 1) alpha^2) / (1 - alpha^2)
/// B is strictly lower triangular in the ordering, so det(I - B) = 1 and
/// log det Q = sum log lambda_i.
class DagarPrecision {
 public:
  /// Throws std::invalid_argument unless alpha is in [0, 1).
  DagarPrecision(const DagOrdering& ordering, double alpha);

  double alpha() const noexcept { return alpha_; }
  int size() const noexcept { return static_cast<int>(lambda_.size()); }
  const Eigen::VectorXd& lambda() const noexcept { return lambda_; }
  double log_determinant() const noexcept { return log_det_; }

  /// Q as a symmetric sparse matrix.
  const Eigen::SparseMatrix<double>& matrix() const noexcept { return q_; }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& b_matrix() const noexcept { return b_; }

  /// v^T Q v = sum_i lambda_i (v_i - sum_{i' in N(i)} b_i v_{i'})^2, O(edges).
  double quadratic_form(const Eigen::VectorXd& v) const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& v) const { return q_ * v; }

  /// Draw from N(0, Q^{-1}) by back-substitution through Lambda^{1/2} (I - B).
  Eigen::VectorXd sample(Rng& rng) const;

 private:
  double alpha_ = 0.0;
  std::vector<int> order_;
  Eigen::VectorXd lambda_;
  double log_det_ = 0.0;
  Eigen::SparseMatrix<double, Eigen::RowMajor> b_;
  Eigen::SparseMatrix<double> q_;
};

/// Bridge coefficients of A = omega0 I + omega1 M.
struct BridgeCoefficients {
  double same_area = 0.0;  ///< omega0
  double neighbor = 0.0;   ///< omega1

  friend bool operator==(const BridgeCoefficients&, const BridgeCoefficients&) = default;
};

/// A v = omega0 v + omega1 M v, computed from adjacency lists.
Eigen::VectorXd bridge_apply(const BridgeCoefficients& omega, const ArealMap& map,
                             const Eigen::VectorXd& v);
Eigen::SparseMatrix<double> bridge_matrix(const BridgeCoefficients& omega, const ArealMap& map);

/// Number of (d, d') pairs with d' < d among D diseases.
inline int bridge_pair_count(int diseases) { return diseases * (diseases - 1) / 2; }
/// Row of the (d, d') pair, d' < d, 0-based: pairs are (1,0), (2,0), (2,1), (3,0), ...
inline int bridge_pair_index(int d, int d_prev) { return d * (d - 1) / 2 + d_prev; }

/// MDAGAR spatial effects.
struct SpatialState {
  Eigen::MatrixXd phi;       ///< n x D
  Eigen::VectorXd alpha;     ///< per disease
  Eigen::VectorXd sigma2;    ///< per disease scale sigma^2_phi
  Eigen::MatrixXd omega;     ///< bridge_pair_count(D) x 2, columns (omega0, omega1)

  BridgeCoefficients bridge(int d, int d_prev) const;
};

/// sum_{d' < d} A_{d d'} phi_{d'}.
Eigen::VectorXd mdagar_conditional_mean(const SpatialState& state, const ArealMap& map, int d);

/// log N(phi_1; 0, s_1 Q_1^{-1}) + sum_{d >= 2} log N(phi_d; sum_{d'<d} A_{dd'} phi_{d'}, s_d Q_d^{-1}).
double mdagar_log_density(const SpatialState& state, std::span<const DagarPrecision> precisions,
                          const ArealMap& map);
double mdagar_log_density(const SpatialState& state, const DagOrdering& ordering,
                          const ArealMap& map);

}  // namespace stppm
