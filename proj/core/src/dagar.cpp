#include "stppm/dagar.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "stppm/distributions.hpp"

namespace stppm {

DagarPrecision::DagarPrecision(const DagOrdering& ordering, double alpha)
    : alpha_(alpha), order_(ordering.order) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("DAGAR alpha must lie in [0, 1)");
  const int n = ordering.size();
  const double a2 = alpha * alpha;
  lambda_.resize(n);
  log_det_ = 0.0;
  std::vector<Eigen::Triplet<double>> bt;
  for (int i = 0; i < n; ++i) {
    const int np = ordering.predecessor_count(i);
    const double denom = 1.0 + (np - 1) * a2;
    lambda_(i) = np == 0 ? 1.0 : denom / (1.0 - a2);
    log_det_ += std::log(lambda_(i));
    if (np == 0 || alpha == 0.0) continue;
    const double b = alpha / denom;
    for (int j : ordering.directed_neighbors[static_cast<std::size_t>(i)]) bt.emplace_back(i, j, b);
  }
  b_.resize(n, n);
  b_.setFromTriplets(bt.begin(), bt.end());

  Eigen::SparseMatrix<double> identity(n, n);
  identity.setIdentity();
  const Eigen::SparseMatrix<double> l = identity - Eigen::SparseMatrix<double>(b_);
  q_ = Eigen::SparseMatrix<double>(l.transpose() * lambda_.asDiagonal() * l);
  q_.prune(0.0);
}

double DagarPrecision::quadratic_form(const Eigen::VectorXd& v) const {
  double total = 0.0;
  for (int i = 0; i < size(); ++i) {
    double r = v(i);
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(b_, i); it; ++it) {
      r -= it.value() * v(it.col());
    }
    total += lambda_(i) * r * r;
  }
  return total;
}

Eigen::VectorXd DagarPrecision::sample(Rng& rng) const {
  const int n = size();
  const Eigen::VectorXd z = rng.normal_vector(n);
  Eigen::VectorXd x(n);
  for (int i : order_) {
    double s = z(i) / std::sqrt(lambda_(i));
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(b_, i); it; ++it) {
      s += it.value() * x(it.col());
    }
    x(i) = s;
  }
  return x;
}

Eigen::VectorXd bridge_apply(const BridgeCoefficients& omega, const ArealMap& map,
                             const Eigen::VectorXd& v) {
  if (v.size() != map.size()) throw std::invalid_argument("vector length does not match the map");
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < map.size(); ++i) {
    double s = 0.0;
    for (int j : map.neighbors(i)) s += v(j);
    out(i) = omega.same_area * v(i) + omega.neighbor * s;
  }
  return out;
}

Eigen::SparseMatrix<double> bridge_matrix(const BridgeCoefficients& omega, const ArealMap& map) {
  Eigen::SparseMatrix<double> identity(map.size(), map.size());
  identity.setIdentity();
  return omega.same_area * identity + omega.neighbor * map.adjacency();
}

BridgeCoefficients SpatialState::bridge(int d, int d_prev) const {
  const int row = bridge_pair_index(d, d_prev);
  return {omega(row, 0), omega(row, 1)};
}

Eigen::VectorXd mdagar_conditional_mean(const SpatialState& state, const ArealMap& map, int d) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(map.size());
  for (int dp = 0; dp < d; ++dp) mean += bridge_apply(state.bridge(d, dp), map, state.phi.col(dp));
  return mean;
}

double mdagar_log_density(const SpatialState& state, std::span<const DagarPrecision> precisions,
                          const ArealMap& map) {
  const int n = map.size();
  const int D = static_cast<int>(state.phi.cols());
  if (static_cast<int>(precisions.size()) != D) {
    throw std::invalid_argument("one DAGAR precision per disease is required");
  }
  double total = 0.0;
  for (int d = 0; d < D; ++d) {
    const Eigen::VectorXd r = state.phi.col(d) - mdagar_conditional_mean(state, map, d);
    const double s2 = state.sigma2(d);
    const auto& q = precisions[static_cast<std::size_t>(d)];
    total += -0.5 * n * (kLog2Pi + std::log(s2)) + 0.5 * q.log_determinant() -
             0.5 * q.quadratic_form(r) / s2;
  }
  return total;
}

double mdagar_log_density(const SpatialState& state, const DagOrdering& ordering,
                          const ArealMap& map) {
  std::vector<DagarPrecision> precisions;
  for (int d = 0; d < state.phi.cols(); ++d) precisions.emplace_back(ordering, state.alpha(d));
  return mdagar_log_density(state, precisions, map);
}

}  // namespace stppm
