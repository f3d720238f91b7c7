#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "stppm/dagar.hpp"

namespace stppm {
namespace {

Eigen::MatrixXd dense(const DagarPrecision& q) { return Eigen::MatrixXd(q.matrix()); }

ArealMap random_map(std::mt19937_64& gen, int n) {
  std::bernoulli_distribution edge(0.35);
  std::vector<std::vector<int>> nb(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (edge(gen)) nb[static_cast<std::size_t>(i)].push_back(j);
  return ArealMap(n, nb);
}

TEST(Dagar, IdentityAtZero) {
  const ArealMap m = ArealMap::grid(3, 4);
  const DagarPrecision q(dag_ordering(m), 0.0);
  EXPECT_TRUE(dense(q) == Eigen::MatrixXd::Identity(12, 12));
  EXPECT_EQ(q.log_determinant(), 0.0);
}

TEST(Dagar, TwoAreaHandMatrix) {
  const ArealMap m(2, {{1}, {0}});
  const DagarPrecision q(dag_ordering(m), 0.5);
  Eigen::Matrix2d expected;
  expected << 4.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0, 4.0 / 3.0;
  EXPECT_LE((dense(q) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dagar, SingleArea) {
  const ArealMap m(1, {{}});
  const DagarPrecision q(dag_ordering(m), 0.8);
  EXPECT_EQ(dense(q)(0, 0), 1.0);
}

TEST(Dagar, RejectsAlphaOutOfRange) {
  const ArealMap m = ArealMap::grid(2, 2);
  EXPECT_THROW(DagarPrecision(dag_ordering(m), 1.0), std::invalid_argument);
  EXPECT_THROW(DagarPrecision(dag_ordering(m), -0.1), std::invalid_argument);
}

TEST(Dagar, MatchesDenseConstructionAndDeterminant) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> ua(0.0, 0.95);
  std::uniform_int_distribution<int> un(1, 12);
  for (int rep = 0; rep < 60; ++rep) {
    const ArealMap m = random_map(gen, un(gen));
    const auto rule = rep % 2 == 0 ? OrderingRule::ByIndex : OrderingRule::MaxDegreeFirst;
    const DagOrdering o = dag_ordering(m, rule);
    const double alpha = ua(gen);
    const DagarPrecision q(o, alpha);
    const Eigen::MatrixXd ref = testing::dense_dagar(m, o.rank, alpha);
    EXPECT_LE((dense(q) - ref).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(q.log_determinant(), std::log(ref.determinant()), 1e-10);
    EXPECT_NEAR(std::exp(q.log_determinant()), q.lambda().prod(), 1e-10 * q.lambda().prod());
    // Symmetric positive definite.
    EXPECT_LE((dense(q) - dense(q).transpose()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ref).eigenvalues().minCoeff(), 0.0);
    // B strictly lower triangular in the ordering.
    const Eigen::MatrixXd b(q.b_matrix());
    for (int i = 0; i < m.size(); ++i)
      for (int j = 0; j < m.size(); ++j) {
        if (b(i, j) != 0.0) {
          EXPECT_LT(o.rank[static_cast<std::size_t>(j)], o.rank[static_cast<std::size_t>(i)]);
        }
      }
    const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(m.size(), [&] { return ua(gen) - 0.5; });
    EXPECT_NEAR(q.quadratic_form(v), v.dot(ref * v), 1e-12);
  }
}

TEST(Dagar, SmallestEigenvalueDecreasesInAlpha) {
  const ArealMap m = ArealMap::grid(3, 3);
  const DagOrdering o = dag_ordering(m);
  double previous = 2.0;
  for (double a = 0.0; a < 0.99; a += 0.05) {
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense(DagarPrecision(o, a))).eigenvalues()(0);
    EXPECT_LT(lo, previous);
    previous = lo;
  }
}

TEST(Dagar, SampleHasPrecisionQ) {
  const ArealMap m = ArealMap::grid(2, 2);
  const DagarPrecision q(dag_ordering(m), 0.6);
  Rng rng(8);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(4, 4);
  const int draws = 200000;
  for (int s = 0; s < draws; ++s) {
    const Eigen::VectorXd x = q.sample(rng);
    cov += x * x.transpose();
  }
  cov /= draws;
  const Eigen::MatrixXd target = dense(q).inverse();
  EXPECT_LE((cov - target).cwiseAbs().maxCoeff(), 0.03);
}

TEST(Bridge, Examples) {
  const ArealMap path(3, {{1}, {0, 2}, {1}});
  const Eigen::Vector3d v(0.3, -1.0, 2.5);
  EXPECT_EQ(bridge_apply({1.0, 0.0}, path, v), Eigen::VectorXd(v));
  EXPECT_EQ(bridge_apply({0.0, 1.0}, path, Eigen::Vector3d::Ones()), Eigen::VectorXd(Eigen::Vector3d(1, 2, 1)));
  const ArealMap g = ArealMap::grid(7, 10);
  const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(70, -1.0, 1.0);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(70, 70) + 0.1 * testing::dense_adjacency(g);
  EXPECT_LE((bridge_apply({1.0, 0.1}, g, w) - a * w).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((Eigen::MatrixXd(bridge_matrix({1.0, 0.1}, g)) - a).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Bridge, PairIndex) {
  EXPECT_EQ(bridge_pair_count(4), 6);
  EXPECT_EQ(bridge_pair_index(1, 0), 0);
  EXPECT_EQ(bridge_pair_index(2, 0), 1);
  EXPECT_EQ(bridge_pair_index(2, 1), 2);
  EXPECT_EQ(bridge_pair_index(3, 2), 5);
}

SpatialState random_spatial(std::mt19937_64& gen, int n, int nd) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.05, 0.9);
  SpatialState s;
  s.phi = Eigen::MatrixXd::NullaryExpr(n, nd, [&] { return g(gen); });
  s.alpha = Eigen::VectorXd::NullaryExpr(nd, [&] { return u(gen); });
  s.sigma2 = Eigen::VectorXd::NullaryExpr(nd, [&] { return 0.2 + u(gen); });
  s.omega = Eigen::MatrixXd::NullaryExpr(bridge_pair_count(nd), 2, [&] { return 0.5 * g(gen); });
  return s;
}

TEST(Mdagar, MatchesStackedDenseDensity) {
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> un(1, 12);
  for (int rep = 0; rep < 60; ++rep) {
    const ArealMap m = random_map(gen, un(gen));
    const int nd = 1 + rep % 3;
    const DagOrdering o = dag_ordering(m);
    const SpatialState s = random_spatial(gen, m.size(), nd);
    const double ref = testing::stacked_mdagar_logpdf(m, o.rank, s);
    EXPECT_NEAR(mdagar_log_density(s, o, m), ref, 1e-8) << "n=" << m.size() << " D=" << nd;
  }
}

TEST(Mdagar, ZeroPhiIsNormalizer) {
  const ArealMap m = ArealMap::grid(3, 3);
  const DagOrdering o = dag_ordering(m);
  std::mt19937_64 gen(2);
  SpatialState s = random_spatial(gen, 9, 2);
  s.phi.setZero();
  double expected = 0.0;
  for (int d = 0; d < 2; ++d) {
    const DagarPrecision q(o, s.alpha(d));
    expected -= 0.5 * (9 * std::log(2.0 * M_PI * s.sigma2(d)) - q.log_determinant());
  }
  EXPECT_NEAR(mdagar_log_density(s, o, m), expected, 1e-12);
}

TEST(Mdagar, SingleDiseaseIsDagar) {
  const ArealMap m = ArealMap::grid(3, 3);
  const DagOrdering o = dag_ordering(m);
  std::mt19937_64 gen(5);
  const SpatialState s = random_spatial(gen, 9, 1);
  const Eigen::MatrixXd prec = testing::dense_dagar(m, o.rank, s.alpha(0)) / s.sigma2(0);
  EXPECT_NEAR(mdagar_log_density(s, o, m),
              testing::mvn_logpdf_precision(s.phi.col(0), Eigen::VectorXd::Zero(9), prec), 1e-10);
}

}  // namespace
}  // namespace stppm
