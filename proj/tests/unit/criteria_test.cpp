#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "stppm/criteria.hpp"

namespace stppm {
namespace {

testing::Toy small_toy(std::uint64_t seed = 3) {
  testing::ToyOptions o;
  o.map = ArealMap::grid(2, 2);
  o.times = 7;
  o.diseases = 2;
  o.lags = LagSpec{{1}, {}};
  o.clusters = 2;
  o.seed = seed;
  return testing::make_toy(o);
}

// Context whose outcomes over the usable range equal the fitted means of
// `s` plus `offset`; gamma must be zero so fitted means do not read y.
std::unique_ptr<ModelContext> matched_context(const testing::Toy& toy, const ModelState& s, double offset) {
  ObservationPanel panel = toy.ctx->panel();
  const ModelContext& c = *toy.ctx;
  for (int i = 0; i < panel.areas(); ++i)
    for (int t = c.design().first_time(); t < c.design().end_time(); ++t)
      for (int d = 0; d < panel.diseases(); ++d) panel.y(i, t, d) = fitted_mean(s, c, i, t, d) + offset;
  return std::make_unique<ModelContext>(panel, c.map(), c.design().lags(), c.hyper());
}

PosteriorChain chain_of(const ModelContext& ctx, std::vector<ModelState> states) {
  PosteriorChain chain;
  chain.dims = ctx.dims();
  chain.lags = ctx.design().lags();
  for (std::size_t s = 0; s < states.size(); ++s) chain.iterations.push_back(static_cast<int>(s + 1));
  chain.states = std::move(states);
  chain.log_posterior.assign(chain.states.size(), 0.0);
  return chain;
}

TEST(PointwiseLoglik, ZeroResidualUnitDensity) {
  testing::Toy toy = small_toy();
  ModelState s = toy.state;
  s.gamma.setZero();
  s.sigma2.setConstant(1.0 / (2.0 * std::numbers::pi));
  const auto ctx = matched_context(toy, s, 0.0);
  const Eigen::VectorXd ll = observation_loglik(s, *ctx);
  EXPECT_EQ(ll.size(), 4 * 6 * 2);
  EXPECT_LE(ll.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PointwiseLoglik, MatchesDirectFormula) {
  testing::Toy toy = small_toy(8);
  const ModelContext& ctx = *toy.ctx;
  const ModelState& s = toy.state;
  const Eigen::VectorXd ll = observation_loglik(s, ctx);
  Eigen::Index pos = 0;
  for (int i = 0; i < 4; ++i)
    for (int t = 1; t < 7; ++t)
      for (int d = 0; d < 2; ++d) {
        const int c = s.partition.label(i);
        double mean = s.phi(i, d) + ctx.panel().y(i, t - 1, d) * s.gamma(c, d);
        for (int l = 0; l < 2; ++l) mean += ctx.panel().x(i, t, d, l) * s.beta(d * 2 + l);
        const double v = s.sigma2(c, d);
        const double r = ctx.panel().y(i, t, d) - mean;
        EXPECT_NEAR(ll(pos++), -0.5 * std::log(2.0 * std::numbers::pi * v) - r * r / (2.0 * v), 1e-12);
      }
  EXPECT_NEAR(ll.sum(), testing::oracle_log_likelihood(s, ctx), 1e-10);
  const PosteriorChain chain = chain_of(ctx, {s, s});
  const Eigen::MatrixXd pw = pointwise_loglik(chain, ctx);
  EXPECT_EQ(pw.row(0), pw.row(1));
}

TEST(InformationCriteria, IdenticalDrawsGiveZeroEffectiveParameters) {
  testing::Toy toy = small_toy(4);
  const PosteriorChain chain = chain_of(*toy.ctx, std::vector<ModelState>(7, toy.state));
  const FitReport r = evaluate_fit(chain, *toy.ctx, toy.state.partition);
  ASSERT_TRUE(r.p_dic && r.p_waic && r.waic && r.dic);
  EXPECT_EQ(*r.p_dic, 0.0);
  EXPECT_EQ(*r.p_waic, 0.0);
  EXPECT_EQ(*r.waic, -2.0 * r.log_likelihood);
  EXPECT_EQ(*r.dic, -2.0 * r.log_likelihood);
  EXPECT_EQ(r.n_obs, 4 * 6 * 2);
}

TEST(InformationCriteria, TwoDrawHandValues) {
  Eigen::MatrixXd pw(2, 3);
  pw << -1.0, -2.0, 0.5,
        -3.0, -2.0, -0.5;
  const Eigen::VectorXd plug = Eigen::Vector3d(-1.5, -1.9, 0.1);
  const FitReport r = information_criteria(pw, plug, 4);
  // Sample variances (n - 1 denominator): 2, 0, 0.5.
  EXPECT_NEAR(*r.p_waic, 2.5, 1e-15);
  const double lppd = std::log((std::exp(-1.0) + std::exp(-3.0)) / 2.0) - 2.0 +
                      std::log((std::exp(0.5) + std::exp(-0.5)) / 2.0);
  EXPECT_NEAR(*r.lppd, lppd, 1e-14);
  EXPECT_NEAR(*r.waic, -2.0 * (lppd - 2.5), 1e-13);
  EXPECT_NEAR(r.log_likelihood, -3.3, 1e-15);
  EXPECT_NEAR(r.mean_log_likelihood, -4.0, 1e-15);
  EXPECT_NEAR(*r.p_dic, 2.0 * (-3.3 + 4.0), 1e-14);
  EXPECT_NEAR(r.aic, 6.6 + 8.0, 1e-13);
  EXPECT_NEAR(r.bic, 6.6 + 4.0 * std::log(3.0), 1e-13);
  EXPECT_GE(*r.lppd, r.mean_log_likelihood);
}

TEST(InformationCriteria, SingleDrawLeavesDicAndWaicAbsent) {
  Eigen::MatrixXd pw(1, 2);
  pw << -1.0, -2.0;
  const FitReport r = information_criteria(pw, pw.row(0).transpose(), 1);
  EXPECT_FALSE(r.p_dic.has_value());
  EXPECT_FALSE(r.waic.has_value());
}

TEST(InformationCriteria, InvariantUnderDrawOrder) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd pw = Eigen::MatrixXd::NullaryExpr(6, 10, [&] { return nd(gen); });
  const Eigen::VectorXd plug = pw.colwise().mean().transpose();
  const FitReport a = information_criteria(pw, plug, 3);
  Eigen::MatrixXd rev = pw.colwise().reverse();
  const FitReport b = information_criteria(rev, plug, 3);
  EXPECT_NEAR(*a.waic, *b.waic, 1e-12);
  EXPECT_NEAR(*a.dic, *b.dic, 1e-12);
  EXPECT_GE(*a.p_waic, 0.0);
  EXPECT_GE(*a.lppd, a.mean_log_likelihood);
}

TEST(Rmse, ConstantOffsetAndPerfectFit) {
  testing::Toy toy = small_toy(5);
  ModelState s = toy.state;
  s.gamma.setZero();
  for (double delta : {0.0, 0.25, -1.5}) {
    const auto ctx = matched_context(toy, s, delta);
    const PosteriorChain chain = chain_of(*ctx, {s, s, s});
    EXPECT_NEAR(rmse(chain, *ctx), std::abs(delta), 1e-12);
  }
}

TEST(Rmse, MatchesRecomputation) {
  testing::Toy toy = small_toy(6);
  const ModelContext& ctx = *toy.ctx;
  const PosteriorChain chain = run_chain(ctx, Schedule{60, 20, 4}, 17);
  double ss = 0.0;
  int count = 0;
  const int p = 2;
  for (int i = 0; i < 4; ++i)
    for (int t = 1; t < 7; ++t)
      for (int d = 0; d < 2; ++d) {
        double fit = 0.0;
        for (const auto& s : chain.states) {
          const int c = s.partition.label(i);
          double m = s.phi(i, d) + ctx.panel().y(i, t - 1, d) * s.gamma(c, d);
          for (int l = 0; l < p; ++l) m += ctx.panel().x(i, t, d, l) * s.beta(d * p + l);
          fit += m;
        }
        fit /= static_cast<double>(chain.size());
        ss += (ctx.panel().y(i, t, d) - fit) * (ctx.panel().y(i, t, d) - fit);
        ++count;
      }
  EXPECT_NEAR(rmse(chain, ctx), std::sqrt(ss / count), 1e-12);
  const FitReport r = evaluate_fit(chain, ctx, chain.states.back().partition);
  EXPECT_GE(*r.p_waic, 0.0);
}

TEST(ParameterCount, OneClusterStudyTwoDimensions) {
  const ModelDims dims{70, 100, 2, 2, 2};
  // beta 4, gamma 4, sigma2 2, phi 140, omega 2, alpha 2, sigma2_phi 2, xi 1,
  // mu_gamma 4, Sigma_gamma 10.
  EXPECT_EQ(count_parameters(dims, 1), 171);
  // Without the hyper-level terms (sigma2_phi, xi, mu_gamma, Sigma_gamma) the
  // count is the 154 reported for one-cluster fits on a 70-area map.
  EXPECT_EQ(count_parameters(dims, 1) - 2 - 1 - 4 - 10, 154);
}

TEST(MatchClusters, MaximumOverlap) {
  const Partition ref = Partition::from_labels(std::vector<int>{0, 0, 0, 1, 1, 2});
  const Partition draw = Partition::from_labels(std::vector<int>{0, 1, 1, 2, 2, 2});
  EXPECT_EQ(match_clusters(ref, draw), (std::vector<int>{1, 2, 2}));
}

}  // namespace
}  // namespace stppm
