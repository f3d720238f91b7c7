#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stppm/errors.hpp"
#include "stppm/forecast.hpp"

namespace stppm {
namespace {

PosteriorChain single_series_chain(double coef, int times) {
  PosteriorChain chain;
  chain.dims = ModelDims{1, times, 1, 0, 1};
  chain.lags = LagSpec{{1}, {}};
  ModelState s;
  s.partition = Partition::single_block(1);
  s.beta = Eigen::VectorXd::Zero(0);
  s.gamma = Eigen::MatrixXd::Constant(1, 1, coef);
  s.sigma2 = Eigen::MatrixXd::Constant(1, 1, 1e-300);
  s.phi = Eigen::MatrixXd::Zero(1, 1);
  s.alpha = Eigen::VectorXd::Constant(1, 0.5);
  s.sigma2_phi = Eigen::VectorXd::Ones(1);
  s.omega = Eigen::MatrixXd::Zero(0, 2);
  chain.states.push_back(s);
  chain.iterations.push_back(1);
  chain.log_posterior.push_back(0.0);
  return chain;
}

TEST(Forecast, GeometricRecursion) {
  ObservationPanel panel(1, 3, 1);
  panel.y(0, 0, 0) = 8.0;
  panel.y(0, 1, 0) = 4.0;
  panel.y(0, 2, 0) = 2.0;
  panel.reset_covariates({}, 6);
  const ForecastDraws f = forecast(single_series_chain(0.5, 3), panel, {3, false, 1});
  EXPECT_EQ(f.at(0, 0, 0, 0), 1.0);
  EXPECT_EQ(f.at(0, 0, 1, 0), 0.5);
  EXPECT_EQ(f.at(0, 0, 2, 0), 0.25);
}

TEST(Forecast, ZeroParametersGiveZero) {
  ObservationPanel panel(1, 3, 1);
  panel.y(0, 2, 0) = 5.0;
  panel.reset_covariates({}, 4);
  const ForecastDraws f = forecast(single_series_chain(0.0, 3), panel, {1, true, 9});
  EXPECT_NEAR(f.at(0, 0, 0, 0), 0.0, 1e-140);
}

TEST(Forecast, RejectsMissingFutureCovariates) {
  ObservationPanel panel(1, 3, 1);
  panel.reset_covariates({}, 4);
  EXPECT_THROW(forecast(single_series_chain(0.5, 3), panel, {2, false, 1}), DataError);
  ObservationPanel with_x(1, 3, 1);
  with_x.reset_covariates({"x"}, 5);
  PosteriorChain chain = single_series_chain(0.5, 3);
  chain.dims.covariates = 1;
  chain.states[0].beta = Eigen::VectorXd::Ones(1);
  for (int t = 0; t < 4; ++t) with_x.x(0, t, 0, 0) = 1.0;
  EXPECT_THROW(forecast(chain, with_x, {2, false, 1}), DataError);
  EXPECT_NO_THROW(forecast(chain, with_x, {1, false, 1}));
  EXPECT_THROW(forecast(chain, with_x, {0, false, 1}), ConfigError);
}

struct ArToy {
  ObservationPanel panel;
  PosteriorChain chain;
};

// Seasonal lag 5 with T = 12 and horizon 8 makes the recursion read both
// observed values and its own forecasts through the seasonal term.
ArToy ar_toy(std::uint64_t seed, int draws) {
  testing::ToyOptions o;
  o.map = ArealMap::grid(2, 2);
  o.times = 12;
  o.diseases = 2;
  o.covariates = 2;
  o.lags = LagSpec{{1, 2}, {5}};
  o.clusters = 2;
  o.seed = seed;
  ArToy out;
  const int horizon = 8;
  testing::Toy toy = testing::make_toy(o);
  out.panel = toy.ctx->panel();
  ObservationPanel extended(4, 12, 2);
  extended.reset_covariates(out.panel.covariate_names(), 12 + horizon);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 4; ++i)
    for (int d = 0; d < 2; ++d) {
      for (int t = 0; t < 12; ++t) extended.y(i, t, d) = out.panel.y(i, t, d);
      for (int t = 0; t < 12 + horizon; ++t)
        for (int l = 0; l < 2; ++l) extended.x(i, t, d, l) = nd(gen);
    }
  out.panel = extended;
  out.chain.dims = toy.ctx->dims();
  out.chain.lags = o.lags;
  for (int s = 0; s < draws; ++s) {
    ModelState st = toy.state;
    st.gamma = Eigen::MatrixXd::NullaryExpr(st.gamma.rows(), st.gamma.cols(), [&] { return 0.3 * nd(gen); });
    st.beta = Eigen::VectorXd::NullaryExpr(st.beta.size(), [&] { return nd(gen); });
    st.phi = Eigen::MatrixXd::NullaryExpr(4, 2, [&] { return nd(gen); });
    out.chain.states.push_back(st);
    out.chain.iterations.push_back(s + 1);
    out.chain.log_posterior.push_back(0.0);
  }
  return out;
}

TEST(Forecast, NoiseFreeMatchesClosedFormRecursion) {
  const ArToy toy = ar_toy(12, 5);
  const int H = 8;
  const ForecastDraws f = forecast(toy.chain, toy.panel, {H, false, 3});
  EXPECT_TRUE(f.seasonal_recursion);
  const std::vector<int> lags{1, 2, 5};
  for (int s = 0; s < 5; ++s) {
    const ModelState& st = toy.chain.states[static_cast<std::size_t>(s)];
    for (int i = 0; i < 4; ++i)
      for (int d = 0; d < 2; ++d) {
        std::vector<double> y;
        for (int t = 0; t < 12; ++t) y.push_back(toy.panel.y(i, t, d));
        const int c = st.partition.label(i);
        for (int h = 0; h < H; ++h) {
          const int t = 12 + h;
          double m = st.phi(i, d);
          for (int l = 0; l < 2; ++l) m += st.beta(d * 2 + l) * toy.panel.x(i, t, d, l);
          for (int r = 0; r < 3; ++r) m += st.gamma(c, d * 3 + r) * y[static_cast<std::size_t>(t - lags[static_cast<std::size_t>(r)])];
          y.push_back(m);
          EXPECT_NEAR(f.at(s, i, h, d), m, 1e-10);
        }
      }
  }
}

TEST(Forecast, NoiseFreeIndependentOfDrawOrder) {
  ArToy toy = ar_toy(13, 6);
  const ForecastSummary a = summarize_forecast(forecast(toy.chain, toy.panel, {4, false, 1}));
  std::reverse(toy.chain.states.begin(), toy.chain.states.end());
  const ForecastSummary b = summarize_forecast(forecast(toy.chain, toy.panel, {4, false, 99}));
  for (std::size_t k = 0; k < a.mean.size(); ++k) {
    EXPECT_NEAR(a.mean[k], b.mean[k], 1e-12);
    EXPECT_EQ(a.lower[k], b.lower[k]);
    EXPECT_EQ(a.upper[k], b.upper[k]);
  }
}

TEST(Forecast, DeterministicGivenSeed) {
  const ArToy toy = ar_toy(14, 4);
  const ForecastDraws a = forecast(toy.chain, toy.panel, {5, true, 21});
  const ForecastDraws b = forecast(toy.chain, toy.panel, {5, true, 21});
  EXPECT_EQ(a.values, b.values);
}

TEST(Forecast, IntervalWidthGrowsForStationaryAr) {
  ObservationPanel panel(1, 10, 1);
  for (int t = 0; t < 10; ++t) panel.y(0, t, 0) = 0.3;
  panel.reset_covariates({}, 22);
  PosteriorChain base = single_series_chain(0.8, 10);
  base.states[0].sigma2(0, 0) = 1.0;
  PosteriorChain chain = base;
  for (int s = 1; s < 20000; ++s) {
    chain.states.push_back(base.states[0]);
    chain.iterations.push_back(s + 1);
    chain.log_posterior.push_back(0.0);
  }
  const ForecastSummary sum = summarize_forecast(forecast(chain, panel, {12, true, 5}));
  // h-step predictive sd is sqrt(sum_{j<h} 0.64^j); the 95% width is 2 * 1.96 sd.
  double var = 0.0;
  for (int h = 0; h < 12; ++h) {
    var += std::pow(0.64, h);
    const double width = sum.upper[sum.index(0, h, 0)] - sum.lower[sum.index(0, h, 0)];
    EXPECT_NEAR(width, 2.0 * 1.959964 * std::sqrt(var), 0.03 * 2.0 * 1.959964 * std::sqrt(var)) << h;
  }
  // Stationary limit sd = 1 / sqrt(1 - 0.64).
  const double last = sum.upper[sum.index(0, 11, 0)] - sum.lower[sum.index(0, 11, 0)];
  EXPECT_NEAR(last, 2.0 * 1.959964 / 0.6, 0.2);
}

TEST(OneStepMeans, UseObservedLags) {
  const ArToy toy = ar_toy(15, 3);
  ObservationPanel panel = toy.panel;
  const std::vector<double> m = one_step_means(toy.chain, panel, 7);
  const std::vector<int> lags{1, 2, 5};
  const int steps = 5;
  for (int i = 0; i < 4; ++i)
    for (int h = 0; h < steps; ++h)
      for (int d = 0; d < 2; ++d) {
        const int t = 7 + h;
        double mean = 0.0;
        for (const auto& st : toy.chain.states) {
          const int c = st.partition.label(i);
          double v = st.phi(i, d);
          for (int l = 0; l < 2; ++l) v += st.beta(d * 2 + l) * panel.x(i, t, d, l);
          for (int r = 0; r < 3; ++r) v += st.gamma(c, d * 3 + r) * panel.y(i, t - lags[static_cast<std::size_t>(r)], d);
          mean += v / 3.0;
        }
        EXPECT_NEAR(m[static_cast<std::size_t>((i * steps + h) * 2 + d)], mean, 1e-12);
      }
}

TEST(SimulateOutcomes, NoiseFreeIsRecursion) {
  ArToy toy = ar_toy(16, 1);
  ObservationPanel p = toy.panel;
  Rng rng(1);
  simulate_outcomes(p, toy.chain.lags, toy.chain.states[0], 5, rng, false);
  const ModelState& st = toy.chain.states[0];
  for (int i = 0; i < 4; ++i)
    for (int d = 0; d < 2; ++d)
      for (int t = 0; t < 12; ++t) {
        if (t < 5) {
          EXPECT_EQ(p.y(i, t, d), toy.panel.y(i, t, d));
          continue;
        }
        const int c = st.partition.label(i);
        double m = st.phi(i, d) + st.beta(d * 2) * p.x(i, t, d, 0) + st.beta(d * 2 + 1) * p.x(i, t, d, 1) +
                   st.gamma(c, d * 3) * p.y(i, t - 1, d) + st.gamma(c, d * 3 + 1) * p.y(i, t - 2, d) +
                   st.gamma(c, d * 3 + 2) * p.y(i, t - 5, d);
        EXPECT_NEAR(p.y(i, t, d), m, 1e-12);
      }
  EXPECT_THROW(simulate_outcomes(p, toy.chain.lags, st, 4, rng), std::invalid_argument);
}

}  // namespace
}  // namespace stppm
