#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "stppm/temporal.hpp"

namespace stppm {
namespace {

ObservationPanel series(const std::vector<double>& y) {
  ObservationPanel p(1, static_cast<int>(y.size()), 1);
  for (std::size_t t = 0; t < y.size(); ++t) p.y(0, static_cast<int>(t), 0) = y[t];
  return p;
}

TEST(TemporalDesign, SingleLag) {
  const TemporalDesign z = build_design(series({5, 7, 9}), LagSpec{{1}, {}});
  EXPECT_EQ(z.first_time(), 1);
  EXPECT_EQ(z.usable_count(), 2);
  EXPECT_EQ(z.z(0, 1, 0)(0), 5.0);
  EXPECT_EQ(z.z(0, 2, 0)(0), 7.0);
}

TEST(TemporalDesign, TwoLagsOneUsablePoint) {
  const TemporalDesign z = build_design(series({1, 2, 3}), LagSpec{{1, 2}, {}});
  EXPECT_EQ(z.usable_count(), 1);
  EXPECT_EQ(z.first_time(), 2);
  EXPECT_EQ(z.z(0, 2, 0)(0), 2.0);
  EXPECT_EQ(z.z(0, 2, 0)(1), 1.0);
}

TEST(TemporalDesign, SeasonalUsableLength) {
  ObservationPanel p(2, 120, 2);
  const LagSpec lags{{1, 2, 3}, {24}};
  EXPECT_EQ(lags.q(), 4);
  EXPECT_EQ(lags.max_lag(), 24);
  EXPECT_EQ(build_design(p, lags).usable_count(), 96);
}

TEST(TemporalDesign, RejectsTooShort) {
  EXPECT_THROW(build_design(series({1, 2}), LagSpec{{1, 2}, {}}), std::invalid_argument);
}

TEST(LagSpec, Validation) {
  EXPECT_NO_THROW((LagSpec{{1, 2}, {}}.validate(4)));
  EXPECT_THROW((LagSpec{{1, 2}, {}}.validate(3)), std::invalid_argument);
  EXPECT_THROW((LagSpec{{1, 1}, {}}.validate(10)), std::invalid_argument);
  EXPECT_THROW((LagSpec{{0}, {}}.validate(10)), std::invalid_argument);
  EXPECT_THROW((LagSpec{{}, {}}.validate(10)), std::invalid_argument);
  EXPECT_THROW((LagSpec{{2}, {2}}.validate(10)), std::invalid_argument);
}

TEST(TemporalDesign, IsPureReindexing) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd;
  ObservationPanel p(3, 30, 2);
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < 30; ++t)
      for (int d = 0; d < 2; ++d) p.y(i, t, d) = nd(gen);
  const LagSpec lags{{1, 3}, {7}};
  const TemporalDesign z = build_design(p, lags);
  const auto all = lags.all_lags();
  for (int i = 0; i < 3; ++i)
    for (int t = z.first_time(); t < z.end_time(); ++t)
      for (int d = 0; d < 2; ++d)
        for (std::size_t r = 0; r < all.size(); ++r)
          EXPECT_EQ(z.z(i, t, d)(static_cast<Eigen::Index>(r)), p.y(i, t - all[r], d));
}

TEST(ObservationPanel, TruncateAndReorder) {
  ObservationPanel p(2, 4, 2);
  p.reset_covariates({"a"}, 6);
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 4; ++t)
      for (int d = 0; d < 2; ++d) p.y(i, t, d) = 100 * i + 10 * t + d;
  for (int i = 0; i < 2; ++i)
    for (int t = 0; t < 6; ++t)
      for (int d = 0; d < 2; ++d) p.x(i, t, d, 0) = -(100 * i + 10 * t + d);
  const ObservationPanel tr = p.truncated(3);
  EXPECT_EQ(tr.times(), 3);
  EXPECT_EQ(tr.covariate_times(), 6);
  EXPECT_EQ(tr.y(1, 2, 1), 121.0);
  const ObservationPanel re = p.reordered({1, 0});
  EXPECT_EQ(re.y(1, 2, 0), 121.0);
  EXPECT_EQ(re.x(0, 5, 1, 0), -50.0);
}

}  // namespace
}  // namespace stppm
