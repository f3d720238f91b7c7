#pragma once

#include <cstdint>
#include <vector>

#include "stppm/gibbs.hpp"
#include "stppm/model.hpp"
#include "stppm/random.hpp"
#include "stppm/temporal.hpp"

namespace stppm {

/// Overwrites y for t in [from_time, panel.times()) by running the model
/// recursion forward with the given parameters; lags read the (already
/// overwritten) earlier values. With noise = false the recursion is the
/// conditional mean.
void simulate_outcomes(ObservationPanel& panel, const LagSpec& lags, const ModelState& state,
                       int from_time, Rng& rng, bool noise = true);

struct ForecastOptions {
  int horizon = 1;
  bool noise = true;
  std::uint64_t seed = 0;
};

/// Predictive draws indexed [draw][area][step][disease].
struct ForecastDraws {
  int draws = 0;
  int areas = 0;
  int horizon = 0;
  int diseases = 0;
  /// True when some seasonal lag reaches past the observed history, i.e. the
  /// recursion feeds on its own forecasts for seasonal terms too.
  bool seasonal_recursion = false;
  std::vector<double> values;

  double at(int s, int i, int h, int d) const {
    return values[((static_cast<std::size_t>(s) * areas + i) * horizon + h) * diseases + d];
  }
};

/// Posterior predictive simulation: for every saved state, iterate
/// y_{T+h} = X beta + Z gamma* + phi + eps, feeding each draw's own trajectory
/// back into the lags. Future covariate rows must be present in the panel
/// (covariate_times() >= T + horizon); throws DataError otherwise. Draw s uses
/// the substream Rng::derive_seed(options.seed, s), so results do not depend
/// on evaluation order.
ForecastDraws forecast(const PosteriorChain& chain, const ObservationPanel& panel,
                       const ForecastOptions& options);

/// Posterior mean of the one-step-ahead prediction for t in [from_time,
/// panel.times()): lags read the observed outcomes, not forecasts. Indexed
/// ((i * steps) + (t - from_time)) * D + d. Requires from_time >= max_lag.
std::vector<double> one_step_means(const PosteriorChain& chain, const ObservationPanel& panel,
                                   int from_time);

struct ForecastSummary {
  int areas = 0;
  int horizon = 0;
  int diseases = 0;
  std::vector<double> mean;
  std::vector<double> lower;  ///< 2.5% quantile
  std::vector<double> upper;  ///< 97.5% quantile

  std::size_t index(int i, int h, int d) const {
    return (static_cast<std::size_t>(i) * horizon + h) * diseases + d;
  }
};

ForecastSummary summarize_forecast(const ForecastDraws& draws, double level = 0.95);

}  // namespace stppm
