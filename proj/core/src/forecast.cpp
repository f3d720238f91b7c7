#include "stppm/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stppm/errors.hpp"

namespace stppm {

namespace {

double mean_at(const ModelState& s, const LagSpec& lags, const std::vector<int>& all_lags,
               const ObservationPanel& panel, const std::vector<double>& history, int i, int t, int d,
               int span) {
  const int q = lags.q();
  const int p = panel.covariate_count();
  const int c = s.partition.label(i);
  double m = s.phi(i, d);
  for (int l = 0; l < p; ++l) m += s.beta(d * p + l) * panel.x(i, t, d, l);
  const std::size_t base = (static_cast<std::size_t>(i) * panel.diseases() + d) * span;
  for (int r = 0; r < q; ++r) {
    m += s.gamma(c, d * q + r) * history[base + static_cast<std::size_t>(t - all_lags[static_cast<std::size_t>(r)])];
  }
  return m;
}

}  // namespace

void simulate_outcomes(ObservationPanel& panel, const LagSpec& lags, const ModelState& state,
                       int from_time, Rng& rng, bool noise) {
  if (from_time < lags.max_lag()) {
    throw std::invalid_argument("simulation must start after the first max_lag rows");
  }
  const int T = panel.times();
  const int n = panel.areas();
  const int D = panel.diseases();
  const auto all = lags.all_lags();
  std::vector<double> history(static_cast<std::size_t>(n) * D * T);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < D; ++d)
      for (int t = 0; t < T; ++t)
        history[(static_cast<std::size_t>(i) * D + d) * T + t] = panel.y(i, t, d);
  for (int t = from_time; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      const int c = state.partition.label(i);
      for (int d = 0; d < D; ++d) {
        double y = mean_at(state, lags, all, panel, history, i, t, d, T);
        if (noise) y += std::sqrt(state.sigma2(c, d)) * rng.normal();
        history[(static_cast<std::size_t>(i) * D + d) * T + t] = y;
        panel.y(i, t, d) = y;
      }
    }
  }
}

ForecastDraws forecast(const PosteriorChain& chain, const ObservationPanel& panel,
                       const ForecastOptions& options) {
  if (options.horizon < 1) throw ConfigError("forecast horizon must be at least 1");
  if (chain.empty()) throw DataError("chain has no saved states");
  const int n = panel.areas();
  const int T = panel.times();
  const int D = panel.diseases();
  const int H = options.horizon;
  if (chain.dims.areas != n || chain.dims.diseases != D || chain.dims.covariates != panel.covariate_count()) {
    throw DataError("chain dimensions do not match the data");
  }
  if (panel.covariate_times() < T + H) {
    throw DataError("future covariates cover " + std::to_string(panel.covariate_times() - T) +
                    " steps but the horizon is " + std::to_string(H));
  }
  for (int i = 0; i < n; ++i)
    for (int t = T; t < T + H; ++t)
      for (int d = 0; d < D; ++d)
        for (int l = 0; l < panel.covariate_count(); ++l)
          if (!std::isfinite(panel.x(i, t, d, l))) {
            throw DataError("missing future covariate '" +
                            panel.covariate_names()[static_cast<std::size_t>(l)] + "' at area " +
                            std::to_string(i + 1) + ", step " + std::to_string(t - T + 1));
          }
  if (T < chain.lags.max_lag()) throw DataError("series shorter than the maximum lag");

  ForecastDraws out;
  out.draws = static_cast<int>(chain.size());
  out.areas = n;
  out.horizon = H;
  out.diseases = D;
  for (int l : chain.lags.seasonal_lags)
    if (H > l) out.seasonal_recursion = true;
  out.values.resize(static_cast<std::size_t>(out.draws) * n * H * D);

  const auto all = chain.lags.all_lags();
  const int span = T + H;
  std::vector<double> base(static_cast<std::size_t>(n) * D * span, 0.0);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < D; ++d)
      for (int t = 0; t < T; ++t) base[(static_cast<std::size_t>(i) * D + d) * span + t] = panel.y(i, t, d);

  for (int s = 0; s < out.draws; ++s) {
    const ModelState& state = chain.states[static_cast<std::size_t>(s)];
    Rng rng(Rng::derive_seed(options.seed, static_cast<std::uint64_t>(s)));
    std::vector<double> history = base;
    for (int h = 0; h < H; ++h) {
      const int t = T + h;
      for (int i = 0; i < n; ++i) {
        const int c = state.partition.label(i);
        for (int d = 0; d < D; ++d) {
          double y = mean_at(state, chain.lags, all, panel, history, i, t, d, span);
          if (options.noise) y += std::sqrt(state.sigma2(c, d)) * rng.normal();
          history[(static_cast<std::size_t>(i) * D + d) * span + t] = y;
          out.values[((static_cast<std::size_t>(s) * n + i) * H + h) * D + d] = y;
        }
      }
    }
  }
  return out;
}

std::vector<double> one_step_means(const PosteriorChain& chain, const ObservationPanel& panel,
                                   int from_time) {
  if (chain.empty()) throw DataError("chain has no saved states");
  const int n = panel.areas();
  const int T = panel.times();
  const int D = panel.diseases();
  if (chain.dims.areas != n || chain.dims.diseases != D || chain.dims.covariates != panel.covariate_count()) {
    throw DataError("chain dimensions do not match the data");
  }
  if (from_time < chain.lags.max_lag() || from_time > T) {
    throw std::invalid_argument("one-step predictions need max_lag <= from_time <= T");
  }
  const int steps = T - from_time;
  const auto all = chain.lags.all_lags();
  std::vector<double> history(static_cast<std::size_t>(n) * D * T);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < D; ++d)
      for (int t = 0; t < T; ++t) history[(static_cast<std::size_t>(i) * D + d) * T + t] = panel.y(i, t, d);
  std::vector<double> out(static_cast<std::size_t>(n) * steps * D, 0.0);
  for (const ModelState& state : chain.states) {
    for (int i = 0; i < n; ++i)
      for (int h = 0; h < steps; ++h)
        for (int d = 0; d < D; ++d)
          out[(static_cast<std::size_t>(i) * steps + h) * D + d] +=
              mean_at(state, chain.lags, all, panel, history, i, from_time + h, d, T);
  }
  for (double& v : out) v /= static_cast<double>(chain.size());
  return out;
}

ForecastSummary summarize_forecast(const ForecastDraws& draws, double level) {
  if (draws.draws < 1) throw std::invalid_argument("no forecast draws");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  ForecastSummary out;
  out.areas = draws.areas;
  out.horizon = draws.horizon;
  out.diseases = draws.diseases;
  const std::size_t cells = static_cast<std::size_t>(draws.areas) * draws.horizon * draws.diseases;
  out.mean.resize(cells);
  out.lower.resize(cells);
  out.upper.resize(cells);
  const double lo = 0.5 * (1.0 - level);
  const double hi = 1.0 - lo;
  std::vector<double> v(static_cast<std::size_t>(draws.draws));
  auto quantile = [&](double prob) {
    // Linear interpolation between order statistics.
    const double pos = prob * (static_cast<double>(v.size()) - 1.0);
    const auto below = static_cast<std::size_t>(std::floor(pos));
    const std::size_t above = std::min(below + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(below);
    return v[below] + frac * (v[above] - v[below]);
  };
  for (int i = 0; i < draws.areas; ++i) {
    for (int h = 0; h < draws.horizon; ++h) {
      for (int d = 0; d < draws.diseases; ++d) {
        double sum = 0.0;
        for (int s = 0; s < draws.draws; ++s) {
          v[static_cast<std::size_t>(s)] = draws.at(s, i, h, d);
          sum += v[static_cast<std::size_t>(s)];
        }
        std::sort(v.begin(), v.end());
        const std::size_t idx = out.index(i, h, d);
        out.mean[idx] = sum / draws.draws;
        out.lower[idx] = quantile(lo);
        out.upper[idx] = quantile(hi);
      }
    }
  }
  return out;
}

}  // namespace stppm
