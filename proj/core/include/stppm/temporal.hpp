#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace stppm {

/// Lagged-outcome temporal design: autoregressive lags followed by seasonal
/// lags. q = |ar_lags| + |seasonal_lags|.
struct LagSpec {
  std::vector<int> ar_lags{1};
  std::vector<int> seasonal_lags;

  int q() const noexcept { return static_cast<int>(ar_lags.size() + seasonal_lags.size()); }
  int max_lag() const noexcept;
  /// ar_lags then seasonal_lags, the column order of Z.
  std::vector<int> all_lags() const;
  /// Lags distinct and positive, q >= 1, and max_lag <= T - 2. Throws std::invalid_argument.
  void validate(int times) const;
};

/// Outcomes y[i, t, d] with covariates x[i, t, d, l].
///
/// The covariate array may extend past the outcome horizon (covariate_times()
/// >= times()); the extra rows are the future covariates used by forecasting.
class ObservationPanel {
 public:
  ObservationPanel() = default;
  ObservationPanel(int areas, int times, int diseases);

  int areas() const noexcept { return n_; }
  int times() const noexcept { return t_; }
  int diseases() const noexcept { return d_; }
  int covariate_count() const noexcept { return static_cast<int>(covariate_names_.size()); }
  int covariate_times() const noexcept { return t_cov_; }

  double y(int i, int t, int d) const { return y_[index(i, t, d)]; }
  double& y(int i, int t, int d) { return y_[index(i, t, d)]; }

  double x(int i, int t, int d, int l) const { return x_[xindex(i, t, d) + static_cast<std::size_t>(l)]; }
  double& x(int i, int t, int d, int l) { return x_[xindex(i, t, d) + static_cast<std::size_t>(l)]; }
  /// Covariate vector of one (area, time, disease) cell.
  Eigen::Map<const Eigen::VectorXd> covariates(int i, int t, int d) const;

  /// Replaces the covariate block. Cells start as NaN.
  void reset_covariates(std::vector<std::string> names, int covariate_times);
  const std::vector<std::string>& covariate_names() const noexcept { return covariate_names_; }

  std::vector<std::string> disease_names;
  std::vector<std::string> time_labels;

  /// Copy restricted to the first `times` outcome rows; covariates keep their full extent.
  ObservationPanel truncated(int times) const;
  /// Copy with the disease axis permuted: result disease r = this disease order[r].
  ObservationPanel reordered(const std::vector<int>& order) const;

  const std::vector<double>& raw_outcomes() const noexcept { return y_; }

  friend bool operator==(const ObservationPanel&, const ObservationPanel&) = default;

 private:
  std::size_t index(int i, int t, int d) const {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(t_) + static_cast<std::size_t>(t)) *
               static_cast<std::size_t>(d_) + static_cast<std::size_t>(d);
  }
  std::size_t xindex(int i, int t, int d) const {
    return ((static_cast<std::size_t>(i) * static_cast<std::size_t>(t_cov_) + static_cast<std::size_t>(t)) *
                static_cast<std::size_t>(d_) + static_cast<std::size_t>(d)) *
           covariate_names_.size();
  }

  int n_ = 0;
  int t_ = 0;
  int d_ = 0;
  int t_cov_ = 0;
  std::vector<double> y_;
  std::vector<double> x_;
  std::vector<std::string> covariate_names_;
};

/// Z[i, t, d] = (y[i, t - l_1, d], ..., y[i, t - l_q, d]) over the usable
/// range t = max_lag .. T - 1 (0-based), which is the likelihood's range.
class TemporalDesign {
 public:
  TemporalDesign() = default;
  TemporalDesign(const ObservationPanel& panel, const LagSpec& lags);

  const LagSpec& lags() const noexcept { return lags_; }
  int q() const noexcept { return q_; }
  int first_time() const noexcept { return first_; }
  int end_time() const noexcept { return end_; }
  /// Number of usable time points T_eff.
  int usable_count() const noexcept { return end_ - first_; }

  /// Design vector for a usable time t (absolute 0-based index).
  Eigen::Map<const Eigen::VectorXd> z(int i, int t, int d) const;

 private:
  LagSpec lags_;
  int q_ = 0;
  int first_ = 0;
  int end_ = 0;
  int n_ = 0;
  int d_ = 0;
  std::vector<double> z_;
};

/// Throws std::invalid_argument unless at least one time point is usable (T > max_lag).
TemporalDesign build_design(const ObservationPanel& panel, const LagSpec& lags);

}  // namespace stppm
