#include "stppm/temporal.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace stppm {

int LagSpec::max_lag() const noexcept {
  int m = 0;
  for (int l : ar_lags) m = std::max(m, l);
  for (int l : seasonal_lags) m = std::max(m, l);
  return m;
}

std::vector<int> LagSpec::all_lags() const {
  std::vector<int> out(ar_lags);
  out.insert(out.end(), seasonal_lags.begin(), seasonal_lags.end());
  return out;
}

void LagSpec::validate(int times) const {
  const auto lags = all_lags();
  if (lags.empty()) throw std::invalid_argument("at least one lag is required");
  std::set<int> seen;
  for (int l : lags) {
    if (l <= 0) throw std::invalid_argument("lags must be positive");
    if (!seen.insert(l).second) throw std::invalid_argument("lag " + std::to_string(l) + " repeated");
  }
  if (max_lag() > times - 2) {
    throw std::invalid_argument("maximum lag " + std::to_string(max_lag()) +
                                " leaves fewer than two usable time points out of " +
                                std::to_string(times));
  }
}

ObservationPanel::ObservationPanel(int areas, int times, int diseases)
    : n_(areas), t_(times), d_(diseases), t_cov_(times) {
  if (areas < 0 || times < 0 || diseases < 0) throw std::invalid_argument("negative panel dimension");
  y_.assign(static_cast<std::size_t>(areas) * static_cast<std::size_t>(times) *
                static_cast<std::size_t>(diseases),
            0.0);
}

Eigen::Map<const Eigen::VectorXd> ObservationPanel::covariates(int i, int t, int d) const {
  return Eigen::Map<const Eigen::VectorXd>(x_.data() + xindex(i, t, d),
                                           static_cast<Eigen::Index>(covariate_names_.size()));
}

void ObservationPanel::reset_covariates(std::vector<std::string> names, int covariate_times) {
  std::set<std::string> unique(names.begin(), names.end());
  if (unique.size() != names.size()) throw std::invalid_argument("covariate names must be unique");
  if (covariate_times < t_) throw std::invalid_argument("covariates must cover every outcome time");
  covariate_names_ = std::move(names);
  t_cov_ = covariate_times;
  x_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(t_cov_) *
                static_cast<std::size_t>(d_) * covariate_names_.size(),
            std::numeric_limits<double>::quiet_NaN());
}

ObservationPanel ObservationPanel::truncated(int times) const {
  if (times < 0 || times > t_) throw std::invalid_argument("truncation beyond the panel");
  ObservationPanel out(n_, times, d_);
  out.disease_names = disease_names;
  out.time_labels.assign(time_labels.begin(),
                         time_labels.begin() + std::min<std::ptrdiff_t>(times, static_cast<std::ptrdiff_t>(time_labels.size())));
  for (int i = 0; i < n_; ++i)
    for (int t = 0; t < times; ++t)
      for (int d = 0; d < d_; ++d) out.y(i, t, d) = y(i, t, d);
  out.covariate_names_ = covariate_names_;
  out.t_cov_ = t_cov_;
  out.x_ = x_;
  return out;
}

ObservationPanel ObservationPanel::reordered(const std::vector<int>& order) const {
  if (static_cast<int>(order.size()) != d_) throw std::invalid_argument("disease order has wrong length");
  std::vector<char> seen(static_cast<std::size_t>(d_), 0);
  for (int d : order) {
    if (d < 0 || d >= d_ || seen[static_cast<std::size_t>(d)]) {
      throw std::invalid_argument("disease order is not a permutation");
    }
    seen[static_cast<std::size_t>(d)] = 1;
  }
  ObservationPanel out(n_, t_, d_);
  out.time_labels = time_labels;
  if (!disease_names.empty()) {
    for (int r = 0; r < d_; ++r) out.disease_names.push_back(disease_names[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])]);
  }
  out.reset_covariates(covariate_names_, t_cov_);
  const int p = covariate_count();
  for (int i = 0; i < n_; ++i) {
    for (int r = 0; r < d_; ++r) {
      const int src = order[static_cast<std::size_t>(r)];
      for (int t = 0; t < t_; ++t) out.y(i, t, r) = y(i, t, src);
      for (int t = 0; t < t_cov_; ++t)
        for (int l = 0; l < p; ++l) out.x(i, t, r, l) = x(i, t, src, l);
    }
  }
  return out;
}

TemporalDesign::TemporalDesign(const ObservationPanel& panel, const LagSpec& lags)
    : lags_(lags), q_(lags.q()), first_(lags.max_lag()), end_(panel.times()),
      n_(panel.areas()), d_(panel.diseases()) {
  const auto all = lags.all_lags();
  const int usable = end_ - first_;
  z_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(usable) *
            static_cast<std::size_t>(d_) * static_cast<std::size_t>(q_));
  std::size_t pos = 0;
  for (int i = 0; i < n_; ++i)
    for (int t = first_; t < end_; ++t)
      for (int d = 0; d < d_; ++d)
        for (int l : all) z_[pos++] = panel.y(i, t - l, d);
}

Eigen::Map<const Eigen::VectorXd> TemporalDesign::z(int i, int t, int d) const {
  const std::size_t usable = static_cast<std::size_t>(end_ - first_);
  const std::size_t offset =
      ((static_cast<std::size_t>(i) * usable + static_cast<std::size_t>(t - first_)) *
           static_cast<std::size_t>(d_) + static_cast<std::size_t>(d)) *
      static_cast<std::size_t>(q_);
  return Eigen::Map<const Eigen::VectorXd>(z_.data() + offset, q_);
}

TemporalDesign build_design(const ObservationPanel& panel, const LagSpec& lags) {
  const auto all = lags.all_lags();
  if (all.empty()) throw std::invalid_argument("at least one lag is required");
  for (int l : all)
    if (l <= 0) throw std::invalid_argument("lags must be positive");
  if (panel.times() <= lags.max_lag()) {
    throw std::invalid_argument("series of length " + std::to_string(panel.times()) +
                                " has no usable time point for maximum lag " +
                                std::to_string(lags.max_lag()));
  }
  return TemporalDesign(panel, lags);
}

}  // namespace stppm
