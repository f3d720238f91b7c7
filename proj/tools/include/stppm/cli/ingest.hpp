#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stppm/arealgraph.hpp"
#include "stppm/temporal.hpp"

namespace stppm::cli {

/// sqrt(c) + sqrt(c + 1). Throws DataError for negative counts.
double freeman_tukey(double count);
/// Double-arcsine variant for proportions c / population:
/// asin(sqrt(c / (m + 1))) + asin(sqrt((c + 1) / (m + 1))).
double freeman_tukey_arcsine(double count, double population);

enum class Transform { None, FreemanTukey, FreemanTukeyArcsine };
Transform transform_from_string(const std::string& name);
const char* to_string(Transform t);

/// Covariate computed from the calendar instead of read from a file.
struct SeasonalCovariate {
  std::string name;
  /// "southern-season": 1 during `season` (summer, autumn, winter, spring) of
  /// the southern hemisphere, from ISO week-start dates (YYYY-MM-DD).
  /// "periodic": 1 when (time index mod period) < period * high_fraction.
  std::string kind = "periodic";
  std::string season;
  int period = 52;
  double high_fraction = 0.5;
};

struct IngestOptions {
  std::filesystem::path counts;
  std::filesystem::path neighbors;
  std::filesystem::path covariates;  ///< optional
  Transform transform = Transform::None;
  std::vector<SeasonalCovariate> seasonal;
  std::vector<std::string> disease_order;  ///< optional permutation by name
  /// Extra covariate rows past the last observed week (for forecasting).
  int future_steps = 0;
  /// Prepends a constant covariate named "intercept".
  bool intercept = false;
};

struct IngestedData {
  ObservationPanel panel;
  ArealMap map;
  /// Raw counts before transformation, same layout as the panel outcomes
  /// (empty when the file carries pre-transformed values).
  std::vector<double> counts;
};

/// Reads counts.csv (`area,week,disease,count` or `value`, plus `population`
/// for the arcsine transform), neighbors.csv (`area_a,area_b`, an empty
/// area_b declares an isolated area) and the optional covariates.csv
/// (`name,area,week,disease,value`, `*` broadcasts; more specific rows win).
/// Area and week labels are ordered numerically when all are integers,
/// otherwise lexicographically (ISO dates sort correctly). Covariate weeks
/// after the last counted week become future rows. Diseases keep
/// first-appearance order unless disease_order is given. Throws DataError
/// with file:line diagnostics.
IngestedData ingest(const IngestOptions& options);

/// Writes the panel and map in the layouts `ingest` reads (value column,
/// every covariate cell spelled out). ingest(persist(x)) == x.
void persist_panel(const ObservationPanel& panel, const ArealMap& map,
                   const std::filesystem::path& counts, const std::filesystem::path& neighbors,
                   const std::filesystem::path& covariates);

/// Calendar label `steps` periods after `label`: ISO dates advance by 7 days,
/// integers by 1.
std::string advance_week_label(const std::string& label, int steps);

}  // namespace stppm::cli
