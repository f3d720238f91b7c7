#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "stppm/arealgraph.hpp"
#include "stppm/cohesion.hpp"
#include "stppm/model.hpp"
#include "stppm/temporal.hpp"
#include "stppm/cli/ingest.hpp"

namespace stppm::cli {

using nlohmann::json;

/// Everything needed to reproduce a fit.
///
/// JSON layout:
///   counts, neighbors, covariates   paths, relative to the config file
///   transform                       "none" | "freeman-tukey" | "freeman-tukey-arcsine"
///   seasonal                        [{name, kind, season | period, high_fraction}]
///   intercept                       prepend a constant covariate
///   ar_lags, seasonal_lags          integer lists
///   cohesion                        {"kind": "HB", "eta": 0.35} | {"kind": "DP", "mass": 1}
///   hyper                           hyperparameter overrides (see resolve_hyperparameters)
///   iterations, burnin, thin        schedule
///   seed                            master seed (drawn from entropy and recorded if absent)
///   disease_order                   names, optional
///   ordering                        "by-index" | "max-degree-first" | "user-permutation"
///   user_order                      1-based permutation for user-permutation
///   output                          chain directory
///   chains                          number of chains (chain_<c> subdirectories when > 1)
struct RunConfig {
  std::filesystem::path counts;
  std::filesystem::path neighbors;
  std::filesystem::path covariates;
  Transform transform = Transform::None;
  std::vector<SeasonalCovariate> seasonal;
  bool intercept = false;
  LagSpec lags;
  CohesionSpec cohesion = CohesionSpec::hb(0.35);
  json hyper = json::object();
  Schedule schedule;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> disease_order;
  OrderingRule ordering = OrderingRule::ByIndex;
  std::vector<int> user_order;  ///< 1-based
  std::filesystem::path output;
  int chains = 1;  ///< independent chains, seeds derived from the master seed
};

/// Parses a config object, or a run manifest (its "config" member). Relative
/// paths resolve against base_dir. Throws ConfigError.
RunConfig parse_config(const json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Config with absolute paths and every field explicit.
json to_json(const RunConfig& config);

/// Defaults for the dimensions with the overrides applied; "preset" selects
/// the base set ("default", "study1", "study2"). Vector entries
/// accept a scalar (constant), a list; matrix entries accept a scalar
/// (times I), a list (diagonal) or a list of rows.
Hyperparameters resolve_hyperparameters(const json& overrides, const ModelDims& dims,
                                        const CohesionSpec& cohesion);
json hyperparameters_to_json(const Hyperparameters& h);

IngestOptions ingest_options(const RunConfig& config, int future_steps = 0);

}  // namespace stppm::cli
