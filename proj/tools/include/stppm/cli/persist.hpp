#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "stppm/model.hpp"

namespace stppm::cli {

/// Writes to a sibling temporary file and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Chain directory layout: one long CSV per parameter block
/// (`iteration,index,value`, 1-based row-major flat index), partitions.csv
/// (`iteration` then one 1-based label per area) and manifest.json.
inline constexpr const char* kChainBlocks[] = {"beta",       "gamma", "mu_gamma", "sigma_gamma",
                                               "phi",        "omega", "alpha",    "sigma2_phi",
                                               "sigma2",     "xi",    "log_posterior"};

/// Writes the block files and partitions.csv; the manifest is written separately.
void write_chain_files(const std::filesystem::path& dir, const PosteriorChain& chain);
/// Reads the files written by write_chain_files; dims, lags, schedule and
/// seed come from the manifest.
PosteriorChain read_chain(const std::filesystem::path& dir);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace stppm::cli
