#include "stppm/cli/config.hpp"

#include <set>

#include "stppm/errors.hpp"
#include "stppm/synth.hpp"
#include "stppm/cli/persist.hpp"

namespace stppm::cli {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kConfigKeys = {
    "counts",  "neighbors", "covariates", "transform", "seasonal", "intercept",
    "ar_lags", "seasonal_lags", "cohesion", "hyper", "iterations", "burnin",
    "thin",    "seed",      "disease_order", "ordering", "user_order", "output",
    "chains"};

const std::set<std::string> kHyperKeys = {
    "preset",   "beta_mean", "beta_cov",  "nu",         "xi_shape",  "xi_rate",
    "mu_mean",  "mu_cov",    "iw_df",     "iw_scale",   "omega_mean", "omega_cov",
    "alpha_a",  "alpha_b",   "phi_shape", "phi_scale",  "aux_components",
    "alpha_target_acceptance", "alpha_initial_step"};

fs::path resolve(const json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  fs::path p = j.at(key).get<std::string>();
  if (p.empty()) return {};
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

Eigen::VectorXd vector_from(const json& v, Eigen::Index size, const std::string& key) {
  if (v.is_number()) return Eigen::VectorXd::Constant(size, v.get<double>());
  if (!v.is_array()) throw ConfigError("hyper." + key + ": expected a number or a list");
  if (static_cast<Eigen::Index>(v.size()) != size) {
    throw ConfigError("hyper." + key + ": expected " + std::to_string(size) + " entries, found " +
                      std::to_string(v.size()));
  }
  Eigen::VectorXd out(size);
  for (Eigen::Index i = 0; i < size; ++i) out(i) = v.at(static_cast<std::size_t>(i)).get<double>();
  return out;
}

Eigen::MatrixXd matrix_from(const json& v, Eigen::Index size, const std::string& key) {
  if (v.is_number()) return v.get<double>() * Eigen::MatrixXd::Identity(size, size);
  if (!v.is_array()) throw ConfigError("hyper." + key + ": expected a number, a list or a list of rows");
  if (static_cast<Eigen::Index>(v.size()) != size) {
    throw ConfigError("hyper." + key + ": expected " + std::to_string(size) + " rows, found " +
                      std::to_string(v.size()));
  }
  if (size > 0 && v.at(0).is_number()) return vector_from(v, size, key).asDiagonal();
  Eigen::MatrixXd out(size, size);
  for (Eigen::Index r = 0; r < size; ++r) {
    out.row(r) = vector_from(v.at(static_cast<std::size_t>(r)), size, key).transpose();
  }
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
  return a;
}

CohesionSpec cohesion_from(const json& c) {
  const std::string kind = c.value("kind", "HB");
  CohesionSpec spec;
  if (kind == "HB" || kind == "hb") {
    spec = CohesionSpec::hb(c.value("eta", 0.35));
  } else if (kind == "DP" || kind == "dp") {
    spec = CohesionSpec::dp(c.value("mass", 1.0));
  } else {
    throw ConfigError("cohesion.kind must be HB or DP, got '" + kind + "'");
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("cohesion: ") + e.what());
  }
  return spec;
}

}  // namespace

RunConfig parse_config(const json& input, const fs::path& base_dir) {
  if (!input.is_object()) throw ConfigError("config must be a JSON object");
  const json& j = input.contains("config") && input.at("config").is_object() ? input.at("config") : input;
  for (const auto& [key, value] : j.items()) {
    if (!kConfigKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig c;
  try {
    c.counts = resolve(j, "counts", base_dir);
    c.neighbors = resolve(j, "neighbors", base_dir);
    c.covariates = resolve(j, "covariates", base_dir);
    c.output = resolve(j, "output", base_dir);
    if (c.counts.empty()) throw ConfigError("config: 'counts' is required");
    if (c.neighbors.empty()) throw ConfigError("config: 'neighbors' is required");
    c.transform = transform_from_string(j.value("transform", "none"));
    c.intercept = j.value("intercept", false);
    if (j.contains("seasonal")) {
      for (const auto& s : j.at("seasonal")) {
        SeasonalCovariate sc;
        sc.name = s.at("name").get<std::string>();
        sc.kind = s.value("kind", "periodic");
        sc.season = s.value("season", "");
        sc.period = s.value("period", 52);
        sc.high_fraction = s.value("high_fraction", 0.5);
        c.seasonal.push_back(sc);
      }
    }
    c.lags.ar_lags = j.value("ar_lags", std::vector<int>{1});
    c.lags.seasonal_lags = j.value("seasonal_lags", std::vector<int>{});
    if (j.contains("cohesion")) c.cohesion = cohesion_from(j.at("cohesion"));
    if (j.contains("hyper")) {
      c.hyper = j.at("hyper");
      if (!c.hyper.is_object()) throw ConfigError("config: 'hyper' must be an object");
      for (const auto& [key, value] : c.hyper.items()) {
        if (!kHyperKeys.count(key)) throw ConfigError("unknown hyperparameter '" + key + "'");
      }
    }
    c.schedule.iterations = j.value("iterations", c.schedule.iterations);
    c.schedule.burnin = j.value("burnin", c.schedule.iterations / 2);
    c.schedule.thin = j.value("thin", c.schedule.thin);
    if (j.contains("seed") && !j.at("seed").is_null()) {
      const json& s = j.at("seed");
      if (s.is_string()) {
        c.seed = std::stoull(s.get<std::string>());
      } else if (s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0)) {
        c.seed = s.get<std::uint64_t>();
      } else {
        throw ConfigError("config: seed must be a nonnegative integer");
      }
    }
    c.disease_order = j.value("disease_order", std::vector<std::string>{});
    c.ordering = ordering_rule_from_string(j.value("ordering", "by-index"));
    c.user_order = j.value("user_order", std::vector<int>{});
    c.chains = j.value("chains", 1);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.schedule.iterations < 1) throw ConfigError("config: iterations must be positive");
  if (c.schedule.burnin < 0 || c.schedule.burnin >= c.schedule.iterations) {
    throw ConfigError("config: burnin must satisfy 0 <= burnin < iterations");
  }
  if (c.schedule.thin < 1) throw ConfigError("config: thin must be positive");
  if (c.chains < 1) throw ConfigError("config: chains must be positive");
  if (c.ordering == OrderingRule::UserPermutation && c.user_order.empty()) {
    throw ConfigError("config: ordering user-permutation needs user_order");
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  const json j = read_json(path);
  const fs::path base = path.has_parent_path() ? fs::absolute(path).parent_path() : fs::current_path();
  return parse_config(j, base);
}

namespace {

json path_json(const fs::path& p) {
  return p.empty() ? json(nullptr) : json(fs::absolute(p).lexically_normal().string());
}

}  // namespace

json to_json(const RunConfig& c) {
  json j;
  j["counts"] = path_json(c.counts);
  j["neighbors"] = path_json(c.neighbors);
  j["covariates"] = path_json(c.covariates);
  j["transform"] = to_string(c.transform);
  j["intercept"] = c.intercept;
  j["seasonal"] = json::array();
  for (const auto& s : c.seasonal) {
    j["seasonal"].push_back({{"name", s.name},
                             {"kind", s.kind},
                             {"season", s.season},
                             {"period", s.period},
                             {"high_fraction", s.high_fraction}});
  }
  j["ar_lags"] = c.lags.ar_lags;
  j["seasonal_lags"] = c.lags.seasonal_lags;
  if (c.cohesion.kind == CohesionSpec::Kind::HB) {
    j["cohesion"] = {{"kind", "HB"}, {"eta", c.cohesion.eta}};
  } else {
    j["cohesion"] = {{"kind", "DP"}, {"mass", c.cohesion.mass}};
  }
  j["hyper"] = c.hyper;
  j["iterations"] = c.schedule.iterations;
  j["burnin"] = c.schedule.burnin;
  j["thin"] = c.schedule.thin;
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["disease_order"] = c.disease_order;
  j["ordering"] = to_string(c.ordering);
  j["user_order"] = c.user_order;
  j["output"] = path_json(c.output);
  j["chains"] = c.chains;
  return j;
}

Hyperparameters resolve_hyperparameters(const json& o, const ModelDims& dims,
                                        const CohesionSpec& cohesion) {
  Hyperparameters h;
  try {
    const std::string preset = o.is_object() ? o.value("preset", "default") : "default";
    if (preset == "default") {
      h = Hyperparameters::defaults(dims);
    } else if (preset == "study1") {
      h = study_hyperparameters(1, dims, cohesion);
    } else if (preset == "study2") {
      h = study_hyperparameters(2, dims, cohesion);
    } else {
      throw ConfigError("hyper.preset must be default, study1 or study2");
    }
    h.cohesion = cohesion;
    if (o.is_object()) {
      const Eigen::Index pd = dims.beta_size();
      const Eigen::Index qd = dims.gamma_size();
      if (o.contains("beta_mean")) h.beta_mean = vector_from(o["beta_mean"], pd, "beta_mean");
      if (o.contains("beta_cov")) h.beta_cov = matrix_from(o["beta_cov"], pd, "beta_cov");
      if (o.contains("mu_mean")) h.mu_mean = vector_from(o["mu_mean"], qd, "mu_mean");
      if (o.contains("mu_cov")) h.mu_cov = matrix_from(o["mu_cov"], qd, "mu_cov");
      if (o.contains("iw_scale")) h.iw_scale = matrix_from(o["iw_scale"], qd, "iw_scale");
      if (o.contains("omega_mean")) h.omega_mean = vector_from(o["omega_mean"], 2, "omega_mean");
      if (o.contains("omega_cov")) h.omega_cov = matrix_from(o["omega_cov"], 2, "omega_cov");
      h.nu = o.value("nu", h.nu);
      h.xi_shape = o.value("xi_shape", h.xi_shape);
      h.xi_rate = o.value("xi_rate", h.xi_rate);
      h.iw_df = o.value("iw_df", h.iw_df);
      h.alpha_a = o.value("alpha_a", h.alpha_a);
      h.alpha_b = o.value("alpha_b", h.alpha_b);
      h.phi_shape = o.value("phi_shape", h.phi_shape);
      h.phi_scale = o.value("phi_scale", h.phi_scale);
      h.aux_components = o.value("aux_components", h.aux_components);
      h.alpha_target_acceptance = o.value("alpha_target_acceptance", h.alpha_target_acceptance);
      h.alpha_initial_step = o.value("alpha_initial_step", h.alpha_initial_step);
    }
    h.validate(dims);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("hyper: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("hyper: ") + e.what());
  }
  return h;
}

json hyperparameters_to_json(const Hyperparameters& h) {
  json j;
  j["beta_mean"] = vector_json(h.beta_mean);
  j["beta_cov"] = matrix_json(h.beta_cov);
  j["nu"] = h.nu;
  j["xi_shape"] = h.xi_shape;
  j["xi_rate"] = h.xi_rate;
  j["mu_mean"] = vector_json(h.mu_mean);
  j["mu_cov"] = matrix_json(h.mu_cov);
  j["iw_df"] = h.iw_df;
  j["iw_scale"] = matrix_json(h.iw_scale);
  j["omega_mean"] = vector_json(h.omega_mean);
  j["omega_cov"] = matrix_json(h.omega_cov);
  j["alpha_a"] = h.alpha_a;
  j["alpha_b"] = h.alpha_b;
  j["phi_shape"] = h.phi_shape;
  j["phi_scale"] = h.phi_scale;
  j["aux_components"] = h.aux_components;
  j["alpha_target_acceptance"] = h.alpha_target_acceptance;
  j["alpha_initial_step"] = h.alpha_initial_step;
  return j;
}

IngestOptions ingest_options(const RunConfig& c, int future_steps) {
  IngestOptions o;
  o.counts = c.counts;
  o.neighbors = c.neighbors;
  o.covariates = c.covariates;
  o.transform = c.transform;
  o.seasonal = c.seasonal;
  o.disease_order = c.disease_order;
  o.future_steps = future_steps;
  o.intercept = c.intercept;
  return o;
}

}  // namespace stppm::cli
