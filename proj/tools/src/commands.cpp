#include "stppm/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "stppm/criteria.hpp"
#include "stppm/errors.hpp"
#include "stppm/forecast.hpp"
#include "stppm/gibbs.hpp"
#include "stppm/partition_estimate.hpp"
#include "stppm/synth.hpp"
#include "stppm/cli/config.hpp"
#include "stppm/cli/csv.hpp"
#include "stppm/cli/ingest.hpp"
#include "stppm/cli/persist.hpp"

namespace stppm::cli {

namespace fs = std::filesystem;

namespace {

// --- shared helpers ----------------------------------------------------------

ModelDims dims_of(const ObservationPanel& panel, const LagSpec& lags) {
  ModelDims d;
  d.areas = panel.areas();
  d.times = panel.times();
  d.diseases = panel.diseases();
  d.covariates = panel.covariate_count();
  d.lags = lags.q();
  return d;
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

std::string area_label(const ArealMap& map, int i) {
  return static_cast<std::size_t>(i) < map.labels().size() ? map.labels()[static_cast<std::size_t>(i)]
                                                            : std::to_string(i + 1);
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
}

std::vector<int> zero_based(const std::vector<int>& one_based) {
  std::vector<int> out;
  out.reserve(one_based.size());
  for (int v : one_based) out.push_back(v - 1);
  return out;
}

struct LoadedRun {
  RunConfig config;
  IngestedData data;
  Hyperparameters hyper;
};

LoadedRun load_run(RunConfig config, int future_steps = 0) {
  LoadedRun r;
  r.data = ingest(ingest_options(config, future_steps));
  const ModelDims dims = dims_of(r.data.panel, config.lags);
  r.hyper = resolve_hyperparameters(config.hyper, dims, config.cohesion);
  r.config = std::move(config);
  return r;
}

ModelContext make_context(const LoadedRun& run) {
  return ModelContext(run.data.panel, run.data.map, run.config.lags, run.hyper, run.config.ordering,
                      zero_based(run.config.user_order));
}

json manifest_for(const RunConfig& config, const ModelContext& ctx, const PosteriorChain& chain,
                  int chain_index) {
  json m;
  m["format"] = "stppm-chain/1";
  m["config"] = to_json(config);
  m["chain_index"] = chain_index;
  m["chain_seed"] = chain.seed;
  m["dims"] = {{"areas", chain.dims.areas},
               {"times", chain.dims.times},
               {"diseases", chain.dims.diseases},
               {"covariates", chain.dims.covariates},
               {"lags", chain.dims.lags}};
  m["usable_times"] = ctx.usable_count();
  m["hyper"] = hyperparameters_to_json(ctx.hyper());
  m["cohesion"] = ctx.hyper().cohesion.name();
  m["ordering"] = to_string(ctx.ordering().rule);
  std::vector<int> order;
  for (int a : ctx.ordering().order) order.push_back(a + 1);
  m["area_order"] = order;
  m["area_labels"] = ctx.map().labels();
  m["disease_order"] = ctx.panel().disease_names;
  m["covariate_names"] = ctx.panel().covariate_names();
  m["saved_draws"] = chain.size();
  m["alpha_acceptance"] = vec_json(chain.alpha_acceptance);
  m["alpha_step"] = vec_json(chain.alpha_step);
  const int qd = chain.dims.gamma_size();
  const int nd = chain.dims.diseases;
  m["shapes"] = {{"beta", {chain.dims.beta_size(), 1}},
                 {"gamma", {"k", qd}},
                 {"mu_gamma", {qd, 1}},
                 {"sigma_gamma", {qd, qd}},
                 {"phi", {chain.dims.areas, nd}},
                 {"omega", {bridge_pair_count(nd), 2}},
                 {"alpha", {nd, 1}},
                 {"sigma2_phi", {nd, 1}},
                 {"sigma2", {"k", nd}},
                 {"xi", {1, 1}},
                 {"log_posterior", {1, 1}}};
  return m;
}

fs::path chain_dir(const fs::path& output, int chains, int c) {
  return chains == 1 ? output : output / ("chain_" + std::to_string(c + 1));
}

// Seed of chain c: the master seed itself for a single chain, otherwise an
// independent substream per chain.
std::uint64_t chain_seed(std::uint64_t master, int chains, int c) {
  return chains == 1 ? master : Rng::derive_seed(master, static_cast<std::uint64_t>(c + 1));
}

std::vector<PosteriorChain> run_chains(const ModelContext& ctx, const RunConfig& config) {
  const int chains = config.chains;
  std::vector<PosteriorChain> out(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
  auto work = [&](int c) {
    try {
      out[static_cast<std::size_t>(c)] = run_chain(ctx, config.schedule, chain_seed(*config.seed, chains, c));
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  };
  if (chains == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int c = 0; c < chains; ++c) threads.emplace_back(work, c);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// --- fit ---------------------------------------------------------------------

struct FitArgs {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  std::optional<int> burnin;
  std::optional<int> thin;
  std::optional<int> chains;
};

RunConfig apply_overrides(RunConfig c, const FitArgs& a) {
  if (!a.output.empty()) c.output = a.output;
  if (a.seed) c.seed = a.seed;
  if (a.iterations) c.schedule.iterations = *a.iterations;
  if (a.burnin) c.schedule.burnin = *a.burnin;
  if (a.thin) c.schedule.thin = *a.thin;
  if (a.chains) c.chains = *a.chains;
  if (c.schedule.iterations < 1 || c.schedule.burnin < 0 || c.schedule.burnin >= c.schedule.iterations ||
      c.schedule.thin < 1) {
    throw ConfigError("schedule must satisfy iterations > burnin >= 0 and thin >= 1");
  }
  if (c.chains < 1) throw ConfigError("chains must be positive");
  if (c.output.empty()) throw ConfigError("no output directory (set 'output' or pass --output)");
  if (!c.seed) c.seed = entropy_seed();
  return c;
}

int cmd_fit(const FitArgs& args, std::ostream& out) {
  RunConfig config = apply_overrides(load_config(args.config), args);
  const LoadedRun run = load_run(config);
  const ModelContext ctx = make_context(run);
  std::vector<PosteriorChain> chains;
  try {
    chains = run_chains(ctx, run.config);
  } catch (const NumericalError& e) {
    fs::create_directories(run.config.output);
    write_text_atomic(run.config.output / "failure_state.txt", std::string(e.what()) + "\n" + e.state_dump());
    throw;
  }
  for (int c = 0; c < run.config.chains; ++c) {
    const fs::path dir = chain_dir(run.config.output, run.config.chains, c);
    const PosteriorChain& chain = chains[static_cast<std::size_t>(c)];
    write_chain_files(dir, chain);
    write_json_atomic(dir / "manifest.json", manifest_for(run.config, ctx, chain, c));
    out << "chain " << (c + 1) << ": " << chain.size() << " draws, seed " << chain.seed
        << ", alpha acceptance";
    for (Eigen::Index d = 0; d < chain.alpha_acceptance.size(); ++d) {
      out << ' ' << format_double(chain.alpha_acceptance(d));
    }
    out << " -> " << dir.string() << '\n';
  }
  return kOk;
}

// --- summarize ---------------------------------------------------------------

struct SummarizeArgs {
  std::string chain;
  std::string loss = "vi";
  std::string output;
  int restarts = 16;
};

struct ChainRun {
  LoadedRun run;
  PosteriorChain chain;
};

ChainRun load_chain_run(const fs::path& dir, int future_steps = 0) {
  const json manifest = read_json(dir / "manifest.json");
  RunConfig config = parse_config(manifest, dir);
  ChainRun r{load_run(config, future_steps), read_chain(dir)};
  const ModelDims dims = dims_of(r.run.data.panel, r.run.config.lags);
  if (!(dims == r.chain.dims)) {
    throw DataError(dir.string() + ": the data referenced by the manifest no longer match the chain");
  }
  return r;
}

void write_cluster_summary(const fs::path& path, const PosteriorChain& chain, const Partition& estimate,
                           const ObservationPanel& panel, const LagSpec& lags) {
  const int q = lags.q();
  const int nd = chain.dims.diseases;
  const int k = estimate.block_count();
  const std::vector<int> all = lags.all_lags();
  std::vector<std::vector<double>> values;  // [(j, d, param)] -> draws
  const int per_block = nd * (q + 1);
  values.resize(static_cast<std::size_t>(k * per_block));
  for (const ModelState& s : chain.states) {
    const std::vector<int> match = match_clusters(estimate, s.partition);
    for (int j = 0; j < k; ++j) {
      const int m = match[static_cast<std::size_t>(j)];
      for (int d = 0; d < nd; ++d) {
        for (int l = 0; l < q; ++l) {
          values[static_cast<std::size_t>(j * per_block + d * (q + 1) + l)].push_back(s.gamma(m, d * q + l));
        }
        values[static_cast<std::size_t>(j * per_block + d * (q + 1) + q)].push_back(s.sigma2(m, d));
      }
    }
  }
  std::ostringstream o;
  o << "cluster,size,disease,parameter,mean,lo95,hi95\n";
  const std::vector<int> sizes = estimate.block_sizes();
  for (int j = 0; j < k; ++j) {
    for (int d = 0; d < nd; ++d) {
      for (int l = 0; l <= q; ++l) {
        const auto& v = values[static_cast<std::size_t>(j * per_block + d * (q + 1) + l)];
        const std::string name = l < q ? "gamma_lag" + std::to_string(all[static_cast<std::size_t>(l)]) : "sigma2";
        o << (j + 1) << ',' << sizes[static_cast<std::size_t>(j)] << ','
          << csv_escape(panel.disease_names[static_cast<std::size_t>(d)]) << ',' << name << ','
          << format_double(mean_of(v)) << ',' << format_double(quantile(v, 0.025)) << ','
          << format_double(quantile(v, 0.975)) << '\n';
      }
    }
  }
  write_text_atomic(path, o.str());
}

void write_parameter_summary(const fs::path& path, const PosteriorChain& chain, const ObservationPanel& panel) {
  std::ostringstream o;
  o << "parameter,mean,lo95,hi95\n";
  auto row = [&](const std::string& name, auto&& get) {
    std::vector<double> v;
    for (const ModelState& s : chain.states) v.push_back(get(s));
    o << csv_escape(name) << ',' << format_double(mean_of(v)) << ',' << format_double(quantile(v, 0.025))
      << ',' << format_double(quantile(v, 0.975)) << '\n';
  };
  const int p = chain.dims.covariates;
  const int nd = chain.dims.diseases;
  for (int d = 0; d < nd; ++d) {
    const std::string dn = panel.disease_names[static_cast<std::size_t>(d)];
    for (int l = 0; l < p; ++l) {
      row("beta[" + dn + "," + panel.covariate_names()[static_cast<std::size_t>(l)] + "]",
          [&](const ModelState& s) { return s.beta(d * p + l); });
    }
    row("alpha[" + dn + "]", [&](const ModelState& s) { return s.alpha(d); });
    row("sigma2_phi[" + dn + "]", [&](const ModelState& s) { return s.sigma2_phi(d); });
  }
  for (int d = 1; d < nd; ++d) {
    for (int e = 0; e < d; ++e) {
      const int r = bridge_pair_index(d, e);
      const std::string pair = panel.disease_names[static_cast<std::size_t>(d)] + "," +
                               panel.disease_names[static_cast<std::size_t>(e)];
      row("omega0[" + pair + "]", [&](const ModelState& s) { return s.omega(r, 0); });
      row("omega1[" + pair + "]", [&](const ModelState& s) { return s.omega(r, 1); });
    }
  }
  row("xi", [](const ModelState& s) { return s.xi; });
  row("clusters", [](const ModelState& s) { return static_cast<double>(s.clusters()); });
  write_text_atomic(path, o.str());
}

json report_json(const FitReport& r) {
  json j;
  j["log_likelihood"] = r.log_likelihood;
  j["mean_log_likelihood"] = r.mean_log_likelihood;
  j["rmse"] = r.rmse;
  j["p_total"] = r.p_total;
  j["aic"] = r.aic;
  j["bic"] = r.bic;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  j["p_dic"] = opt(r.p_dic);
  j["dic"] = opt(r.dic);
  j["p_waic"] = opt(r.p_waic);
  j["waic"] = opt(r.waic);
  j["lppd"] = opt(r.lppd);
  j["n_obs"] = r.n_obs;
  return j;
}

int cmd_summarize(const SummarizeArgs& args, std::ostream& out) {
  ViLoss loss;
  if (args.loss == "vi") {
    loss = ViLoss::LowerBound;
  } else if (args.loss == "vi-exact") {
    loss = ViLoss::Exact;
  } else {
    throw ConfigError("--loss must be vi or vi-exact");
  }
  if (args.restarts < 1) throw ConfigError("--restarts must be positive");
  const fs::path dir = args.chain;
  const ChainRun cr = load_chain_run(dir);
  if (cr.chain.empty()) throw DataError(dir.string() + ": chain has no saved draws");
  const ModelContext ctx = make_context(cr.run);
  std::vector<Partition> samples;
  for (const auto& s : cr.chain.states) samples.push_back(s.partition);
  ViSearchOptions vo;
  vo.restarts = args.restarts;
  vo.seed = Rng::derive_seed(cr.chain.seed, 0x5a11);
  vo.loss = loss;
  const ViEstimate est = estimate_partition_vi(samples, vo);
  const FitReport report = evaluate_fit(cr.chain, ctx, est.partition);

  const fs::path o = args.output.empty() ? dir : fs::path(args.output);
  std::ostringstream part;
  part << "area,cluster\n";
  for (int i = 0; i < est.partition.size(); ++i) {
    part << csv_escape(area_label(ctx.map(), i)) << ',' << (est.partition.label(i) + 1) << '\n';
  }
  write_text_atomic(o / "partition.csv", part.str());

  json rj = report_json(report);
  rj["clusters"] = est.partition.block_count();
  rj["expected_vi_loss"] = est.expected_loss;
  rj["loss"] = args.loss;
  rj["draws"] = cr.chain.size();
  write_json_atomic(o / "fit_report.json", rj);

  std::ostringstream csv;
  csv << "metric,value\n";
  for (const auto& [key, value] : rj.items()) {
    if (value.is_number()) csv << key << ',' << format_double(value.get<double>()) << '\n';
    else if (value.is_null()) csv << key << ",\n";
    else if (value.is_string()) csv << key << ',' << csv_escape(value.get<std::string>()) << '\n';
  }
  write_text_atomic(o / "fit_report.csv", csv.str());
  write_cluster_summary(o / "cluster_summary.csv", cr.chain, est.partition, ctx.panel(), ctx.design().lags());
  write_parameter_summary(o / "parameter_summary.csv", cr.chain, ctx.panel());

  out << "clusters " << est.partition.block_count() << ", expected VI " << format_double(est.expected_loss)
      << ", RMSE " << format_double(report.rmse) << ", AIC " << format_double(report.aic);
  if (report.waic) out << ", WAIC " << format_double(*report.waic);
  out << " -> " << o.string() << '\n';
  return kOk;
}

// --- predict -----------------------------------------------------------------

struct PredictArgs {
  std::string chain;
  int horizon = 26;
  std::string output;
  std::string covariates;
  std::string holdout;
  std::optional<std::uint64_t> seed;
  bool no_noise = false;
};

int cmd_predict(const PredictArgs& args, std::ostream& out) {
  if (args.horizon < 1) throw ConfigError("--horizon must be >= 1");
  const fs::path dir = args.chain;
  const json manifest = read_json(dir / "manifest.json");
  RunConfig config = parse_config(manifest, dir);
  if (!args.covariates.empty()) config.covariates = fs::absolute(args.covariates);
  LoadedRun run = load_run(config, args.horizon);
  PosteriorChain chain = read_chain(dir);
  if (!(dims_of(run.data.panel, run.config.lags) == chain.dims)) {
    throw DataError(dir.string() + ": the data referenced by the manifest no longer match the chain");
  }
  ForecastOptions fo;
  fo.horizon = args.horizon;
  fo.noise = !args.no_noise;
  fo.seed = args.seed ? *args.seed : Rng::derive_seed(chain.seed, 0xf0ca);
  const ForecastDraws draws = forecast(chain, run.data.panel, fo);
  const ForecastSummary sum = summarize_forecast(draws);

  const ObservationPanel& panel = run.data.panel;
  std::ostringstream o;
  o << "area,disease,horizon,mean,lo95,hi95\n";
  for (int i = 0; i < sum.areas; ++i) {
    for (int d = 0; d < sum.diseases; ++d) {
      for (int h = 0; h < sum.horizon; ++h) {
        const std::size_t idx = sum.index(i, h, d);
        o << csv_escape(area_label(run.data.map, i)) << ','
          << csv_escape(panel.disease_names[static_cast<std::size_t>(d)]) << ',' << (h + 1) << ','
          << format_double(sum.mean[idx]) << ',' << format_double(sum.lower[idx]) << ','
          << format_double(sum.upper[idx]) << '\n';
      }
    }
  }
  const fs::path target = args.output.empty() ? dir / "forecast.csv" : fs::path(args.output);
  write_text_atomic(target, o.str());
  out << "forecast of " << sum.horizon << " steps from " << chain.size() << " draws";
  if (draws.seasonal_recursion) out << " (seasonal lags feed on forecasts)";
  out << " -> " << target.string() << '\n';

  if (!args.holdout.empty()) {
    // Holdout file: area,week,disease,value with week = 1-based horizon step
    // or a future week label.
    const CsvTable t = read_csv(args.holdout);
    const int ca = t.require("area");
    const int cw = t.require("week");
    const int cd = t.require("disease");
    const int cv = t.require("value");
    const auto& labels = run.data.map.labels();
    double sq = 0.0;
    long hits = 0;
    long count = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      const auto ia = std::find(labels.begin(), labels.end(), row[static_cast<std::size_t>(ca)]);
      if (ia == labels.end()) throw DataError(t.where(r) + ": unknown area '" + row[static_cast<std::size_t>(ca)] + "'");
      const auto& dn = panel.disease_names;
      const auto id = std::find(dn.begin(), dn.end(), row[static_cast<std::size_t>(cd)]);
      if (id == dn.end()) throw DataError(t.where(r) + ": unknown disease '" + row[static_cast<std::size_t>(cd)] + "'");
      const std::string& w = row[static_cast<std::size_t>(cw)];
      int h = -1;
      for (int s = 0; s < args.horizon; ++s) {
        if (advance_week_label(panel.time_labels.back(), s + 1) == w) h = s;
      }
      if (h < 0) throw DataError(t.where(r) + ": week '" + w + "' is outside the forecast horizon");
      const std::size_t idx = sum.index(static_cast<int>(ia - labels.begin()), h, static_cast<int>(id - dn.begin()));
      const double y = parse_double(row[static_cast<std::size_t>(cv)], t.where(r));
      sq += (y - sum.mean[idx]) * (y - sum.mean[idx]);
      hits += (y >= sum.lower[idx] && y <= sum.upper[idx]) ? 1 : 0;
      ++count;
    }
    if (count == 0) throw DataError(args.holdout + ": no rows");
    json m;
    m["rmse"] = std::sqrt(sq / static_cast<double>(count));
    m["coverage95"] = static_cast<double>(hits) / static_cast<double>(count);
    m["points"] = count;
    write_json_atomic(target.parent_path() / "forecast_metrics.json", m);
    out << "holdout RMSE " << format_double(m["rmse"].get<double>()) << ", 95% coverage "
        << format_double(m["coverage95"].get<double>()) << '\n';
  }
  return kOk;
}

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
  int scenario = 1;
  int clusters = 2;
  int rows = 7;
  int cols = 10;
  int times = 120;
  int holdout = 0;
  std::uint64_t seed = 1;
  std::string output;
  int iterations = 20000;
  std::optional<int> burnin;
  int thin = 10;
  // study mode
  int datasets = 0;
  std::vector<std::string> configs;
};

CohesionSpec parse_cohesion_token(const std::string& token, std::string& name) {
  const auto colon = token.find(':');
  const std::string kind = token.substr(0, colon);
  const std::string value = colon == std::string::npos ? "" : token.substr(colon + 1);
  CohesionSpec spec;
  if (kind == "HB" || kind == "hb") {
    spec = CohesionSpec::hb(value.empty() ? 0.35 : parse_double(value, "--config " + token));
  } else if (kind == "DP" || kind == "dp") {
    spec = CohesionSpec::dp(value.empty() ? 1.0 : parse_double(value, "--config " + token));
  } else {
    throw ConfigError("--config entries look like HB:0.35 or DP:1, got '" + token + "'");
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("--config ") + token + ": " + e.what());
  }
  name = spec.name();
  return spec;
}

int cmd_simulate_study(const SimulateArgs& a, std::ostream& out) {
  StudyOptions so;
  so.study = a.scenario;
  so.clusters = a.clusters;
  so.datasets = a.datasets;
  so.grid_rows = a.rows;
  so.grid_cols = a.cols;
  so.holdout = a.holdout > 0 ? a.holdout : 20;
  so.seed = a.seed;
  so.schedule.iterations = a.iterations;
  so.schedule.burnin = a.burnin ? *a.burnin : a.iterations / 2;
  so.schedule.thin = a.thin;
  try {
    so.schedule.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::vector<std::string> tokens = a.configs;
  if (tokens.empty()) tokens = a.scenario == 1 ? std::vector<std::string>{"HB:0.1"}
                                               : std::vector<std::string>{"HB:0.35", "DP:1"};
  for (const auto& t : tokens) {
    StudyConfig c;
    c.cohesion = parse_cohesion_token(t, c.name);
    so.configs.push_back(c);
  }
  const StudySummary s = replicate_study(so);
  std::ostringstream o;
  o << "dataset,config,ok,ari,clusters,rmse,aic,bic,dic,waic,holdout_rmse,holdout_rmse_one_step,holdout_coverage,error\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : s.rows) {
    o << r.dataset << ',' << csv_escape(r.config) << ',' << (r.ok ? 1 : 0) << ',' << format_double(r.ari) << ','
      << r.clusters_estimated << ',' << format_double(r.rmse) << ',' << format_double(r.fit.aic) << ','
      << format_double(r.fit.bic) << ',' << opt(r.fit.dic) << ',' << opt(r.fit.waic) << ','
      << format_double(r.holdout_rmse) << ',' << format_double(r.holdout_rmse_one_step) << ','
      << format_double(r.holdout_coverage) << ','
      << csv_escape(r.error) << '\n';
  }
  const fs::path dir = a.output;
  write_text_atomic(dir / "study.csv", o.str());
  json j;
  j["study"] = a.scenario;
  j["clusters"] = a.clusters;
  j["datasets"] = a.datasets;
  j["grid"] = {a.rows, a.cols};
  j["seed"] = a.seed;
  j["configs"] = s.configs;
  j["best_ari_count"] = s.best_ari_count;
  j["mean_ari"] = s.mean_ari;
  j["mean_rmse"] = s.mean_rmse;
  write_json_atomic(dir / "study_summary.json", j);
  for (std::size_t c = 0; c < s.configs.size(); ++c) {
    out << s.configs[c] << ": mean ARI " << format_double(s.mean_ari[c]) << ", mean RMSE "
        << format_double(s.mean_rmse[c]) << ", best ARI in " << s.best_ari_count[c] << '\n';
  }
  return kOk;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.output.empty()) throw ConfigError("--output is required");
  if (a.scenario != 1 && a.scenario != 2) throw ConfigError("--scenario must be 1 or 2");
  if (a.rows < 1 || a.cols < 1) throw ConfigError("grid dimensions must be positive");
  if (a.datasets > 0) return cmd_simulate_study(a, out);

  Scenario sc;
  try {
    sc = a.scenario == 1 ? simulation1_scenario(a.clusters, a.rows, a.cols, a.seed)
                         : simulation2_scenario(a.clusters, a.rows, a.cols, a.seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  sc.times = a.times;
  if (a.holdout < 0 || a.holdout >= a.times) throw ConfigError("--holdout must lie in [0, times)");
  SyntheticDataset ds = generate(sc);
  std::vector<std::string> labels;
  for (int i = 0; i < ds.map.size(); ++i) labels.push_back(std::to_string(i + 1));
  ds.map.set_labels(labels);
  ds.panel.time_labels.clear();
  for (int t = 0; t < ds.panel.times(); ++t) ds.panel.time_labels.push_back(std::to_string(t + 1));

  const fs::path dir = a.output;
  const int kept = a.times - a.holdout;
  ObservationPanel fit_panel = ds.panel.truncated(kept);
  fit_panel.time_labels.resize(static_cast<std::size_t>(kept));
  persist_panel(fit_panel, ds.map, dir / "counts.csv", dir / "neighbors.csv", dir / "covariates.csv");
  if (a.holdout > 0) {
    std::ostringstream h;
    h << "area,week,disease,value\n";
    for (int i = 0; i < ds.panel.areas(); ++i)
      for (int t = kept; t < a.times; ++t)
        for (int d = 0; d < ds.panel.diseases(); ++d)
          h << labels[static_cast<std::size_t>(i)] << ',' << (t + 1) << ','
            << ds.panel.disease_names[static_cast<std::size_t>(d)] << ',' << format_double(ds.panel.y(i, t, d))
            << '\n';
    write_text_atomic(dir / "holdout.csv", h.str());
  }
  std::ostringstream truth;
  truth << "area,cluster\n";
  for (int i = 0; i < ds.truth.partition.size(); ++i) {
    truth << (i + 1) << ',' << (ds.truth.partition.label(i) + 1) << '\n';
  }
  write_text_atomic(dir / "truth_partition.csv", truth.str());
  write_text_atomic(dir / "truth_state.txt", describe(ds.truth));

  RunConfig rc;
  rc.counts = dir / "counts.csv";
  rc.neighbors = dir / "neighbors.csv";
  rc.covariates = dir / "covariates.csv";
  rc.lags = sc.lags;
  rc.cohesion = a.scenario == 1 ? CohesionSpec::hb(0.1) : CohesionSpec::hb(0.35);
  rc.hyper = json{{"preset", a.scenario == 1 ? "study1" : "study2"}};
  rc.schedule.iterations = a.iterations;
  rc.schedule.burnin = a.burnin ? *a.burnin : a.iterations / 2;
  rc.schedule.thin = a.thin;
  rc.seed = Rng::derive_seed(a.seed, 1);
  rc.output = dir / "chain";
  json rj = to_json(rc);
  // Paths relative to the config file keep the directory relocatable.
  rj["counts"] = "counts.csv";
  rj["neighbors"] = "neighbors.csv";
  rj["covariates"] = "covariates.csv";
  rj["output"] = "chain";
  write_json_atomic(dir / "run.json", rj);
  out << "scenario " << a.scenario << ", k = " << a.clusters << ", " << ds.map.size() << " areas, T = " << kept
      << (a.holdout > 0 ? " (+" + std::to_string(a.holdout) + " held out)" : std::string()) << " -> "
      << dir.string() << '\n';
  return kOk;
}

// --- compare-order -----------------------------------------------------------

struct CompareArgs {
  FitArgs fit;
  bool keep_chains = false;
};

int cmd_compare_order(const CompareArgs& args, std::ostream& out) {
  RunConfig base = load_config(args.fit.config);
  FitArgs fa = args.fit;
  if (fa.output.empty() && base.output.empty()) fa.output = "compare-order";
  base = apply_overrides(base, fa);
  base.chains = 1;
  const IngestedData probe = ingest(ingest_options(base));
  std::vector<std::string> names = base.disease_order.empty() ? probe.panel.disease_names : base.disease_order;
  std::vector<int> perm(names.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::ostringstream o;
  o << "order,rmse,aic,waic,clusters\n";
  double best = std::numeric_limits<double>::infinity();
  std::string best_name;
  do {
    RunConfig c = base;
    c.disease_order.clear();
    std::string label;
    for (int p : perm) {
      c.disease_order.push_back(names[static_cast<std::size_t>(p)]);
      label += (label.empty() ? "" : ">") + names[static_cast<std::size_t>(p)];
    }
    const LoadedRun run = load_run(c);
    const ModelContext ctx = make_context(run);
    const PosteriorChain chain = run_chain(ctx, c.schedule, *c.seed);
    if (chain.empty()) throw ConfigError("schedule saves no draws");
    std::vector<Partition> samples;
    for (const auto& s : chain.states) samples.push_back(s.partition);
    ViSearchOptions vo;
    vo.seed = Rng::derive_seed(chain.seed, 0x5a11);
    const ViEstimate est = estimate_partition_vi(samples, vo);
    const FitReport report = evaluate_fit(chain, ctx, est.partition);
    if (args.keep_chains) {
      const fs::path dir = base.output / label;
      write_chain_files(dir, chain);
      c.output = dir;
      write_json_atomic(dir / "manifest.json", manifest_for(c, ctx, chain, 0));
    }
    o << csv_escape(label) << ',' << format_double(report.rmse) << ',' << format_double(report.aic) << ','
      << (report.waic ? format_double(*report.waic) : std::string()) << ',' << est.partition.block_count()
      << '\n';
    out << label << ": RMSE " << format_double(report.rmse) << '\n';
    if (report.rmse < best) {
      best = report.rmse;
      best_name = label;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  write_text_atomic(base.output / "compare_order.csv", o.str());
  out << "lowest RMSE: " << best_name << " -> " << (base.output / "compare_order.csv").string() << '\n';
  return kOk;
}

void add_fit_options(CLI::App* app, FitArgs& a) {
  app->add_option("--config", a.config, "Run configuration (JSON) or a chain manifest")->required();
  app->add_option("--output", a.output, "Output directory (overrides the config)");
  app->add_option("--seed", a.seed, "Master seed (overrides the config)");
  app->add_option("--iterations", a.iterations, "Total sweeps");
  app->add_option("--burnin", a.burnin, "Discarded sweeps");
  app->add_option("--thin", a.thin, "Keep every thin-th sweep after burn-in");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatio-temporal product partition models for areal disease counts", "stppm"};
  app.require_subcommand(1);
  app.fallthrough(false);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Run the Gibbs sampler and write chain files");
  add_fit_options(fit_cmd, fit);
  fit_cmd->add_option("--chains", fit.chains, "Number of chains, run concurrently");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic scenario or run a simulation study");
  sim_cmd->add_option("--scenario", sim.scenario, "1: AR(3) + seasonal lag 24, 2: AR(2)")->check(CLI::IsMember({1, 2}));
  sim_cmd->add_option("--clusters", sim.clusters, "True number of clusters");
  sim_cmd->add_option("--rows", sim.rows, "Grid rows");
  sim_cmd->add_option("--cols", sim.cols, "Grid columns");
  sim_cmd->add_option("--times", sim.times, "Time points (including any holdout)");
  sim_cmd->add_option("--holdout", sim.holdout, "Trailing points kept out of counts.csv");
  sim_cmd->add_option("--seed", sim.seed, "Seed");
  sim_cmd->add_option("--output", sim.output, "Output directory")->required();
  sim_cmd->add_option("--iterations", sim.iterations, "Sweeps for the generated run config or the study");
  sim_cmd->add_option("--burnin", sim.burnin, "Burn-in (default: half)");
  sim_cmd->add_option("--thin", sim.thin, "Thinning");
  sim_cmd->add_option("--datasets", sim.datasets, "Run a study over this many replicas instead of writing data");
  sim_cmd->add_option("--config", sim.configs, "Study prior configs, e.g. HB:0.35 DP:1");

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Posterior predictive forecast from a saved chain");
  pred_cmd->add_option("--chain", pred.chain, "Chain directory")->required();
  pred_cmd->add_option("--horizon", pred.horizon, "Steps ahead");
  pred_cmd->add_option("--output", pred.output, "Forecast CSV (default: <chain>/forecast.csv)");
  pred_cmd->add_option("--covariates", pred.covariates, "Covariates file with the future weeks");
  pred_cmd->add_option("--holdout", pred.holdout, "Observed future values (area,week,disease,value) to score");
  pred_cmd->add_option("--seed", pred.seed, "Forecast seed (default: derived from the chain seed)");
  pred_cmd->add_flag("--no-noise", pred.no_noise, "Propagate the conditional mean only");

  SummarizeArgs summ;
  auto* summ_cmd = app.add_subcommand("summarize", "Partition estimate, fit criteria and parameter summaries");
  summ_cmd->add_option("--chain", summ.chain, "Chain directory")->required();
  summ_cmd->add_option("--loss", summ.loss, "vi (lower bound) or vi-exact")->check(CLI::IsMember({"vi", "vi-exact"}));
  summ_cmd->add_option("--restarts", summ.restarts, "Greedy search restarts");
  summ_cmd->add_option("--output", summ.output, "Output directory (default: the chain directory)");

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare-order", "Fit every disease ordering and compare RMSE");
  add_fit_options(cmp_cmd, cmp.fit);
  cmp_cmd->add_flag("--keep-chains", cmp.keep_chains, "Write the chain of every ordering");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kUsage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out);
    if (pred_cmd->parsed()) return cmd_predict(pred, out);
    if (summ_cmd->parsed()) return cmd_summarize(summ, out);
    if (cmp_cmd->parsed()) return cmd_compare_order(cmp, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    if (!e.state_dump().empty()) err << e.state_dump() << '\n';
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  err << app.help();
  return kUsage;
}

}  // namespace stppm::cli
