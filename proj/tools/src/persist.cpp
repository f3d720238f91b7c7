#include "stppm/cli/persist.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "stppm/errors.hpp"
#include "stppm/cli/csv.hpp"

namespace stppm::cli {

namespace fs = std::filesystem;

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_atomic(const fs::path& path, const nlohmann::json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

namespace {

template <typename Derived>
void append_block(std::ostringstream& out, int iteration, const Eigen::DenseBase<Derived>& m) {
  long index = 1;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << iteration << ',' << index++ << ',' << format_double(m(r, c)) << '\n';
    }
  }
}

void append_scalar(std::ostringstream& out, int iteration, double v) {
  out << iteration << ",1," << format_double(v) << '\n';
}

// iteration -> flat values in index order
using BlockValues = std::map<int, std::vector<double>>;

BlockValues read_block(const fs::path& file) {
  const CsvTable t = read_csv(file);
  const int ci = t.require("iteration");
  const int cx = t.require("index");
  const int cv = t.require("value");
  BlockValues out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const int it = static_cast<int>(parse_long(row[static_cast<std::size_t>(ci)], t.where(r)));
    const long idx = parse_long(row[static_cast<std::size_t>(cx)], t.where(r));
    auto& v = out[it];
    if (idx != static_cast<long>(v.size()) + 1) throw DataError(t.where(r) + ": indices out of order");
    v.push_back(parse_double(row[static_cast<std::size_t>(cv)], t.where(r)));
  }
  return out;
}

Eigen::MatrixXd to_matrix(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols,
                          const std::string& what) {
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) {
    throw DataError(what + ": expected " + std::to_string(rows * cols) + " values, found " +
                    std::to_string(v.size()));
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v[static_cast<std::size_t>(r * cols + c)];
  return m;
}

}  // namespace

void write_chain_files(const fs::path& dir, const PosteriorChain& chain) {
  std::map<std::string, std::ostringstream> blocks;
  for (const char* name : kChainBlocks) blocks[name];
  std::ostringstream parts;
  parts << "iteration";
  for (int i = 0; i < chain.dims.areas; ++i) parts << ",area" << (i + 1);
  parts << '\n';
  for (std::size_t s = 0; s < chain.states.size(); ++s) {
    const ModelState& st = chain.states[s];
    const int it = chain.iterations[s];
    append_block(blocks["beta"], it, st.beta.transpose());
    append_block(blocks["gamma"], it, st.gamma);
    append_block(blocks["mu_gamma"], it, st.mu_gamma.transpose());
    append_block(blocks["sigma_gamma"], it, st.sigma_gamma);
    append_block(blocks["phi"], it, st.phi);
    append_block(blocks["omega"], it, st.omega);
    append_block(blocks["alpha"], it, st.alpha.transpose());
    append_block(blocks["sigma2_phi"], it, st.sigma2_phi.transpose());
    append_block(blocks["sigma2"], it, st.sigma2);
    append_scalar(blocks["xi"], it, st.xi);
    append_scalar(blocks["log_posterior"], it, chain.log_posterior[s]);
    parts << it;
    for (int l : st.partition.labels()) parts << ',' << (l + 1);
    parts << '\n';
  }
  for (auto& [name, body] : blocks) {
    write_text_atomic(dir / (name + ".csv"), "iteration,index,value\n" + body.str());
  }
  write_text_atomic(dir / "partitions.csv", parts.str());
}

PosteriorChain read_chain(const fs::path& dir) {
  const nlohmann::json m = read_json(dir / "manifest.json");
  PosteriorChain chain;
  try {
    const auto& d = m.at("dims");
    chain.dims.areas = d.at("areas").get<int>();
    chain.dims.times = d.at("times").get<int>();
    chain.dims.diseases = d.at("diseases").get<int>();
    chain.dims.covariates = d.at("covariates").get<int>();
    chain.dims.lags = d.at("lags").get<int>();
    chain.lags.ar_lags = m.at("config").at("ar_lags").get<std::vector<int>>();
    chain.lags.seasonal_lags = m.at("config").at("seasonal_lags").get<std::vector<int>>();
    chain.schedule.iterations = m.at("config").at("iterations").get<int>();
    chain.schedule.burnin = m.at("config").at("burnin").get<int>();
    chain.schedule.thin = m.at("config").at("thin").get<int>();
    chain.seed = m.at("chain_seed").get<std::uint64_t>();
    chain.ordering_rule = ordering_rule_from_string(m.at("config").at("ordering").get<std::string>());
    const auto acc = m.at("alpha_acceptance").get<std::vector<double>>();
    chain.alpha_acceptance = Eigen::Map<const Eigen::VectorXd>(acc.data(), static_cast<Eigen::Index>(acc.size()));
    const auto step = m.at("alpha_step").get<std::vector<double>>();
    chain.alpha_step = Eigen::Map<const Eigen::VectorXd>(step.data(), static_cast<Eigen::Index>(step.size()));
  } catch (const nlohmann::json::exception& e) {
    throw DataError((dir / "manifest.json").string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError((dir / "manifest.json").string() + ": " + e.what());
  }

  const ModelDims& dims = chain.dims;
  const int n = dims.areas;
  const int nd = dims.diseases;
  const int qd = dims.gamma_size();

  const CsvTable parts = read_csv(dir / "partitions.csv");
  if (static_cast<int>(parts.header.size()) != n + 1) {
    throw DataError((dir / "partitions.csv").string() + ": expected " + std::to_string(n + 1) + " columns");
  }
  std::map<std::string, BlockValues> blocks;
  for (const char* name : kChainBlocks) blocks[name] = read_block(dir / (std::string(name) + ".csv"));

  for (std::size_t r = 0; r < parts.rows.size(); ++r) {
    const auto& row = parts.rows[r];
    const int it = static_cast<int>(parse_long(row[0], parts.where(r)));
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      labels[static_cast<std::size_t>(i)] =
          static_cast<int>(parse_long(row[static_cast<std::size_t>(i + 1)], parts.where(r))) - 1;
    }
    ModelState st;
    st.partition = Partition::from_labels(labels);
    const int k = st.partition.block_count();
    auto get = [&](const char* name) -> const std::vector<double>& {
      const auto& b = blocks.at(name);
      const auto found = b.find(it);
      if (found == b.end()) {
        throw DataError((dir / (std::string(name) + ".csv")).string() + ": no values for iteration " +
                        std::to_string(it));
      }
      return found->second;
    };
    const std::string at = " (iteration " + std::to_string(it) + ")";
    st.beta = to_matrix(get("beta"), dims.beta_size(), 1, "beta" + at);
    st.gamma = to_matrix(get("gamma"), k, qd, "gamma" + at);
    st.mu_gamma = to_matrix(get("mu_gamma"), qd, 1, "mu_gamma" + at);
    st.sigma_gamma = to_matrix(get("sigma_gamma"), qd, qd, "sigma_gamma" + at);
    st.phi = to_matrix(get("phi"), n, nd, "phi" + at);
    st.omega = to_matrix(get("omega"), bridge_pair_count(nd), 2, "omega" + at);
    st.alpha = to_matrix(get("alpha"), nd, 1, "alpha" + at);
    st.sigma2_phi = to_matrix(get("sigma2_phi"), nd, 1, "sigma2_phi" + at);
    st.sigma2 = to_matrix(get("sigma2"), k, nd, "sigma2" + at);
    st.xi = to_matrix(get("xi"), 1, 1, "xi" + at)(0, 0);
    chain.log_posterior.push_back(to_matrix(get("log_posterior"), 1, 1, "log_posterior" + at)(0, 0));
    chain.iterations.push_back(it);
    chain.states.push_back(std::move(st));
  }
  return chain;
}

}  // namespace stppm::cli
