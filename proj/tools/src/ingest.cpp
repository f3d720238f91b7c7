#include "stppm/cli/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "stppm/errors.hpp"
#include "stppm/cli/csv.hpp"
#include "stppm/cli/persist.hpp"

namespace stppm::cli {

namespace {

bool is_integer_label(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return s.size() < 19;
}

// Orders labels numerically when every label is an integer, otherwise lexicographically.
struct LabelOrder {
  bool numeric = true;
  bool operator()(const std::string& a, const std::string& b) const {
    if (numeric) {
      const long x = std::stol(a);
      const long y = std::stol(b);
      if (x != y) return x < y;
    }
    return a < b;
  }
};

LabelOrder order_for(const std::vector<std::string>& labels) {
  LabelOrder o;
  o.numeric = std::all_of(labels.begin(), labels.end(), is_integer_label);
  return o;
}

std::vector<std::string> sorted_unique(std::vector<std::string> labels, const LabelOrder& o) {
  std::sort(labels.begin(), labels.end(), o);
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

std::optional<std::chrono::year_month_day> parse_iso_date(const std::string& s) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char tail = 0;
  if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

std::string format_iso_date(const std::chrono::year_month_day& ymd) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

bool in_southern_season(unsigned month, const std::string& season) {
  if (season == "summer") return month == 12 || month <= 2;
  if (season == "autumn") return month >= 3 && month <= 5;
  if (season == "winter") return month >= 6 && month <= 8;
  if (season == "spring") return month >= 9 && month <= 11;
  throw ConfigError("unknown season '" + season + "' (expected summer, autumn, winter or spring)");
}

double seasonal_value(const SeasonalCovariate& s, int t, const std::string& label) {
  if (s.kind == "periodic") {
    if (s.period < 1) throw ConfigError("seasonal covariate '" + s.name + "': period must be >= 1");
    const int phase = t % s.period;
    return phase < s.period * s.high_fraction ? 1.0 : 0.0;
  }
  if (s.kind == "southern-season") {
    const auto date = parse_iso_date(label);
    if (!date) {
      throw DataError("seasonal covariate '" + s.name + "' needs ISO week-start dates, got week '" +
                      label + "'");
    }
    return in_southern_season(static_cast<unsigned>(date->month()), s.season) ? 1.0 : 0.0;
  }
  throw ConfigError("seasonal covariate '" + s.name + "': unknown kind '" + s.kind + "'");
}

}  // namespace

double freeman_tukey(double count) {
  if (!(count >= 0.0)) throw DataError("Freeman-Tukey transform of negative count " + format_double(count));
  return std::sqrt(count) + std::sqrt(count + 1.0);
}

double freeman_tukey_arcsine(double count, double population) {
  if (!(count >= 0.0)) throw DataError("Freeman-Tukey transform of negative count " + format_double(count));
  if (!(population >= count)) {
    throw DataError("population " + format_double(population) + " below count " + format_double(count));
  }
  const double m1 = population + 1.0;
  return std::asin(std::sqrt(count / m1)) + std::asin(std::sqrt((count + 1.0) / m1));
}

Transform transform_from_string(const std::string& name) {
  if (name == "none") return Transform::None;
  if (name == "freeman-tukey") return Transform::FreemanTukey;
  if (name == "freeman-tukey-arcsine") return Transform::FreemanTukeyArcsine;
  throw ConfigError("unknown transform '" + name +
                    "' (expected none, freeman-tukey or freeman-tukey-arcsine)");
}

const char* to_string(Transform t) {
  switch (t) {
    case Transform::None: return "none";
    case Transform::FreemanTukey: return "freeman-tukey";
    case Transform::FreemanTukeyArcsine: return "freeman-tukey-arcsine";
  }
  return "none";
}

std::string advance_week_label(const std::string& label, int steps) {
  if (is_integer_label(label)) return std::to_string(std::stol(label) + steps);
  if (const auto date = parse_iso_date(label)) {
    const auto next = std::chrono::sys_days{*date} + std::chrono::days{7 * steps};
    return format_iso_date(std::chrono::year_month_day{next});
  }
  return label + "~" + std::to_string(steps);
}

IngestedData ingest(const IngestOptions& options) {
  // --- counts ---------------------------------------------------------------
  const CsvTable counts = read_csv(options.counts);
  const int c_area = counts.require("area");
  const int c_week = counts.require("week");
  const int c_disease = counts.require("disease");
  const int c_count = counts.find("count");
  const int c_value = counts.find("value");
  const int c_pop = counts.find("population");
  if (c_count < 0 && c_value < 0) {
    throw DataError(options.counts.string() + ": missing column 'count' (or 'value')");
  }
  if (c_count >= 0 && c_value >= 0) {
    throw DataError(options.counts.string() + ": has both 'count' and 'value' columns");
  }
  if (c_value >= 0 && options.transform != Transform::None) {
    throw DataError(options.counts.string() +
                    ": transform requested but the file holds pre-transformed 'value' data");
  }
  if (options.transform == Transform::FreemanTukeyArcsine && c_pop < 0) {
    throw DataError(options.counts.string() + ": the arcsine transform needs a 'population' column");
  }
  if (counts.rows.empty()) throw DataError(options.counts.string() + ": no data rows");

  std::vector<std::string> area_labels;
  std::vector<std::string> week_labels;
  std::vector<std::string> disease_seen;
  for (const auto& row : counts.rows) {
    area_labels.push_back(row[static_cast<std::size_t>(c_area)]);
    week_labels.push_back(row[static_cast<std::size_t>(c_week)]);
    const auto& dname = row[static_cast<std::size_t>(c_disease)];
    if (std::find(disease_seen.begin(), disease_seen.end(), dname) == disease_seen.end()) {
      disease_seen.push_back(dname);
    }
  }

  // --- neighbors ------------------------------------------------------------
  const CsvTable nb = read_csv(options.neighbors);
  const int n_a = nb.require("area_a");
  const int n_b = nb.require("area_b");
  for (const auto& row : nb.rows) area_labels.push_back(row[static_cast<std::size_t>(n_a)]);

  const LabelOrder area_order = order_for(area_labels);
  // Areas come from the counts file; the neighbor file may not introduce new ones.
  std::vector<std::string> count_areas;
  for (const auto& row : counts.rows) count_areas.push_back(row[static_cast<std::size_t>(c_area)]);
  const std::vector<std::string> areas = sorted_unique(count_areas, area_order);
  std::unordered_map<std::string, int> area_index;
  for (std::size_t i = 0; i < areas.size(); ++i) {
    if (areas[i].empty()) throw DataError(options.counts.string() + ": empty area label");
    area_index[areas[i]] = static_cast<int>(i);
  }
  const int n = static_cast<int>(areas.size());

  std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(n));
  std::vector<bool> listed(static_cast<std::size_t>(n), false);
  for (std::size_t r = 0; r < nb.rows.size(); ++r) {
    const auto& a = nb.rows[r][static_cast<std::size_t>(n_a)];
    const auto& b = nb.rows[r][static_cast<std::size_t>(n_b)];
    const auto ia = area_index.find(a);
    if (ia == area_index.end()) {
      throw DataError(nb.where(r) + ": area '" + a + "' does not appear in " + options.counts.string());
    }
    listed[static_cast<std::size_t>(ia->second)] = true;
    if (b.empty()) continue;
    const auto ib = area_index.find(b);
    if (ib == area_index.end()) {
      throw DataError(nb.where(r) + ": area '" + b + "' does not appear in " + options.counts.string());
    }
    if (ia->second == ib->second) throw DataError(nb.where(r) + ": area '" + a + "' lists itself as a neighbor");
    listed[static_cast<std::size_t>(ib->second)] = true;
    adjacency[static_cast<std::size_t>(ia->second)].push_back(ib->second);
  }
  for (int i = 0; i < n; ++i) {
    if (!listed[static_cast<std::size_t>(i)]) {
      throw DataError("area '" + areas[static_cast<std::size_t>(i)] + "' is absent from " +
                      options.neighbors.string() + " (declare isolated areas with an empty area_b)");
    }
  }
  ArealMap map(n, adjacency);
  map.set_labels(areas);

  // --- panel axes -----------------------------------------------------------
  const LabelOrder week_order = order_for(week_labels);
  const std::vector<std::string> weeks = sorted_unique(week_labels, week_order);
  std::unordered_map<std::string, int> week_index;
  for (std::size_t t = 0; t < weeks.size(); ++t) week_index[weeks[t]] = static_cast<int>(t);
  const int times = static_cast<int>(weeks.size());

  std::vector<std::string> diseases = disease_seen;
  if (!options.disease_order.empty()) {
    std::vector<std::string> a = options.disease_order;
    std::vector<std::string> b = disease_seen;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) {
      throw ConfigError("disease_order must list exactly the diseases in the counts file");
    }
    diseases = options.disease_order;
  }
  std::unordered_map<std::string, int> disease_index;
  for (std::size_t d = 0; d < diseases.size(); ++d) disease_index[diseases[d]] = static_cast<int>(d);
  const int nd = static_cast<int>(diseases.size());

  ObservationPanel panel(n, times, nd);
  panel.disease_names = diseases;
  panel.time_labels = weeks;

  IngestedData out;
  if (c_count >= 0) out.counts.assign(static_cast<std::size_t>(n) * times * nd, 0.0);
  std::vector<bool> seen(static_cast<std::size_t>(n) * times * nd, false);
  for (std::size_t r = 0; r < counts.rows.size(); ++r) {
    const auto& row = counts.rows[r];
    const int i = area_index.at(row[static_cast<std::size_t>(c_area)]);
    const int t = week_index.at(row[static_cast<std::size_t>(c_week)]);
    const int d = disease_index.at(row[static_cast<std::size_t>(c_disease)]);
    const std::size_t cell = (static_cast<std::size_t>(i) * times + t) * nd + d;
    if (seen[cell]) {
      throw DataError(counts.where(r) + ": duplicate cell (area " + areas[static_cast<std::size_t>(i)] +
                      ", week " + weeks[static_cast<std::size_t>(t)] + ", disease " +
                      diseases[static_cast<std::size_t>(d)] + ")");
    }
    seen[cell] = true;
    const std::string ctx = counts.where(r);
    double v = 0.0;
    if (c_value >= 0) {
      v = parse_double(row[static_cast<std::size_t>(c_value)], ctx + " column 'value'");
    } else {
      const double c = parse_double(row[static_cast<std::size_t>(c_count)], ctx + " column 'count'");
      if (c < 0.0 || c != std::floor(c)) {
        throw DataError(ctx + " column 'count': counts must be nonnegative integers, got '" +
                        row[static_cast<std::size_t>(c_count)] + "'");
      }
      out.counts[cell] = c;
      switch (options.transform) {
        case Transform::None: v = c; break;
        case Transform::FreemanTukey: v = freeman_tukey(c); break;
        case Transform::FreemanTukeyArcsine:
          v = freeman_tukey_arcsine(c, parse_double(row[static_cast<std::size_t>(c_pop)],
                                                    ctx + " column 'population'"));
          break;
      }
    }
    if (!std::isfinite(v)) throw DataError(ctx + ": non-finite outcome");
    panel.y(i, t, d) = v;
  }
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < times; ++t) {
      for (int d = 0; d < nd; ++d) {
        if (!seen[(static_cast<std::size_t>(i) * times + t) * nd + d]) {
          throw DataError(options.counts.string() + ": missing cell (area " +
                          areas[static_cast<std::size_t>(i)] + ", week " +
                          weeks[static_cast<std::size_t>(t)] + ", disease " +
                          diseases[static_cast<std::size_t>(d)] + ")");
        }
      }
    }
  }

  // --- covariates -----------------------------------------------------------
  std::optional<CsvTable> cov;
  if (!options.covariates.empty()) cov = read_csv(options.covariates);

  std::vector<std::string> names;
  if (options.intercept) names.push_back("intercept");
  std::vector<std::string> future;
  int v_name = -1, v_area = -1, v_week = -1, v_disease = -1, v_value = -1;
  if (cov) {
    v_name = cov->require("name");
    v_area = cov->require("area");
    v_week = cov->require("week");
    v_disease = cov->require("disease");
    v_value = cov->require("value");
    std::vector<std::string> extra_weeks;
    for (std::size_t r = 0; r < cov->rows.size(); ++r) {
      const auto& row = cov->rows[r];
      const auto& name = row[static_cast<std::size_t>(v_name)];
      if (name.empty() || name == "*") throw DataError(cov->where(r) + ": invalid covariate name");
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
      const auto& w = row[static_cast<std::size_t>(v_week)];
      if (w != "*" && !week_index.count(w)) extra_weeks.push_back(w);
    }
    if (!extra_weeks.empty()) {
      std::vector<std::string> all = weeks;
      all.insert(all.end(), extra_weeks.begin(), extra_weeks.end());
      const LabelOrder o = order_for(all);
      future = sorted_unique(extra_weeks, o);
      if (!o(weeks.back(), future.front())) {
        throw DataError(options.covariates.string() + ": week '" + future.front() +
                        "' is neither a counted week nor after the last counted week");
      }
    }
  }
  for (const auto& s : options.seasonal) {
    if (std::find(names.begin(), names.end(), s.name) != names.end()) {
      throw ConfigError("duplicate covariate name '" + s.name + "'");
    }
    names.push_back(s.name);
  }
  if (options.future_steps < 0) throw ConfigError("future_steps must be >= 0");
  while (static_cast<int>(future.size()) < options.future_steps) {
    future.push_back(advance_week_label(future.empty() ? weeks.back() : future.back(), 1));
  }
  std::vector<std::string> all_weeks = weeks;
  all_weeks.insert(all_weeks.end(), future.begin(), future.end());
  const int tcov = static_cast<int>(all_weeks.size());
  std::unordered_map<std::string, int> all_week_index;
  for (std::size_t t = 0; t < all_weeks.size(); ++t) all_week_index[all_weeks[t]] = static_cast<int>(t);
  panel.reset_covariates(names, tcov);
  const int p = static_cast<int>(names.size());

  if (options.intercept) {
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < tcov; ++t)
        for (int d = 0; d < nd; ++d) panel.x(i, t, d, 0) = 1.0;
  }

  if (cov) {
    // Specificity of the row that set each cell; more specific rows win and
    // two rows of equal specificity may not both set a cell.
    const std::size_t cells = static_cast<std::size_t>(n) * tcov * nd * static_cast<std::size_t>(p);
    std::vector<signed char> setby(cells, -1);
    std::vector<std::size_t> order(cov->rows.size());
    for (std::size_t r = 0; r < order.size(); ++r) order[r] = r;
    auto specificity = [&](std::size_t r) {
      const auto& row = cov->rows[r];
      return (row[static_cast<std::size_t>(v_area)] != "*") + (row[static_cast<std::size_t>(v_week)] != "*") +
             (row[static_cast<std::size_t>(v_disease)] != "*");
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return specificity(a) < specificity(b); });
    for (const std::size_t r : order) {
      const auto& row = cov->rows[r];
      const int l = static_cast<int>(std::find(names.begin(), names.end(), row[static_cast<std::size_t>(v_name)]) -
                                     names.begin());
      const double value = parse_double(row[static_cast<std::size_t>(v_value)], cov->where(r) + " column 'value'");
      if (!std::isfinite(value)) throw DataError(cov->where(r) + ": non-finite covariate value");
      auto range = [&](int col, const std::unordered_map<std::string, int>& index, int size,
                       const char* what) -> std::pair<int, int> {
        const auto& s = row[static_cast<std::size_t>(col)];
        if (s == "*") return {0, size};
        const auto it = index.find(s);
        if (it == index.end()) {
          throw DataError(cov->where(r) + ": unknown " + what + " '" + s + "'");
        }
        return {it->second, it->second + 1};
      };
      const auto [i0, i1] = range(v_area, area_index, n, "area");
      const auto [t0, t1] = range(v_week, all_week_index, tcov, "week");
      const auto [d0, d1] = range(v_disease, disease_index, nd, "disease");
      const int spec = specificity(r);
      for (int i = i0; i < i1; ++i) {
        for (int t = t0; t < t1; ++t) {
          for (int d = d0; d < d1; ++d) {
            const std::size_t cell = ((static_cast<std::size_t>(i) * tcov + t) * nd + d) * p + l;
            if (setby[cell] == spec) {
              throw DataError(cov->where(r) + ": covariate '" + names[static_cast<std::size_t>(l)] +
                              "' set twice for area " + areas[static_cast<std::size_t>(i)] + ", week " +
                              all_weeks[static_cast<std::size_t>(t)] + ", disease " +
                              diseases[static_cast<std::size_t>(d)]);
            }
            setby[cell] = static_cast<signed char>(spec);
            panel.x(i, t, d, l) = value;
          }
        }
      }
    }
  }

  for (const auto& s : options.seasonal) {
    const int l = static_cast<int>(std::find(names.begin(), names.end(), s.name) - names.begin());
    for (int t = 0; t < tcov; ++t) {
      const double v = seasonal_value(s, t, all_weeks[static_cast<std::size_t>(t)]);
      for (int i = 0; i < n; ++i)
        for (int d = 0; d < nd; ++d) panel.x(i, t, d, l) = v;
    }
  }

  for (int l = 0; l < p; ++l) {
    for (int i = 0; i < n; ++i) {
      for (int t = 0; t < tcov; ++t) {
        for (int d = 0; d < nd; ++d) {
          if (std::isnan(panel.x(i, t, d, l))) {
            throw DataError((options.covariates.empty() ? std::string("covariates")
                                                        : options.covariates.string()) +
                            ": covariate '" + names[static_cast<std::size_t>(l)] + "' missing for area " +
                            areas[static_cast<std::size_t>(i)] + ", week " +
                            all_weeks[static_cast<std::size_t>(t)] + ", disease " +
                            diseases[static_cast<std::size_t>(d)]);
          }
        }
      }
    }
  }
  // Remember the future labels for persistence and forecasting output.
  panel.time_labels = all_weeks;
  panel.time_labels.resize(static_cast<std::size_t>(times));

  out.panel = std::move(panel);
  out.map = std::move(map);
  return out;
}

void persist_panel(const ObservationPanel& panel, const ArealMap& map,
                   const std::filesystem::path& counts, const std::filesystem::path& neighbors,
                   const std::filesystem::path& covariates) {
  const int n = panel.areas();
  const int times = panel.times();
  const int nd = panel.diseases();
  auto area_label = [&](int i) {
    return static_cast<std::size_t>(i) < map.labels().size() ? map.labels()[static_cast<std::size_t>(i)]
                                                              : std::to_string(i + 1);
  };
  auto disease_label = [&](int d) {
    return static_cast<std::size_t>(d) < panel.disease_names.size() ? panel.disease_names[static_cast<std::size_t>(d)]
                                                                     : "d" + std::to_string(d + 1);
  };
  std::vector<std::string> labels(static_cast<std::size_t>(panel.covariate_times()));
  for (int t = 0; t < panel.covariate_times(); ++t) {
    if (static_cast<std::size_t>(t) < panel.time_labels.size()) {
      labels[static_cast<std::size_t>(t)] = panel.time_labels[static_cast<std::size_t>(t)];
    } else if (t == 0) {
      labels[0] = "1";
    } else {
      labels[static_cast<std::size_t>(t)] = advance_week_label(labels[static_cast<std::size_t>(t - 1)], 1);
    }
  }

  std::ostringstream c;
  c << "area,week,disease,value\n";
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < times; ++t)
      for (int d = 0; d < nd; ++d)
        c << csv_escape(area_label(i)) << ',' << csv_escape(labels[static_cast<std::size_t>(t)]) << ','
          << csv_escape(disease_label(d)) << ',' << format_double(panel.y(i, t, d)) << '\n';
  write_text_atomic(counts, c.str());

  std::ostringstream nbs;
  nbs << "area_a,area_b\n";
  for (int i = 0; i < map.size(); ++i) {
    if (map.degree(i) == 0) nbs << csv_escape(area_label(i)) << ",\n";
    for (int j : map.neighbors(i)) {
      if (j > i) nbs << csv_escape(area_label(i)) << ',' << csv_escape(area_label(j)) << '\n';
    }
  }
  write_text_atomic(neighbors, nbs.str());

  std::ostringstream x;
  x << "name,area,week,disease,value\n";
  const auto& names = panel.covariate_names();
  for (int l = 0; l < panel.covariate_count(); ++l)
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < panel.covariate_times(); ++t)
        for (int d = 0; d < nd; ++d)
          x << csv_escape(names[static_cast<std::size_t>(l)]) << ',' << csv_escape(area_label(i)) << ','
            << csv_escape(labels[static_cast<std::size_t>(t)]) << ',' << csv_escape(disease_label(d)) << ','
            << format_double(panel.x(i, t, d, l)) << '\n';
  write_text_atomic(covariates, x.str());
}

}  // namespace stppm::cli
