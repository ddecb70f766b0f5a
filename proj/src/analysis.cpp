#include "oilrf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "oilrf/errors.hpp"
#include "oilrf/text.hpp"

namespace oilrf {

namespace {

Eigen::Index require_feature(const std::vector<std::string>& names, const std::string& name,
                             const char* op) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw std::invalid_argument(std::string(op) + ": unknown feature '" + name + "'");
  }
  return static_cast<Eigen::Index>(it - names.begin());
}

void require_same_features(const ForestModel& m, const Dataset& d, const char* op) {
  if (m.feature_names != d.feature_names) {
    throw std::invalid_argument(std::string(op) +
                                ": dataset features do not match the model");
  }
}

struct GridBounds {
  double lo, hi;
};

// Observed range extended by 10% on each side; a constant column gets a
// symmetric span so a grid around it is still strictly increasing.
GridBounds grid_bounds(const Dataset& d, Eigen::Index col) {
  const double mn = d.X.col(col).minCoeff();
  const double mx = d.X.col(col).maxCoeff();
  const double range = mx - mn;
  const double span = range > 0.0 ? 0.1 * range : 0.1 * std::max(1.0, std::abs(mx));
  return {mn - span, mx + span};
}

void check_grid(const Eigen::VectorXd& grid, const Dataset& d, Eigen::Index col,
                const std::string& feature) {
  if (grid.size() < 1) throw ConfigError("partial-effect grid for '" + feature + "' is empty");
  for (Eigen::Index i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw ConfigError("partial-effect grid for '" + feature +
                        "' must be strictly increasing");
    }
  }
  const GridBounds b = grid_bounds(d, col);
  const double slack = 1e-9 * std::max(1.0, b.hi - b.lo);
  if (grid[0] < b.lo - slack || grid[grid.size() - 1] > b.hi + slack) {
    throw ConfigError("partial-effect grid for '" + feature +
                      "' leaves the observed range extended by 10% [" + format_double(b.lo) +
                      ", " + format_double(b.hi) + "]");
  }
}

const EvalRow* find_row(const std::vector<EvalRow>& rows, const std::string& name) {
  for (const auto& r : rows) {
    if (r.model == name) return &r;
  }
  return nullptr;
}

std::optional<double> safe_ratio(const std::optional<double>& num, const EvalRow* baseline) {
  if (!num || !baseline) return std::nullopt;
  if (!(baseline->rmse_in_sample > 0.0)) return std::nullopt;  // flagged, not divided
  return *num / baseline->rmse_in_sample;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

ImportanceReport importance(const ForestModel& m) {
  if (m.trees.empty()) throw std::invalid_argument("importance: model has no trees");
  ImportanceReport report;
  report.features = m.feature_names;
  report.raw = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.feature_names.size()));
  for (const auto& tree : m.trees) report.raw += tree.feature_reduction;
  const double total = report.raw.sum();
  if (total > 0.0) {
    report.normalized = report.raw / total;
  } else {
    report.normalized = Eigen::VectorXd::Zero(report.raw.size());
    report.degenerate = true;
  }
  return report;
}

void write_importance_csv(const std::filesystem::path& path, const ImportanceReport& report) {
  std::vector<std::size_t> order(report.features.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.normalized[static_cast<Eigen::Index>(a)] >
           report.normalized[static_cast<Eigen::Index>(b)];
  });
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "feature,raw,normalized\n";
  for (const std::size_t i : order) {
    const auto j = static_cast<Eigen::Index>(i);
    out << report.features[i] << ',' << format_double(report.raw[j]) << ','
        << format_double(report.normalized[j]) << '\n';
  }
}

Eigen::VectorXd make_grid(const Dataset& d, const std::string& feature, int n_points) {
  const Eigen::Index col = require_feature(d.feature_names, feature, "make_grid");
  if (n_points < 2) throw ConfigError("partial-effect grid needs at least 2 points");
  const GridBounds b = grid_bounds(d, col);
  return Eigen::VectorXd::LinSpaced(n_points, b.lo, b.hi);
}

PartialEffectGrid partial_effect_1d(const ForestModel& m, const Dataset& d,
                                    const std::string& feature, const Eigen::VectorXd& grid) {
  require_same_features(m, d, "partial_effect_1d");
  const Eigen::Index col = require_feature(m.feature_names, feature, "partial_effect_1d");
  check_grid(grid, d, col, feature);

  PartialEffectGrid out;
  out.features = {feature};
  out.grid1 = grid;
  out.baseline = d.X.colwise().mean();
  out.effects.resize(grid.size(), 1);

  Eigen::VectorXd row = out.baseline;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    row[col] = grid[i];
    out.effects(i, 0) = predict_row(m, row);
  }
  return out;
}

PartialEffectGrid partial_effect_2d(const ForestModel& m, const Dataset& d,
                                    const std::string& f1, const std::string& f2,
                                    const Eigen::VectorXd& grid1,
                                    const Eigen::VectorXd& grid2) {
  require_same_features(m, d, "partial_effect_2d");
  if (f1 == f2) throw std::invalid_argument("partial_effect_2d: features must differ");
  const Eigen::Index c1 = require_feature(m.feature_names, f1, "partial_effect_2d");
  const Eigen::Index c2 = require_feature(m.feature_names, f2, "partial_effect_2d");
  check_grid(grid1, d, c1, f1);
  check_grid(grid2, d, c2, f2);

  PartialEffectGrid out;
  out.features = {f1, f2};
  out.grid1 = grid1;
  out.grid2 = grid2;
  out.baseline = d.X.colwise().mean();
  out.effects.resize(grid1.size(), grid2.size());

  Eigen::VectorXd row = out.baseline;
  for (Eigen::Index i = 0; i < grid1.size(); ++i) {
    row[c1] = grid1[i];
    for (Eigen::Index j = 0; j < grid2.size(); ++j) {
      row[c2] = grid2[j];
      out.effects(i, j) = predict_row(m, row);
    }
  }
  return out;
}

void write_partial_effect_csv(const std::filesystem::path& path, const PartialEffectGrid& g) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  if (g.grid2.size() == 0) {
    out << "grid,effect\n";
    for (Eigen::Index i = 0; i < g.grid1.size(); ++i) {
      out << format_double(g.grid1[i]) << ',' << format_double(g.effects(i, 0)) << '\n';
    }
  } else {
    out << "g1,g2,effect\n";
    for (Eigen::Index i = 0; i < g.grid1.size(); ++i) {
      for (Eigen::Index j = 0; j < g.grid2.size(); ++j) {
        out << format_double(g.grid1[i]) << ',' << format_double(g.grid2[j]) << ','
            << format_double(g.effects(i, j)) << '\n';
      }
    }
  }
}

void ForecastSpec::validate() const {
  if (horizon < 1) throw ConfigError("forecast horizon must be >= 1");
}

Dataset make_forecast_dataset(const Dataset& d, const ForecastSpec& spec,
                              const DailyPanel& panel, const std::string& price_column) {
  spec.validate();
  if (!panel.has(price_column)) {
    throw ConfigError("panel has no column '" + price_column + "'");
  }
  const Eigen::VectorXd& price = panel.col(price_column);
  const auto n_panel = static_cast<Eigen::Index>(panel.calendar.size());
  if (spec.horizon >= n_panel) {
    throw DataError("forecast horizon " + std::to_string(spec.horizon) +
                    " is not covered by a panel of " + std::to_string(n_panel) + " rows");
  }

  // Dataset dates and panel calendar are both ascending; walk them together.
  std::vector<Eigen::Index> panel_row(d.dates.size());
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < d.dates.size(); ++i) {
    while (r < n_panel && panel.calendar[static_cast<std::size_t>(r)] < d.dates[i]) ++r;
    if (r == n_panel || !(panel.calendar[static_cast<std::size_t>(r)] == d.dates[i])) {
      throw DataError("forecast target: date " + d.dates[i].to_string() +
                      " is not on the panel calendar");
    }
    panel_row[i] = r;
  }

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.dates.size(); ++i) {
    if (panel_row[i] + spec.horizon < n_panel) keep.push_back(i);
  }
  if (keep.empty()) {
    throw DataError("forecast horizon " + std::to_string(spec.horizon) +
                    " leaves no rows in the dataset");
  }

  Dataset out;
  out.feature_names = d.feature_names;
  out.target_name = d.target_name;
  out.dates.reserve(keep.size());
  out.X.resize(static_cast<Eigen::Index>(keep.size()), d.cols());
  out.y.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const std::size_t i = keep[k];
    const Eigen::Index r0 = panel_row[i];
    const Eigen::Index r1 = r0 + spec.horizon;
    const double p0 = price[r0];
    const double p1 = price[r1];
    if (!(p0 > 0.0) || !(p1 > 0.0) || !std::isfinite(p0) || !std::isfinite(p1)) {
      throw DataError("forecast target: column '" + price_column +
                      "' is not a positive price at " + d.dates[i].to_string());
    }
    out.dates.push_back(d.dates[i]);
    out.X.row(static_cast<Eigen::Index>(k)) = d.X.row(static_cast<Eigen::Index>(i));
    out.y[static_cast<Eigen::Index>(k)] = std::log(p1) - std::log(p0);
  }
  return out;
}

EvalTable compare(std::vector<EvalRow> stored, RatioBasis basis, const std::string& ols_name,
                  const std::string& ar1_name) {
  EvalTable table;
  table.basis = basis;
  table.rows = std::move(stored);
  const EvalRow* ols = find_row(table.rows, ols_name);
  const EvalRow* ar1 = find_row(table.rows, ar1_name);
  for (auto& row : table.rows) {
    const std::optional<double> num = basis == RatioBasis::kInSample
                                          ? std::optional<double>(row.rmse_in_sample)
                                          : row.rmse_out;
    row.ratio_ols = safe_ratio(num, ols);
    row.ratio_ar1 = safe_ratio(num, ar1);
  }
  return table;
}

EvalTable compare(const ForestModel& forest, const LinearModel& ols, const LinearModel& ar1,
                  const Dataset& d, RatioBasis basis) {
  const EvalMetrics metrics = evaluate(forest, d);
  std::vector<EvalRow> rows(3);
  rows[0].model = "forest";
  rows[0].config = forest.config.summary();
  rows[0].rmse_in_sample = metrics.rmse_in_sample;
  rows[0].rmse_out = metrics.rmse_oob;
  rows[1].model = "ols";
  rows[1].config = std::to_string(ols.feature_names.size()) + " features";
  rows[1].rmse_in_sample = rmse(ols, d);
  rows[2].model = "ar1";
  rows[2].config = std::to_string(ar1.feature_names.size()) + " features";
  rows[2].rmse_in_sample = rmse(ar1, d);
  return compare(std::move(rows), basis);
}

std::string render_eval_text(const EvalTable& table) {
  const std::vector<std::string> header = {"model",        "config",
                                           "in sample",    "out of sample",
                                           "ratio vs OLS", "ratio vs AR(1)"};
  std::vector<std::vector<std::string>> cells;
  cells.push_back(header);
  for (const auto& row : table.rows) {
    cells.push_back({row.model, row.config, format_fixed(row.rmse_in_sample, 4),
                     row.rmse_out ? format_fixed(*row.rmse_out, 4) : "-",
                     row.ratio_ols ? format_fixed(*row.ratio_ols, 3) : "-",
                     row.ratio_ar1 ? format_fixed(*row.ratio_ar1, 3) : "-"});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += "  ";
      // Text columns flush left, numeric columns flush right.
      out += c < 2 ? pad_right(row[c], width[c]) : pad_left(row[c], width[c]);
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

std::string render_forecast_text(const std::vector<std::pair<int, EvalTable>>& by_horizon) {
  const std::vector<std::string> header = {"horizon", "in sample", "out of sample", "AR(1)",
                                           "OLS"};
  std::vector<std::vector<std::string>> cells;
  cells.push_back(header);
  for (const auto& [horizon, table] : by_horizon) {
    const EvalRow* forest = find_row(table.rows, "forest");
    if (!forest && !table.rows.empty()) forest = &table.rows.front();
    if (!forest) throw std::invalid_argument("render_forecast_text: empty table");
    cells.push_back({std::to_string(horizon), format_fixed(forest->rmse_in_sample, 4),
                     forest->rmse_out ? format_fixed(*forest->rmse_out, 4) : "-",
                     forest->ratio_ar1 ? format_fixed(*forest->ratio_ar1, 3) : "-",
                     forest->ratio_ols ? format_fixed(*forest->ratio_ols, 3) : "-"});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += " | ";
      out += c == 0 ? pad_right(row[c], width[c]) : pad_left(row[c], width[c]);
    }
    out += '\n';
  }
  return out;
}

SubsampleStudy subsample_study(const Dataset& d, const std::vector<DateRange>& ranges,
                               const ForestConfig& cfg, int n_threads) {
  SubsampleStudy study;
  for (const auto& range : ranges) {
    Dataset slice;
    try {
      slice = filter_dates(d, range.from, range.to);
    } catch (const DataError&) {
      study.warnings.push_back("subsample range '" + range.name + "' [" +
                               range.from.to_string() + ", " + range.to.to_string() +
                               "] has no rows; skipped");
      continue;
    }
    const ForestModel m = fit_forest(slice, cfg, n_threads);
    study.reports.emplace_back(range.name, importance(m));
  }
  return study;
}

}  // namespace oilrf
