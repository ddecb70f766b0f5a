#include "oilrf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "oilrf/errors.hpp"
#include "oilrf/text.hpp"

namespace oilrf {

const VariableSpec& TransformSpec::target() const {
  for (const auto& v : variables) {
    if (v.role == Role::kTarget) return v;
  }
  throw ConfigError("transform spec names no target variable");
}

void TransformSpec::validate() const {
  if (window < 1) throw ConfigError("window must be >= 1");
  int targets = 0;
  for (std::size_t i = 0; i < variables.size(); ++i) {
    for (std::size_t j = i + 1; j < variables.size(); ++j) {
      if (variables[i].name == variables[j].name) {
        throw ConfigError("variable '" + variables[i].name + "' listed twice");
      }
    }
    if (variables[i].role == Role::kTarget) ++targets;
    if (variables[i].name == kMomentumFeature) {
      throw ConfigError("'momentum' is reserved for the lagged target feature");
    }
  }
  if (targets != 1) {
    throw ConfigError("transform spec must name exactly one target, got " +
                      std::to_string(targets));
  }
}

Eigen::Index Dataset::feature_index(const std::string& name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) return -1;
  return static_cast<Eigen::Index>(it - feature_names.begin());
}

namespace {

// Change of one variable over [t-w, t] under its transform.
double change_at(const Eigen::VectorXd& v, Eigen::Index t, int w, Transform tr,
                 const std::string& name, const std::vector<Date>& calendar) {
  const double now = v[t];
  const double then = v[t - w];
  switch (tr) {
    case Transform::kLevelChange:
      return now - then;
    case Transform::kLogChange:
      if (now <= 0.0 || then <= 0.0) {
        const Eigen::Index bad = now <= 0.0 ? t : t - w;
        throw DataError("log transform of non-positive value in '" + name + "' at " +
                        calendar[static_cast<std::size_t>(bad)].to_string());
      }
      return std::log(now) - std::log(then);
    case Transform::kZeroSafeLog:
      if (now <= -1.0 || then <= -1.0) {
        const Eigen::Index bad = now <= -1.0 ? t : t - w;
        throw DataError("zero-safe log transform of value <= -1 in '" + name + "' at " +
                        calendar[static_cast<std::size_t>(bad)].to_string());
      }
      return std::log1p(now) - std::log1p(then);
  }
  return 0.0;  // unreachable
}

}  // namespace

Dataset build_features(const DailyPanel& panel, const TransformSpec& spec) {
  spec.validate();
  for (const auto& v : spec.variables) {
    if (!panel.has(v.name)) {
      throw ConfigError("transform spec variable '" + v.name + "' is not in the panel");
    }
  }
  const auto& tgt = spec.target();
  const int w = spec.window;
  const Eigen::Index n_panel = static_cast<Eigen::Index>(panel.calendar.size());
  const Eigen::Index first = spec.momentum ? 2 * w : w;
  if (n_panel <= first) {
    throw DataError("panel too short: " + std::to_string(n_panel) + " rows, first usable row " +
                    std::to_string(first));
  }

  Dataset d;
  d.target_name = tgt.name;
  for (const auto& v : spec.variables) {
    if (v.role == Role::kFeature) d.feature_names.push_back(v.name);
  }
  if (spec.momentum) d.feature_names.push_back(kMomentumFeature);

  const Eigen::Index n = n_panel - first;
  d.X.resize(n, static_cast<Eigen::Index>(d.feature_names.size()));
  d.y.resize(n);
  d.dates.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index t = first; t < n_panel; ++t) {
    d.dates.push_back(panel.calendar[static_cast<std::size_t>(t)]);
  }

  const Eigen::VectorXd& target_col = panel.col(tgt.name);
  Eigen::Index j = 0;
  for (const auto& v : spec.variables) {
    if (v.role != Role::kFeature) continue;
    const Eigen::VectorXd& col = panel.col(v.name);
    for (Eigen::Index t = first; t < n_panel; ++t) {
      d.X(t - first, j) = change_at(col, t, w, v.transform, v.name, panel.calendar);
    }
    ++j;
  }
  if (spec.momentum) {
    for (Eigen::Index t = first; t < n_panel; ++t) {
      d.X(t - first, j) =
          change_at(target_col, t - w, w, tgt.transform, tgt.name, panel.calendar);
    }
  }
  for (Eigen::Index t = first; t < n_panel; ++t) {
    d.y[t - first] = change_at(target_col, t, w, tgt.transform, tgt.name, panel.calendar);
  }
  return d;
}

Dataset filter_dates(const Dataset& d, Date from, Date to) {
  if (from > to) throw ConfigError("date range is inverted: " + from.to_string() + " > " +
                                   to.to_string());
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < d.dates.size(); ++i) {
    if (d.dates[i] >= from && d.dates[i] <= to) keep.push_back(static_cast<Eigen::Index>(i));
  }
  if (keep.empty()) {
    throw DataError("empty date range: no rows in [" + from.to_string() + ", " +
                    to.to_string() + "]");
  }
  Dataset out;
  out.feature_names = d.feature_names;
  out.target_name = d.target_name;
  out.X.resize(static_cast<Eigen::Index>(keep.size()), d.cols());
  out.y.resize(static_cast<Eigen::Index>(keep.size()));
  out.dates.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = d.X.row(keep[i]);
    out.y[static_cast<Eigen::Index>(i)] = d.y[keep[i]];
    out.dates.push_back(d.dates[static_cast<std::size_t>(keep[i])]);
  }
  return out;
}

SummaryStats summarize(const Dataset& d) {
  if (d.rows() == 0) throw std::invalid_argument("summarize: empty dataset");
  const Eigen::Index n = d.rows();
  const Eigen::Index k = d.cols() + 1;
  SummaryStats s;
  s.names = d.feature_names;
  s.names.push_back(d.target_name);
  s.mean.resize(k);
  s.stddev.resize(k);
  s.min.resize(k);
  s.max.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::VectorXd col = j < d.cols() ? d.X.col(j) : d.y;
    const double mean = col.sum() / static_cast<double>(n);
    const double ss = (col.array() - mean).square().sum();
    s.mean[j] = mean;
    s.stddev[j] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    s.min[j] = col.minCoeff();
    s.max[j] = col.maxCoeff();
  }
  return s;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file: " + path.string());
  out << "date";
  for (const auto& name : d.feature_names) out << ',' << name;
  out << ",target\n";
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    out << d.dates[static_cast<std::size_t>(i)].to_string();
    for (Eigen::Index j = 0; j < d.cols(); ++j) out << ',' << format_double(d.X(i, j));
    out << ',' << format_double(d.y[i]) << '\n';
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path.string());
  std::string line;
  std::size_t lineno = 0;
  Dataset d;
  std::vector<double> xbuf, ybuf;
  while (std::getline(in, line)) {
    ++lineno;
    chomp(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (lineno == 1) {
      if (fields.size() < 3 || fields.front() != "date") {
        throw DataError(path.string() + ": expected header 'date,<features...>,target'");
      }
      d.feature_names.assign(fields.begin() + 1, fields.end() - 1);
      d.target_name = fields.back();
      continue;
    }
    if (fields.size() != d.feature_names.size() + 2) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    }
    Date date;
    try {
      date = Date::parse(fields[0]);
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!d.dates.empty() && date <= d.dates.back()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": dates not increasing");
    }
    d.dates.push_back(date);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      double v = 0.0;
      if (!parse_double(fields[j], v) || !std::isfinite(v)) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad value '" +
                        fields[j] + "'");
      }
      if (j + 1 < fields.size()) {
        xbuf.push_back(v);
      } else {
        ybuf.push_back(v);
      }
    }
  }
  if (d.dates.empty()) throw DataError(path.string() + ": no observations");
  const Eigen::Index n = static_cast<Eigen::Index>(ybuf.size());
  const Eigen::Index k = static_cast<Eigen::Index>(d.feature_names.size());
  d.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      xbuf.data(), n, k);
  d.y = Eigen::Map<const Eigen::VectorXd>(ybuf.data(), n);
  return d;
}

void write_summary_csv(const std::filesystem::path& path, const SummaryStats& stats) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write summary file: " + path.string());
  out << "column,mean,std,min,max\n";
  for (std::size_t i = 0; i < stats.names.size(); ++i) {
    const Eigen::Index j = static_cast<Eigen::Index>(i);
    out << stats.names[i] << ',' << format_double(stats.mean[j]) << ','
        << format_double(stats.stddev[j]) << ',' << format_double(stats.min[j]) << ','
        << format_double(stats.max[j]) << '\n';
  }
}

}  // namespace oilrf
