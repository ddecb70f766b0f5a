#include "oilrf/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "oilrf/errors.hpp"
#include "oilrf/text.hpp"

namespace oilrf {

RawSeries load_series(const std::filesystem::path& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open series file: " + path.string());

  RawSeries out;
  out.name = name;
  std::vector<double> values;

  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    chomp(line);
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != "date,value") {
        throw DataError(path.string() + ":" + std::to_string(lineno) +
                        ": expected header 'date,value', got '" + line + "'");
      }
      saw_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    double v = 0.0;
    if (fields.size() != 2 || !parse_double(fields[1], v)) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed row '" +
                      line + "'");
    }
    if (!std::isfinite(v)) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": non-finite value");
    }
    Date d;
    try {
      d = Date::parse(fields[0]);
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!out.dates.empty()) {
      if (d == out.dates.back()) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": duplicate date " +
                        d.to_string());
      }
      if (d < out.dates.back()) {
        throw DataError(path.string() + ":" + std::to_string(lineno) +
                        ": dates not increasing at " + d.to_string());
      }
    }
    out.dates.push_back(d);
    values.push_back(v);
  }
  if (out.dates.empty()) {
    throw DataError(path.string() + ": no observations");
  }
  out.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return out;
}

void write_series_csv(const std::filesystem::path& path, const RawSeries& series) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write series file: " + path.string());
  out << "date,value\n";
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    out << series.dates[static_cast<std::size_t>(i)].to_string() << ','
        << format_double(series.values[i]) << '\n';
  }
}

bool DailyPanel::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

const Eigen::VectorXd& DailyPanel::col(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DataError("panel has no column '" + name + "'");
  return columns[static_cast<std::size_t>(it - names.begin())];
}

namespace {

// A series is low frequency when its typical spacing is 6+ calendar days:
// business-day data has gaps of 1-4 (weekends, long weekends), weekly lands
// at 7 and monthly near 30. Low-frequency series are interpolated onto the
// calendar; daily ones are joined with a bounded forward fill.
bool is_low_frequency(const RawSeries& s) {
  if (s.dates.size() < 2) return true;
  std::vector<std::int32_t> gaps;
  gaps.reserve(s.dates.size() - 1);
  for (std::size_t i = 1; i < s.dates.size(); ++i) {
    gaps.push_back(s.dates[i] - s.dates[i - 1]);
  }
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  return gaps[gaps.size() / 2] >= 6;
}

Eigen::VectorXd join_daily(const RawSeries& s, const std::vector<Date>& calendar,
                           int max_gap_days) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(calendar.size()));
  std::size_t j = 0;  // first observation with date >= calendar[i]
  for (std::size_t i = 0; i < calendar.size(); ++i) {
    const Date day = calendar[i];
    while (j < s.dates.size() && s.dates[j] < day) ++j;
    if (j < s.dates.size() && s.dates[j] == day) {
      out[static_cast<Eigen::Index>(i)] = s.values[static_cast<Eigen::Index>(j)];
      continue;
    }
    if (j == 0) {
      throw DataError("series '" + s.name + "': no observation on or before " +
                      day.to_string());
    }
    const Date prev = s.dates[j - 1];
    if (day - prev > max_gap_days) {
      throw DataError("series '" + s.name + "': gap of " + std::to_string(day - prev) +
                      " days before " + day.to_string() + " (last observation " +
                      prev.to_string() + ") exceeds " + std::to_string(max_gap_days));
    }
    out[static_cast<Eigen::Index>(i)] = s.values[static_cast<Eigen::Index>(j - 1)];
  }
  return out;
}

Eigen::VectorXd interpolate_low_frequency(const RawSeries& s, const std::vector<Date>& calendar) {
  if (s.dates.back() < calendar.front() || s.dates.front() > calendar.back()) {
    throw DataError("series '" + s.name + "' does not overlap the calendar span");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(calendar.size()));
  std::size_t j = 0;  // knot with date >= calendar[i]
  for (std::size_t i = 0; i < calendar.size(); ++i) {
    const Date day = calendar[i];
    while (j < s.dates.size() && s.dates[j] < day) ++j;
    const Eigen::Index n = s.size();
    double v;
    if (j == 0) {
      v = s.values[0];  // flat before the first knot
    } else if (j == s.dates.size()) {
      v = s.values[n - 1];  // flat after the last knot
    } else if (s.dates[j] == day) {
      v = s.values[static_cast<Eigen::Index>(j)];  // exact at knots
    } else {
      const Date d0 = s.dates[j - 1];
      const Date d1 = s.dates[j];
      const double v0 = s.values[static_cast<Eigen::Index>(j - 1)];
      const double v1 = s.values[static_cast<Eigen::Index>(j)];
      const double t = static_cast<double>(day - d0) / static_cast<double>(d1 - d0);
      v = v0 + t * (v1 - v0);
    }
    out[static_cast<Eigen::Index>(i)] = v;
  }
  return out;
}

}  // namespace

DailyPanel align_and_interpolate(const std::vector<RawSeries>& series,
                                 const std::string& calendar_source, int max_gap_days) {
  const RawSeries* cal = nullptr;
  for (const auto& s : series) {
    if (s.name == calendar_source) cal = &s;
  }
  if (cal == nullptr) {
    throw ConfigError("calendar source '" + calendar_source + "' is not among the inputs");
  }

  DailyPanel panel;
  panel.calendar = cal->dates;
  for (const auto& s : series) {
    if (s.dates.back() < panel.calendar.front() || s.dates.front() > panel.calendar.back()) {
      throw DataError("series '" + s.name + "' does not overlap the calendar span");
    }
    panel.names.push_back(s.name);
    if (is_low_frequency(s)) {
      panel.columns.push_back(interpolate_low_frequency(s, panel.calendar));
    } else {
      panel.columns.push_back(join_daily(s, panel.calendar, max_gap_days));
    }
  }
  return panel;
}

Eigen::VectorXd zero_safe_covid_transform(const Eigen::VectorXd& deaths) {
  const Eigen::Index n = deaths.size();
  Eigen::VectorXd out(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    if (deaths[t] < 0.0) {
      throw DataError("covid casualty count is negative at index " + std::to_string(t));
    }
    // Direct 7-term sum so an all-zero window maps to exactly zero.
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - 6);
    double sum = 0.0;
    for (Eigen::Index s = lo; s <= t; ++s) sum += deaths[s];
    out[t] = std::log1p(sum / static_cast<double>(t - lo + 1));
  }
  return out;
}

}  // namespace oilrf
