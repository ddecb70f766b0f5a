#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "oilrf/date.hpp"

namespace oilrf {

// One raw input series: strictly increasing dates, finite values.
struct RawSeries {
  std::string name;
  std::vector<Date> dates;
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
};

// Reads a `date,value` CSV (ISO dates, LF or CRLF). Throws DataError with the
// offending line number on malformed rows, duplicate or out-of-order dates.
RawSeries load_series(const std::filesystem::path& path, const std::string& name);

void write_series_csv(const std::filesystem::path& path, const RawSeries& series);

// All raw variables joined onto one business-day calendar with no gaps left.
struct DailyPanel {
  std::vector<Date> calendar;
  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> columns;  // aligned with names; each length == calendar

  bool has(const std::string& name) const;
  const Eigen::VectorXd& col(const std::string& name) const;
};

// Joins every series onto the calendar of `calendar_source` (which must name
// one of the inputs). Daily series join by exact date, with last observation
// carried forward across gaps of at most `max_gap_days` calendar days; a
// longer gap is a coverage error listing the dates. Lower-frequency series
// (median spacing of 6+ days: weekly, monthly, ...) are linearly interpolated
// in value between their observation dates and held flat beyond the
// first/last observation.
DailyPanel align_and_interpolate(const std::vector<RawSeries>& series,
                                 const std::string& calendar_source,
                                 int max_gap_days = 5);

// w_t = ln(1 + MA7(deaths)_t), the zero-safe log level for casualty counts.
// The trailing 7-day mean uses an expanding head so the output has the same
// length as the input. Negative inputs are a domain error.
Eigen::VectorXd zero_safe_covid_transform(const Eigen::VectorXd& deaths);

}  // namespace oilrf
