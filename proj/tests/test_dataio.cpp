#include <Eigen/Core>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "doctest.h"
#include "oilrf/dataset.hpp"
#include "oilrf/date.hpp"
#include "oilrf/errors.hpp"
#include "oilrf/series.hpp"

using namespace oilrf;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    const fs::path p =
        fs::temp_directory_path() / ("oilrf_dataio_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = scratch_dir() / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

std::string message_of(const auto& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

// Consecutive synthetic calendar; alignment code only needs ordered dates.
std::vector<Date> days_from(Date start, int n) {
  std::vector<Date> out;
  for (int i = 0; i < n; ++i) out.push_back(start + i);
  return out;
}

}  // namespace

TEST_CASE("date parsing, arithmetic and rendering") {
  const Date d = Date::parse("2020-02-29");
  CHECK(d.to_string() == "2020-02-29");
  CHECK(Date::from_ymd(2020, 2, 29) == d);
  CHECK((d + 1).to_string() == "2020-03-01");
  CHECK((d + 1) - d == 1);
  CHECK(Date::parse("2020-03-01") > d);

  CHECK(Date::parse("2010-01-02").is_weekend());  // Saturday
  CHECK(Date::parse("2010-01-03").is_weekend());  // Sunday
  CHECK(!Date::parse("2010-01-04").is_weekend());  // Monday

  CHECK_THROWS_AS(Date::parse("2021-02-29"), DataError);
  CHECK_THROWS_AS(Date::parse("2020/01/01"), DataError);
  CHECK_THROWS_AS(Date::parse("garbage"), DataError);
}

TEST_CASE("series loading accepts headers, CRLF and blank tails") {
  const fs::path p = write_file("ok.csv", "date,value\r\n2020-01-01,1.5\r\n2020-01-02,2\n\n");
  const RawSeries s = load_series(p, "spot");
  CHECK(s.name == "spot");
  REQUIRE(s.size() == 2);
  CHECK(s.dates[0] == Date::parse("2020-01-01"));
  CHECK(s.values[1] == 2.0);
}

TEST_CASE("series loading reports the offending line") {
  const fs::path bad = write_file("bad.csv", "date,value\n2020-01-01,1\n2020-01-02\n");
  const std::string m1 = message_of([&] { load_series(bad, "s"); });
  CHECK(m1.find(":3:") != std::string::npos);
  CHECK(m1.find("malformed") != std::string::npos);

  const fs::path dup = write_file("dup.csv", "date,value\n2020-01-01,1\n2020-01-01,2\n");
  const std::string m2 = message_of([&] { load_series(dup, "s"); });
  CHECK(m2.find("duplicate date 2020-01-01") != std::string::npos);

  const fs::path ooo = write_file("ooo.csv", "date,value\n2020-01-02,1\n2020-01-01,2\n");
  CHECK_THROWS_AS(load_series(ooo, "s"), DataError);

  const fs::path nf = write_file("nf.csv", "date,value\n2020-01-01,nan\n");
  const std::string m3 = message_of([&] { load_series(nf, "s"); });
  CHECK(m3.find("non-finite") != std::string::npos);

  const fs::path empty = write_file("empty.csv", "date,value\n");
  const std::string m4 = message_of([&] { load_series(empty, "s"); });
  CHECK(m4.find("no observations") != std::string::npos);

  CHECK_THROWS_AS(load_series(scratch_dir() / "missing.csv", "s"), DataError);
}

TEST_CASE("series CSV round trip preserves every value") {
  RawSeries s;
  s.name = "rt";
  s.dates = days_from(Date::parse("2021-06-01"), 5);
  s.values.resize(5);
  s.values << 0.1, -2.5, 1e-17, 12345.678901234567, 3.0;
  const fs::path p = scratch_dir() / "rt.csv";
  write_series_csv(p, s);
  const RawSeries back = load_series(p, "rt");
  REQUIRE(back.size() == s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    CHECK(back.values[i] == s.values[i]);
    CHECK(back.dates[static_cast<std::size_t>(i)] == s.dates[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("daily series join by date with bounded carry-forward") {
  RawSeries cal;
  cal.name = "px";
  // Weekday-style calendar: 5 on, 2 off, 5 on.
  const Date monday = Date::parse("2021-03-01");
  for (int i = 0; i < 12; ++i) {
    const Date d = monday + (i < 5 ? i : i + 2);
    cal.dates.push_back(d);
  }
  cal.values = Eigen::VectorXd::LinSpaced(12, 1.0, 12.0);

  RawSeries other = cal;
  other.name = "flow";
  // Drop the second week's Monday: its value must carry from Friday (gap 3).
  other.dates.erase(other.dates.begin() + 5);
  Eigen::VectorXd v(11);
  v << cal.values.head(5), cal.values.tail(6);
  other.values = v;

  const DailyPanel panel = align_and_interpolate({cal, other}, "px");
  CHECK(panel.calendar == cal.dates);
  CHECK(panel.col("flow")[5] == panel.col("flow")[4]);  // carried across the gap
  CHECK(panel.col("flow")[6] == cal.values[6]);

  // A daily series (median gap 1) with one 6-day hole exceeds the 5-day cap.
  RawSeries sparse = cal;
  sparse.name = "thin";
  sparse.dates = {cal.dates[0], cal.dates[1], cal.dates[2], cal.dates[3], cal.dates[4],
                  cal.dates[11]};
  sparse.values.resize(6);
  sparse.values << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  const std::string m =
      message_of([&] { align_and_interpolate({cal, sparse}, "px"); });
  CHECK(m.find("thin") != std::string::npos);
  CHECK(m.find("gap of 6 days") != std::string::npos);
  CHECK(m.find("exceeds 5") != std::string::npos);
}

TEST_CASE("daily series must cover the calendar start") {
  RawSeries cal;
  cal.name = "px";
  cal.dates = days_from(Date::parse("2021-03-01"), 10);
  cal.values = Eigen::VectorXd::Ones(10);
  RawSeries late = cal;
  late.name = "late";
  late.dates.erase(late.dates.begin(), late.dates.begin() + 3);
  late.values = Eigen::VectorXd::Ones(7);
  const std::string m = message_of([&] { align_and_interpolate({cal, late}, "px"); });
  CHECK(m.find("no observation on or before 2021-03-01") != std::string::npos);

  RawSeries before = cal;
  before.name = "old";
  before.dates = days_from(Date::parse("2019-01-01"), 10);
  CHECK_THROWS_AS(align_and_interpolate({cal, before}, "px"), DataError);
  CHECK_THROWS_AS(align_and_interpolate({cal}, "nope"), ConfigError);
}

TEST_CASE("low-frequency series interpolate linearly between knots") {
  RawSeries cal;
  cal.name = "px";
  cal.dates = days_from(Date::parse("2022-01-01"), 40);
  cal.values = Eigen::VectorXd::Ones(40);

  RawSeries monthly;
  monthly.name = "stock";
  monthly.dates = {Date::parse("2022-01-05"), Date::parse("2022-02-04")};  // 30 days apart
  monthly.values.resize(2);
  monthly.values << 100.0, 130.0;

  const DailyPanel panel = align_and_interpolate({cal, monthly}, "px");
  const Eigen::VectorXd& col = panel.col("stock");
  CHECK(col[0] == 100.0);   // flat before the first knot
  CHECK(col[4] == 100.0);   // exact at the knot
  CHECK(col[14] == doctest::Approx(110.0).epsilon(1e-12));  // 10/30 of the way
  CHECK(col[34] == 130.0);  // exact at the second knot
  CHECK(col[39] == 130.0);  // flat after the last knot

  // Weekly spacing (median gap 7) already counts as low frequency, so weekly
  // sources interpolate instead of tripping the daily forward-fill cap.
  RawSeries weekly;
  weekly.name = "rigs";
  weekly.dates = {Date::parse("2022-01-03"), Date::parse("2022-01-10"),
                  Date::parse("2022-01-17")};
  weekly.values.resize(3);
  weekly.values << 10.0, 24.0, 10.0;
  const DailyPanel wp = align_and_interpolate({cal, weekly}, "px");
  CHECK(wp.col("rigs")[2] == 10.0);                                   // at the knot
  CHECK(wp.col("rigs")[5] == doctest::Approx(16.0).epsilon(1e-12));   // 3/7 of the way
  CHECK(wp.col("rigs")[9] == 24.0);
}

TEST_CASE("pandemic casualty transform") {
  Eigen::VectorXd zeros = Eigen::VectorXd::Zero(20);
  CHECK(zero_safe_covid_transform(zeros).isZero(0.0));

  // A single spike decays through the trailing window and leaves exactly.
  Eigen::VectorXd spike = Eigen::VectorXd::Zero(10);
  spike[0] = 7.0;
  const Eigen::VectorXd w = zero_safe_covid_transform(spike);
  CHECK(w[0] == std::log1p(7.0));
  CHECK(w[1] == std::log1p(3.5));
  CHECK(w[6] == std::log1p(1.0));
  CHECK(w[7] == 0.0);

  Eigen::VectorXd neg = Eigen::VectorXd::Zero(3);
  neg[2] = -1.0;
  CHECK_THROWS_AS(zero_safe_covid_transform(neg), DataError);
}

namespace {

DailyPanel toy_panel(int n) {
  DailyPanel panel;
  panel.calendar = days_from(Date::parse("2023-01-02"), n);
  panel.names = {"price", "flow"};
  Eigen::VectorXd price(n), flow(n);
  for (int t = 0; t < n; ++t) {
    price[t] = 100.0 * std::exp(0.01 * t + 0.002 * t * t / n);
    flow[t] = 5.0 + 0.5 * t;
  }
  panel.columns = {price, flow};
  return panel;
}

TransformSpec toy_spec(bool momentum) {
  TransformSpec spec;
  spec.variables = {{"price", Transform::kLogChange, Role::kTarget},
                    {"flow", Transform::kLevelChange, Role::kFeature}};
  spec.window = 2;
  spec.momentum = momentum;
  return spec;
}

}  // namespace

TEST_CASE("feature construction matches the hand-computed definition") {
  const DailyPanel panel = toy_panel(12);
  const Dataset d = build_features(panel, toy_spec(true));

  // First usable row needs the momentum lag: index 2w = 4.
  REQUIRE(d.rows() == 8);
  CHECK(d.dates.front() == panel.calendar[4]);
  CHECK(d.feature_names == std::vector<std::string>{"flow", "momentum"});
  CHECK(d.target_name == "price");

  const Eigen::VectorXd& price = panel.col("price");
  const Eigen::VectorXd& flow = panel.col("flow");
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    const Eigen::Index t = r + 4;
    CHECK(d.X(r, 0) == flow[t] - flow[t - 2]);
    CHECK(d.X(r, 1) == std::log(price[t - 2]) - std::log(price[t - 4]));
    CHECK(d.y[r] == std::log(price[t]) - std::log(price[t - 2]));
  }

  // Without momentum the first usable row only needs one window.
  const Dataset plain = build_features(panel, toy_spec(false));
  CHECK(plain.rows() == 10);
  CHECK(plain.feature_names == std::vector<std::string>{"flow"});
}

TEST_CASE("transform domain violations name the variable and date") {
  DailyPanel panel = toy_panel(12);
  panel.columns[0][6] = 0.0;  // price hits zero
  const std::string m = message_of([&] { build_features(panel, toy_spec(true)); });
  CHECK(m.find("'price'") != std::string::npos);
  CHECK(m.find(panel.calendar[6].to_string()) != std::string::npos);
}

TEST_CASE("transform spec validation") {
  TransformSpec spec = toy_spec(true);
  spec.variables[0].role = Role::kFeature;  // no target left
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  spec = toy_spec(true);
  spec.variables[1].role = Role::kTarget;  // two targets
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  spec = toy_spec(true);
  spec.variables.push_back({"flow", Transform::kLevelChange, Role::kFeature});
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  spec = toy_spec(true);
  spec.variables.push_back({"momentum", Transform::kLevelChange, Role::kFeature});
  CHECK_THROWS_AS(spec.validate(), ConfigError);  // reserved name

  spec = toy_spec(true);
  spec.window = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  // Spec names a variable the panel lacks.
  TransformSpec missing = toy_spec(true);
  missing.variables[1].name = "ghost";
  CHECK_THROWS_AS(build_features(toy_panel(12), missing), ConfigError);

  // Panel shorter than the first usable row.
  CHECK_THROWS_AS(build_features(toy_panel(4), toy_spec(true)), DataError);
}

TEST_CASE("date filtering is inclusive and validated") {
  const Dataset d = build_features(toy_panel(12), toy_spec(true));
  const Dataset mid = filter_dates(d, d.dates[2], d.dates[5]);
  REQUIRE(mid.rows() == 4);
  CHECK(mid.dates.front() == d.dates[2]);
  CHECK(mid.dates.back() == d.dates[5]);
  CHECK(mid.X(0, 0) == d.X(2, 0));
  CHECK(mid.y[3] == d.y[5]);

  CHECK_THROWS_AS(filter_dates(d, d.dates[5], d.dates[2]), ConfigError);
  CHECK_THROWS_AS(filter_dates(d, d.dates.back() + 10, d.dates.back() + 20), DataError);
}

TEST_CASE("summary statistics use the sample convention") {
  Dataset d;
  d.dates = days_from(Date::parse("2023-01-02"), 3);
  d.feature_names = {"a"};
  d.X.resize(3, 1);
  d.X << 1, 2, 6;
  d.y.resize(3);
  d.y << -1, 0, 1;

  const SummaryStats s = summarize(d);
  REQUIRE(s.names == std::vector<std::string>{"a", "target"});
  CHECK(s.mean[0] == doctest::Approx(3.0));
  CHECK(s.stddev[0] == doctest::Approx(std::sqrt(7.0)));  // ((4+1+9)/2)^0.5
  CHECK(s.min[0] == 1.0);
  CHECK(s.max[0] == 6.0);
  CHECK(s.mean[1] == doctest::Approx(0.0));
  CHECK(s.stddev[1] == doctest::Approx(1.0));
}

TEST_CASE("dataset CSV round trip is exact") {
  const Dataset d = build_features(toy_panel(12), toy_spec(true));
  const fs::path p = scratch_dir() / "dataset.csv";
  write_dataset_csv(p, d);

  // Header carries the column names with the target last.
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  CHECK(header == "date,flow,momentum,target");

  const Dataset back = read_dataset_csv(p);
  REQUIRE(back.rows() == d.rows());
  REQUIRE(back.feature_names == d.feature_names);
  CHECK(back.dates == d.dates);
  CHECK((back.X - d.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.y - d.y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dataset CSV rejects malformed input") {
  const fs::path bad_header = write_file("dh.csv", "time,a,target\n");
  CHECK_THROWS_AS(read_dataset_csv(bad_header), DataError);

  const fs::path short_row = write_file("dr.csv", "date,a,target\n2020-01-01,1\n");
  const std::string m1 = message_of([&] { read_dataset_csv(short_row); });
  CHECK(m1.find(":2:") != std::string::npos);

  const fs::path bad_value = write_file("dv.csv", "date,a,target\n2020-01-01,1,x\n");
  CHECK_THROWS_AS(read_dataset_csv(bad_value), DataError);

  const fs::path regress =
      write_file("dd.csv", "date,a,target\n2020-01-02,1,1\n2020-01-01,2,2\n");
  const std::string m2 = message_of([&] { read_dataset_csv(regress); });
  CHECK(m2.find("dates not increasing") != std::string::npos);
}

TEST_CASE("summary CSV layout") {
  const Dataset d = build_features(toy_panel(12), toy_spec(true));
  const fs::path p = scratch_dir() / "summary.csv";
  write_summary_csv(p, summarize(d));
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  CHECK(header == "column,mean,std,min,max");
  int rows = 0;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 3);  // flow, momentum, target
}
