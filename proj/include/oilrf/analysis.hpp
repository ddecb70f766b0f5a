#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oilrf/dataset.hpp"
#include "oilrf/forest.hpp"
#include "oilrf/linear.hpp"

namespace oilrf {

// Split-based predictor importance: per feature, the summed SSE reduction
// achieved by every split on that feature across the whole forest.
struct ImportanceReport {
  std::vector<std::string> features;  // model feature order
  Eigen::VectorXd raw;
  Eigen::VectorXd normalized;  // raw / sum(raw); all zero when degenerate
  bool degenerate = false;     // no split anywhere, normalization undefined
};

ImportanceReport importance(const ForestModel& m);

// CSV rows `feature,raw,normalized`, sorted descending by normalized score.
void write_importance_csv(const std::filesystem::path& path, const ImportanceReport& report);

// Model response along one or two feature grids, every other feature held at
// its full-sample mean.
struct PartialEffectGrid {
  std::vector<std::string> features;  // one or two names
  Eigen::VectorXd grid1;
  Eigen::VectorXd grid2;    // empty for 1D
  Eigen::MatrixXd effects;  // 1D: grid1.size() x 1; 2D: grid1.size() x grid2.size()
  Eigen::VectorXd baseline;  // per-feature sample means, model feature order

  Eigen::VectorXd effect_1d() const { return effects.col(0); }
};

// Equally spaced grid over the feature's observed range, extended by 10% of
// the range on each side. A constant column gets a small symmetric span so
// the grid stays strictly increasing.
Eigen::VectorXd make_grid(const Dataset& d, const std::string& feature, int n_points = 41);

// Grids must stay within the observed range extended by 10% (the make_grid
// span); points outside raise ConfigError, unknown features invalid_argument.
PartialEffectGrid partial_effect_1d(const ForestModel& m, const Dataset& d,
                                    const std::string& feature,
                                    const Eigen::VectorXd& grid);
PartialEffectGrid partial_effect_2d(const ForestModel& m, const Dataset& d,
                                    const std::string& f1, const std::string& f2,
                                    const Eigen::VectorXd& grid1,
                                    const Eigen::VectorXd& grid2);

// 1D: `grid,effect` rows; 2D: long form `g1,g2,effect`, grid1-major.
void write_partial_effect_csv(const std::filesystem::path& path, const PartialEffectGrid& g);

struct ForecastSpec {
  int horizon = 22;  // rows ahead

  void validate() const;
};

// Local-projection style forecasting dataset: features at row t are kept as
// they are, the target becomes ln P(t+h) - ln P(t) where P is the raw price
// column on the panel and h counts panel rows. Rows whose horizon end leaves
// the panel are dropped from the back.
Dataset make_forecast_dataset(const Dataset& d, const ForecastSpec& spec,
                              const DailyPanel& panel, const std::string& price_column);

// Which RMSE of the candidate model enters the ratio columns; baselines are
// always represented by their in-sample RMSE.
enum class RatioBasis { kInSample, kOutOfSample };

struct EvalRow {
  std::string model;
  std::string config;  // short text like "p=10 N=1000"
  double rmse_in_sample = 0.0;
  std::optional<double> rmse_out;   // OOB / out-of-sample, absent for baselines
  std::optional<double> ratio_ols;  // absent when flagged (zero denominator
  std::optional<double> ratio_ar1;  //   or missing numerator)
};

struct EvalTable {
  std::vector<EvalRow> rows;
  RatioBasis basis = RatioBasis::kInSample;
};

// Ratio columns recomputed from the stored RMSEs: each row's basis RMSE over
// the named baseline's in-sample RMSE. Zero denominators leave the ratio
// flagged absent rather than divided.
EvalTable compare(std::vector<EvalRow> stored, RatioBasis basis,
                  const std::string& ols_name = "ols", const std::string& ar1_name = "ar1");

// Fits nothing: evaluates the already-fitted models on d and tabulates them.
EvalTable compare(const ForestModel& forest, const LinearModel& ols, const LinearModel& ar1,
                  const Dataset& d, RatioBasis basis = RatioBasis::kInSample);

// Aligned-text rendering with one row per model.
std::string render_eval_text(const EvalTable& table);

// One row per horizon: `horizon | in sample | out of sample | AR(1) | OLS`,
// where the last two columns are the forest's ratio to each baseline.
std::string render_forecast_text(const std::vector<std::pair<int, EvalTable>>& by_horizon);

struct DateRange {
  std::string name;
  Date from;
  Date to;
};

struct SubsampleStudy {
  std::vector<std::pair<std::string, ImportanceReport>> reports;  // range order kept
  std::vector<std::string> warnings;  // one per skipped empty range
};

// Refit + importance per named date range; empty ranges are skipped with a
// warning instead of failing the study.
SubsampleStudy subsample_study(const Dataset& d, const std::vector<DateRange>& ranges,
                               const ForestConfig& cfg, int n_threads = 1);

}  // namespace oilrf
