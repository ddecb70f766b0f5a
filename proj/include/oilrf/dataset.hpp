#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "oilrf/date.hpp"
#include "oilrf/series.hpp"

namespace oilrf {

// Name every lagged-target feature carries, and that the AR(1) baseline needs.
inline constexpr const char* kMomentumFeature = "momentum";

enum class Transform {
  kLogChange,       // ln v_t - ln v_{t-w}
  kLevelChange,     // v_t - v_{t-w}
  kZeroSafeLog,     // ln(1+v_t) - ln(1+v_{t-w})
};

enum class Role { kFeature, kTarget };

struct VariableSpec {
  std::string name;
  Transform transform = Transform::kLogChange;
  Role role = Role::kFeature;
};

// Which variables enter the model and how their w-day changes are formed.
struct TransformSpec {
  std::vector<VariableSpec> variables;  // feature order = listing order
  int window = 22;
  bool momentum = true;

  const VariableSpec& target() const;
  void validate() const;
};

// Feature matrix plus target vector; the modeling unit everything downstream
// consumes. Rows are dated observations, columns are named features.
struct Dataset {
  std::vector<Date> dates;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd X;  // rows x features
  Eigen::VectorXd y;
  std::string target_name = "target";

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
  Eigen::Index feature_index(const std::string& name) const;  // -1 if absent
};

// Turns an aligned panel into w-day changes. Rows whose lags reach before the
// panel start are dropped from the front. With momentum on, the target's own
// change over [t-2w, t-w] is appended as the last feature.
Dataset build_features(const DailyPanel& panel, const TransformSpec& spec);

Dataset filter_dates(const Dataset& d, Date from, Date to);

struct SummaryStats {
  std::vector<std::string> names;  // features then target
  Eigen::VectorXd mean, stddev, min, max;
};

// Per-column mean, sample standard deviation (n-1), min, max.
SummaryStats summarize(const Dataset& d);

// Dataset CSV: `date,<feature_1>,...,<feature_k>,target`, rows in date order.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& d);
Dataset read_dataset_csv(const std::filesystem::path& path);

void write_summary_csv(const std::filesystem::path& path, const SummaryStats& stats);

}  // namespace oilrf
