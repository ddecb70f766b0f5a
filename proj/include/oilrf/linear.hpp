#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "oilrf/dataset.hpp"

namespace oilrf {

// Least-squares fit of the target on an intercept plus the named features.
struct LinearModel {
  Eigen::VectorXd coefficients;  // aligned with feature_names
  double intercept = 0.0;
  std::vector<std::string> feature_names;
  double rmse_in_sample = 0.0;
};

// Full OLS on every feature column. Solved by column-pivoted QR; a rank
// deficiency raises NumericError naming the dependent columns.
LinearModel fit_ols(const Dataset& d);

// Autoregressive baseline: intercept plus the momentum feature only.
LinearModel fit_ar1(const Dataset& d);

// Predictions on a dataset whose columns are matched to the model by name,
// so a reordered dataset evaluates correctly.
Eigen::VectorXd predict(const LinearModel& m, const Dataset& d);

double rmse(const LinearModel& m, const Dataset& d);

}  // namespace oilrf
