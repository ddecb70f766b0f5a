#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oilrf/dataset.hpp"
#include "oilrf/tree.hpp"

namespace oilrf {

enum class OobMode {
  kPerTree,       // each tree scores the rows left out of its own subsample
  kFixedHoldout,  // one global holdout shared by every tree
};

struct ForestConfig {
  int n_trees = 1000;
  int min_split_size = 10;
  int mtry = 0;  // 0 resolves to ceil(n_features / 3)
  double subsample_fraction = 2.0 / 3.0;
  bool with_replacement = false;
  OobMode oob_mode = OobMode::kPerTree;
  std::uint64_t seed = 1;

  int resolved_mtry(Eigen::Index n_features) const;
  void validate(Eigen::Index n_rows, Eigen::Index n_features) const;
  std::string summary() const;  // short text like "p=10 N=1000" for tables
};

// Trained ensemble. Per-tree randomness is derived solely from (seed, tree
// index), so the model is identical at any thread count.
struct ForestModel {
  std::vector<RegressionTree> trees;
  std::vector<std::vector<std::int32_t>> inbag;  // sorted, distinct per tree
  ForestConfig config;
  std::vector<std::string> feature_names;
  Eigen::Index n_rows_trained = 0;
};

ForestModel fit_forest(const Dataset& d, const ForestConfig& cfg, int n_threads = 1);

// Ensemble mean prediction for each row of the matrix.
Eigen::VectorXd predict(const ForestModel& m, const Eigen::MatrixXd& rows);
double predict_row(const ForestModel& m, Eigen::Ref<const Eigen::VectorXd> x);

struct OobPrediction {
  Eigen::VectorXd values;               // NaN where no tree left the row out
  std::vector<std::int32_t> n_trees;    // out-of-bag trees per row
  double coverage = 0.0;                // fraction of rows with >= 1 such tree
};

// Out-of-bag predictions on the training dataset: row t averages only trees
// whose subsample excluded t. The dataset must be the one used for training.
OobPrediction oob_predict(const ForestModel& m, const Dataset& d);

struct EvalMetrics {
  double rmse_in_sample = 0.0;
  std::optional<double> rmse_oob;  // absent when no row has OOB coverage
  double oob_coverage = 0.0;
};

EvalMetrics evaluate(const ForestModel& m, const Dataset& d);

// Out-of-bag MSE of the prefix ensemble at each checkpoint, growing the
// trees once and reusing them.
std::vector<std::pair<int, double>> mse_curve(const Dataset& d, const ForestConfig& cfg,
                                              const std::vector<int>& checkpoints,
                                              int n_threads = 1);
std::vector<std::pair<int, double>> mse_curve_from_model(const ForestModel& m, const Dataset& d,
                                                         const std::vector<int>& checkpoints);

}  // namespace oilrf
