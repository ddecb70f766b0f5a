#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oilrf/rng.hpp"

namespace oilrf {

struct TreeConfig {
  int min_split_size = 10;  // a node needs at least this many rows to split
  int mtry = 0;             // features sampled per split; 0 means all
  std::uint64_t rng_seed = 0;

  void validate(Eigen::Index n_features) const;
};

struct SplitCandidate {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double sse_after = 0.0;      // left SSE + right SSE
  double sse_reduction = 0.0;  // parent SSE - sse_after, >= 0
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // internal nodes: x[feature] <= threshold goes left
  double value = 0.0;         // leaves: mean of the node's training targets
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t count = 0;
  double sse = 0.0;

  bool is_leaf() const { return feature < 0; }
};

// A grown CART regression tree. Nodes are stored in preorder with the root
// at index 0; the tree is immutable after growth.
struct RegressionTree {
  std::vector<TreeNode> nodes;
  Eigen::VectorXd feature_reduction;  // summed SSE reduction per feature
  Eigen::Index n_features = 0;

  std::int32_t n_leaves() const;
};

// Mean and two-pass SSE of the targets in `rows`, accumulated in row order.
// This is the canonical scoring used for split comparisons and predictions,
// so independently coded searches agree bitwise on ties.
void node_mean_sse(const Eigen::VectorXd& y, std::span<const std::int32_t> rows, double& mean,
                   double& sse);

// Exhaustive best split over the given features: thresholds at midpoints
// between consecutive distinct sorted values, minimizing left+right SSE.
// Returns nullopt when no feature has two distinct values or no split
// strictly reduces the SSE. Ties break to the lowest feature index, then
// the lowest threshold.
std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                         std::span<const std::int32_t> rows,
                                         std::span<const std::int32_t> features);

// Grows a tree on the given rows. Any node with at least cfg.min_split_size
// rows is split using the best candidate over an mtry-sized feature subset
// drawn without replacement from `rng`; nodes below the size threshold or
// without an improving split become leaves. Deterministic given (X, y, rows,
// cfg, rng state).
RegressionTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         std::span<const std::int32_t> rows, const TreeConfig& cfg,
                         RngStream& rng);
RegressionTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         std::span<const std::int32_t> rows, const TreeConfig& cfg);

double predict_tree(const RegressionTree& tree, Eigen::Ref<const Eigen::VectorXd> x);

// Routes one row of a matrix through the tree without copying it out.
double predict_tree_row(const RegressionTree& tree, const Eigen::MatrixXd& X, Eigen::Index row);

// Deterministic indented rendering: one line per node with its rule, count
// and SSE; leaves show the prediction. Children of a rule are listed with
// the <= branch first.
std::string dump_tree(const RegressionTree& tree, std::span<const std::string> feature_names = {});

}  // namespace oilrf
