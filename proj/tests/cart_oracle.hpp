#pragma once

// Brute-force regression-tree reference, coded independently of the library
// engine: plain recursion, full candidate enumeration, no incremental SSE
// bookkeeping. Both implementations target the same canonical definition --
// midpoint thresholds, two-pass row-order SSE, ties to the lowest feature
// index then lowest threshold -- so their trees must agree node for node.

#include <Eigen/Core>
#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace cart_oracle {

struct Node {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  double value = 0.0;
  int count = 0;
};

// Nodes in preorder, <= branch first; structure is implied by the sequence.
struct Tree {
  std::vector<Node> nodes;
};

inline double mean_of(const Eigen::VectorXd& y, const std::vector<int>& rows) {
  double sum = 0.0;
  for (const int r : rows) sum += y[r];
  return sum / static_cast<double>(rows.size());
}

inline double sse_of(const Eigen::VectorXd& y, const std::vector<int>& rows) {
  const double m = mean_of(y, rows);
  double sse = 0.0;
  for (const int r : rows) {
    const double e = y[r] - m;
    sse += e * e;
  }
  return sse;
}

namespace detail {

struct Best {
  int feature = -1;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();
};

inline void grow(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<int>& rows,
                 int min_split_size, Tree& tree) {
  Node node;
  node.count = static_cast<int>(rows.size());
  node.value = mean_of(y, rows);
  const double node_sse = sse_of(y, rows);

  Best best;
  if (node.count >= min_split_size && node.count >= 2 && node_sse > 0.0) {
    for (int f = 0; f < X.cols(); ++f) {
      std::vector<double> values;
      values.reserve(rows.size());
      for (const int r : rows) values.push_back(X(r, f));
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double a = values[i];
        const double b = values[i + 1];
        const double threshold = 0.5 * (a + b);
        if (!(a < threshold && threshold < b)) continue;  // adjacent doubles
        std::vector<int> left, right;
        for (const int r : rows) (X(r, f) <= threshold ? left : right).push_back(r);
        const double score = sse_of(y, left) + sse_of(y, right);
        if (score < best.score) best = {f, threshold, score};
      }
    }
  }

  if (best.feature < 0 || !(best.score < node_sse)) {
    tree.nodes.push_back(node);  // leaf: nothing improves strictly
    return;
  }

  node.feature = best.feature;
  node.threshold = best.threshold;
  tree.nodes.push_back(node);
  std::vector<int> left, right;
  for (const int r : rows) {
    (X(r, best.feature) <= best.threshold ? left : right).push_back(r);
  }
  grow(X, y, left, min_split_size, tree);
  grow(X, y, right, min_split_size, tree);
}

}  // namespace detail

inline Tree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int min_split_size) {
  std::vector<int> rows(static_cast<std::size_t>(X.rows()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  Tree tree;
  detail::grow(X, y, rows, min_split_size, tree);
  return tree;
}

inline double predict(const Tree& tree, Eigen::Ref<const Eigen::VectorXd> x) {
  // Preorder walk: after an internal node, the left subtree starts at the
  // next index; taking the right branch skips the whole left subtree.
  std::size_t i = 0;
  while (tree.nodes[i].feature >= 0) {
    const Node& n = tree.nodes[i];
    if (x[n.feature] <= n.threshold) {
      ++i;
    } else {
      std::size_t skip = i + 1;  // root of the left subtree
      int open = 1;
      while (open > 0) {
        open += tree.nodes[skip].feature >= 0 ? 1 : -1;
        ++skip;
      }
      i = skip;
    }
  }
  return tree.nodes[i].value;
}

}  // namespace cart_oracle
