#include "oilrf/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oilrf/errors.hpp"
#include "oilrf/text.hpp"

namespace oilrf {

void TreeConfig::validate(Eigen::Index n_features) const {
  if (min_split_size < 2) {
    throw ConfigError("min_split_size must be >= 2, got " + std::to_string(min_split_size));
  }
  if (mtry < 0 || mtry > n_features) {
    throw ConfigError("mtry must be in [0, " + std::to_string(n_features) + "], got " +
                      std::to_string(mtry));
  }
}

std::int32_t RegressionTree::n_leaves() const {
  std::int32_t k = 0;
  for (const auto& n : nodes) k += n.is_leaf() ? 1 : 0;
  return k;
}

void node_mean_sse(const Eigen::VectorXd& y, std::span<const std::int32_t> rows, double& mean,
                   double& sse) {
  double sum = 0.0;
  for (const std::int32_t r : rows) sum += y[r];
  mean = sum / static_cast<double>(rows.size());
  sse = 0.0;
  for (const std::int32_t r : rows) {
    const double e = y[r] - mean;
    sse += e * e;
  }
}

namespace {

struct SplitScratch {
  std::vector<std::pair<double, double>> pairs;  // (x, y centered at node mean)
  std::vector<SplitCandidate> near_best;
  std::vector<std::int32_t> side_buf;
  std::vector<std::int32_t> feat_buf;
};

// Canonical score of a candidate: partition the node rows by the threshold
// (keeping row order) and take the two-pass SSE of each side.
double canonical_sse_after(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           std::span<const std::int32_t> rows, std::int32_t feature,
                           double threshold, SplitScratch& sc) {
  auto& left = sc.side_buf;
  left.clear();
  double right_sum = 0.0;
  std::int32_t right_n = 0;
  for (const std::int32_t r : rows) {
    if (X(r, feature) <= threshold) {
      left.push_back(r);
    } else {
      right_sum += y[r];
      ++right_n;
    }
  }
  double lmean, lsse;
  node_mean_sse(y, left, lmean, lsse);
  const double rmean = right_sum / static_cast<double>(right_n);
  double rsse = 0.0;
  for (const std::int32_t r : rows) {
    if (X(r, feature) > threshold) {
      const double e = y[r] - rmean;
      rsse += e * e;
    }
  }
  return lsse + rsse;
}

// Sorted incremental scan over one feature. Appends every candidate whose
// approximate score is within `slack` of the best seen so far; the caller
// settles near-ties with the canonical score.
void scan_feature(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  std::span<const std::int32_t> rows, std::int32_t feature, double node_mean,
                  double slack, double& best_approx, SplitScratch& sc) {
  const std::size_t k = rows.size();
  auto& pairs = sc.pairs;
  pairs.clear();
  pairs.reserve(k);
  for (const std::int32_t r : rows) pairs.emplace_back(X(r, feature), y[r] - node_mean);
  std::sort(pairs.begin(), pairs.end());

  if (pairs.front().first == pairs.back().first) return;  // single distinct value

  double total_sum = 0.0, total_ssq = 0.0;
  for (const auto& [x, yc] : pairs) {
    total_sum += yc;
    total_ssq += yc * yc;
  }

  double left_sum = 0.0, left_ssq = 0.0;
  for (std::size_t j = 1; j < k; ++j) {
    const double yc = pairs[j - 1].second;
    left_sum += yc;
    left_ssq += yc * yc;
    const double a = pairs[j - 1].first;
    const double b = pairs[j].first;
    if (a == b) continue;
    const double threshold = 0.5 * (a + b);
    if (!(a < threshold && threshold < b)) continue;  // adjacent doubles
    const double nl = static_cast<double>(j);
    const double nr = static_cast<double>(k - j);
    const double right_sum = total_sum - left_sum;
    const double sse_l = std::max(0.0, left_ssq - left_sum * left_sum / nl);
    const double sse_r = std::max(0.0, (total_ssq - left_ssq) - right_sum * right_sum / nr);
    const double approx = sse_l + sse_r;
    if (approx <= best_approx + slack) {
      best_approx = std::min(best_approx, approx);
      sc.near_best.push_back({feature, threshold, approx, 0.0});
      if (sc.near_best.size() > 256) {
        std::erase_if(sc.near_best, [&](const SplitCandidate& c) {
          return c.sse_after > best_approx + slack;
        });
      }
    }
  }
}

std::optional<SplitCandidate> best_split_impl(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                              std::span<const std::int32_t> rows,
                                              std::span<const std::int32_t> features,
                                              double node_mean, double node_sse,
                                              SplitScratch& sc) {
  if (rows.size() < 2) throw std::invalid_argument("best_split: need at least 2 rows");
  if (!(node_sse > 0.0)) return std::nullopt;  // pure node, nothing to reduce

  const double slack = 1e-8 * node_sse;
  double best_approx = std::numeric_limits<double>::infinity();
  sc.near_best.clear();
  for (const std::int32_t f : features) {
    scan_feature(X, y, rows, f, node_mean, slack, best_approx, sc);
  }
  if (sc.near_best.empty()) return std::nullopt;

  // Settle near-ties with the canonical score; features were scanned in
  // ascending order and thresholds ascend within a feature, so the first
  // strict minimum realizes the (feature, threshold) tie-break.
  SplitCandidate best;
  double best_canonical = std::numeric_limits<double>::infinity();
  for (const auto& cand : sc.near_best) {
    if (cand.sse_after > best_approx + slack) continue;
    const double canonical =
        canonical_sse_after(X, y, rows, cand.feature, cand.threshold, sc);
    if (canonical < best_canonical) {
      best_canonical = canonical;
      best = cand;
      best.sse_after = canonical;
    }
  }
  if (!(best_canonical < node_sse)) return std::nullopt;  // no strict improvement
  best.sse_reduction = node_sse - best_canonical;
  return best;
}

}  // namespace

std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                         std::span<const std::int32_t> rows,
                                         std::span<const std::int32_t> features) {
  SplitScratch sc;
  double mean, sse;
  node_mean_sse(y, rows, mean, sse);
  std::vector<std::int32_t> sorted(features.begin(), features.end());
  std::sort(sorted.begin(), sorted.end());
  return best_split_impl(X, y, rows, sorted, mean, sse, sc);
}

namespace {

struct GrowTask {
  std::size_t lo, hi;        // segment of the row index array
  std::int32_t parent = -1;  // node to link into, -1 for the root
  bool is_left = false;
};

}  // namespace

RegressionTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         std::span<const std::int32_t> rows, const TreeConfig& cfg,
                         RngStream& rng) {
  cfg.validate(X.cols());
  if (rows.empty()) throw std::invalid_argument("grow_tree: empty row set");
  const Eigen::Index d = X.cols();
  const std::int32_t mtry = cfg.mtry == 0 ? static_cast<std::int32_t>(d)
                                          : static_cast<std::int32_t>(cfg.mtry);

  RegressionTree tree;
  tree.n_features = d;
  tree.feature_reduction = Eigen::VectorXd::Zero(d);

  std::vector<std::int32_t> order(rows.begin(), rows.end());
  std::vector<std::int32_t> left_buf, right_buf;
  std::vector<std::int32_t> all_features(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) all_features[static_cast<std::size_t>(j)] =
      static_cast<std::int32_t>(j);
  SplitScratch sc;

  // LIFO processing with the right task pushed first keeps preorder layout.
  std::vector<GrowTask> stack;
  stack.push_back({0, order.size(), -1, false});
  while (!stack.empty()) {
    const GrowTask task = stack.back();
    stack.pop_back();
    const std::span<const std::int32_t> node_rows(order.data() + task.lo, task.hi - task.lo);

    const std::int32_t index = static_cast<std::int32_t>(tree.nodes.size());
    if (task.parent >= 0) {
      (task.is_left ? tree.nodes[task.parent].left : tree.nodes[task.parent].right) = index;
    }
    TreeNode node;
    node.count = static_cast<std::int32_t>(node_rows.size());
    double mean;
    node_mean_sse(y, node_rows, mean, node.sse);
    node.value = mean;

    std::optional<SplitCandidate> split;
    if (node.count >= cfg.min_split_size && node.count >= 2) {
      std::span<const std::int32_t> candidates;
      if (mtry >= d) {
        candidates = all_features;
      } else {
        auto& chosen = sc.feat_buf;
        chosen = all_features;
        for (std::int32_t i = 0; i < mtry; ++i) {
          const auto j = i + static_cast<std::int32_t>(
                                 rng.uniform_below(static_cast<std::uint64_t>(d - i)));
          std::swap(chosen[static_cast<std::size_t>(i)], chosen[static_cast<std::size_t>(j)]);
        }
        chosen.resize(static_cast<std::size_t>(mtry));
        std::sort(chosen.begin(), chosen.end());
        candidates = chosen;
      }
      split = best_split_impl(X, y, node_rows, candidates, mean, node.sse, sc);
    }

    if (!split) {
      tree.nodes.push_back(node);
      continue;
    }

    node.feature = split->feature;
    node.threshold = split->threshold;
    tree.feature_reduction[split->feature] += split->sse_reduction;

    // Stable partition, so each child keeps ascending row order.
    left_buf.clear();
    right_buf.clear();
    for (const std::int32_t r : node_rows) {
      (X(r, split->feature) <= split->threshold ? left_buf : right_buf).push_back(r);
    }
    std::copy(left_buf.begin(), left_buf.end(), order.begin() + static_cast<std::ptrdiff_t>(task.lo));
    std::copy(right_buf.begin(), right_buf.end(),
              order.begin() + static_cast<std::ptrdiff_t>(task.lo + left_buf.size()));

    tree.nodes.push_back(node);
    const std::size_t mid = task.lo + left_buf.size();
    stack.push_back({mid, task.hi, index, false});  // right child, popped second
    stack.push_back({task.lo, mid, index, true});
  }
  return tree;
}

RegressionTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         std::span<const std::int32_t> rows, const TreeConfig& cfg) {
  RngStream rng(splitmix64(cfg.rng_seed));
  return grow_tree(X, y, rows, cfg, rng);
}

double predict_tree(const RegressionTree& tree, Eigen::Ref<const Eigen::VectorXd> x) {
  if (x.size() != tree.n_features) {
    throw std::invalid_argument("predict_tree: expected " + std::to_string(tree.n_features) +
                                " features, got " + std::to_string(x.size()));
  }
  std::int32_t i = 0;
  while (!tree.nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(i)];
    i = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return tree.nodes[static_cast<std::size_t>(i)].value;
}

double predict_tree_row(const RegressionTree& tree, const Eigen::MatrixXd& X, Eigen::Index row) {
  if (X.cols() != tree.n_features) {
    throw std::invalid_argument("predict_tree_row: feature count mismatch");
  }
  std::int32_t i = 0;
  while (!tree.nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(i)];
    i = X(row, n.feature) <= n.threshold ? n.left : n.right;
  }
  return tree.nodes[static_cast<std::size_t>(i)].value;
}

namespace {

void dump_node(const RegressionTree& tree, std::int32_t index, int depth,
               std::span<const std::string> names, std::string& out) {
  const TreeNode& n = tree.nodes[static_cast<std::size_t>(index)];
  out.append(static_cast<std::size_t>(2 * depth), ' ');
  if (n.is_leaf()) {
    out += "leaf value=" + format_double(n.value);
  } else {
    const std::string name = n.feature < static_cast<std::int32_t>(names.size())
                                 ? names[static_cast<std::size_t>(n.feature)]
                                 : "x" + std::to_string(n.feature);
    out += "if " + name + " <= " + format_double(n.threshold);
  }
  out += " n=" + std::to_string(n.count) + " sse=" + format_double(n.sse) + "\n";
  if (!n.is_leaf()) {
    dump_node(tree, n.left, depth + 1, names, out);
    dump_node(tree, n.right, depth + 1, names, out);
  }
}

}  // namespace

std::string dump_tree(const RegressionTree& tree, std::span<const std::string> feature_names) {
  std::string out;
  dump_node(tree, 0, 0, feature_names, out);
  return out;
}

}  // namespace oilrf
