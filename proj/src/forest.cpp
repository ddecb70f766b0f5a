#include "oilrf/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "oilrf/errors.hpp"

namespace oilrf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// floor(fraction * n) with a relative nudge so exact rationals like 2/3 of
// 3k rows do not fall one short of the intended integer.
std::int32_t subsample_count(double fraction, Eigen::Index n) {
  const double k = std::floor(fraction * static_cast<double>(n) * (1.0 + 1e-12));
  return static_cast<std::int32_t>(std::min<double>(k, static_cast<double>(n)));
}

std::vector<std::int32_t> sample_without_replacement(RngStream& rng, std::int32_t n,
                                                     std::int32_t k) {
  std::vector<std::int32_t> arr(static_cast<std::size_t>(n));
  std::iota(arr.begin(), arr.end(), 0);
  for (std::int32_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::int32_t>(
                           rng.uniform_below(static_cast<std::uint64_t>(n - i)));
    std::swap(arr[static_cast<std::size_t>(i)], arr[static_cast<std::size_t>(j)]);
  }
  arr.resize(static_cast<std::size_t>(k));
  std::sort(arr.begin(), arr.end());
  return arr;
}

std::vector<std::int32_t> sample_with_replacement(RngStream& rng, std::int32_t n,
                                                  std::int32_t k) {
  std::vector<std::int32_t> arr(static_cast<std::size_t>(k));
  for (std::int32_t i = 0; i < k; ++i) {
    arr[static_cast<std::size_t>(i)] =
        static_cast<std::int32_t>(rng.uniform_below(static_cast<std::uint64_t>(n)));
  }
  std::sort(arr.begin(), arr.end());
  return arr;
}

// Stream index reserved for the fixed-holdout draw; tree streams use their
// own tree index, so this cannot collide for any practical ensemble size.
constexpr std::uint64_t kHoldoutStream = 0x8000000000000000ull;

void check_fingerprint(const ForestModel& m, const Dataset& d, const char* op) {
  if (d.rows() != m.n_rows_trained || d.feature_names != m.feature_names) {
    throw std::invalid_argument(std::string(op) +
                                ": dataset does not match the training fingerprint");
  }
}

}  // namespace

int ForestConfig::resolved_mtry(Eigen::Index n_features) const {
  if (mtry > 0) return mtry;
  return static_cast<int>((n_features + 2) / 3);
}

void ForestConfig::validate(Eigen::Index n_rows, Eigen::Index n_features) const {
  if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (min_split_size < 2) throw ConfigError("min_split_size must be >= 2");
  if (!(subsample_fraction > 0.0) || subsample_fraction > 1.0) {
    throw ConfigError("subsample_fraction must be in (0, 1]");
  }
  if (n_rows < min_split_size) {
    throw ConfigError("dataset has " + std::to_string(n_rows) +
                      " rows, fewer than min_split_size " + std::to_string(min_split_size));
  }
  const int m = resolved_mtry(n_features);
  if (m < 1 || m > n_features) {
    throw ConfigError("mtry must be in [1, " + std::to_string(n_features) + "], got " +
                      std::to_string(m));
  }
  if (subsample_count(subsample_fraction, n_rows) < 1) {
    throw ConfigError("subsample_fraction leaves an empty training subsample");
  }
}

std::string ForestConfig::summary() const {
  return "p=" + std::to_string(min_split_size) + " N=" + std::to_string(n_trees);
}

ForestModel fit_forest(const Dataset& d, const ForestConfig& cfg, int n_threads) {
  cfg.validate(d.rows(), d.cols());
  if (n_threads < 1) throw ConfigError("n_threads must be >= 1");

  const auto n = static_cast<std::int32_t>(d.rows());
  const std::int32_t k = subsample_count(cfg.subsample_fraction, d.rows());

  ForestModel model;
  model.config = cfg;
  model.config.mtry = cfg.resolved_mtry(d.cols());
  model.feature_names = d.feature_names;
  model.n_rows_trained = d.rows();
  model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
  model.inbag.resize(static_cast<std::size_t>(cfg.n_trees));

  std::vector<std::int32_t> shared_inbag;
  if (cfg.oob_mode == OobMode::kFixedHoldout) {
    RngStream rng = substream(cfg.seed, kHoldoutStream);
    shared_inbag = sample_without_replacement(rng, n, k);
  }

  TreeConfig tree_cfg;
  tree_cfg.min_split_size = cfg.min_split_size;
  tree_cfg.mtry = model.config.mtry;

  const auto train_one = [&](std::size_t i) {
    RngStream rng = substream(cfg.seed, static_cast<std::uint64_t>(i));
    if (cfg.oob_mode == OobMode::kFixedHoldout) {
      model.inbag[i] = shared_inbag;
    } else if (cfg.with_replacement) {
      model.inbag[i] = sample_with_replacement(rng, n, k);
    } else {
      model.inbag[i] = sample_without_replacement(rng, n, k);
    }
    model.trees[i] = grow_tree(d.X, d.y, model.inbag[i], tree_cfg, rng);
  };

  const int workers = std::min<int>(n_threads, cfg.n_trees);
  if (workers <= 1) {
    for (std::size_t i = 0; i < model.trees.size(); ++i) train_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= model.trees.size()) return;
          try {
            train_one(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!error) error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  return model;
}

Eigen::VectorXd predict(const ForestModel& m, const Eigen::MatrixXd& rows) {
  if (rows.cols() != static_cast<Eigen::Index>(m.feature_names.size())) {
    throw std::invalid_argument("predict: expected " + std::to_string(m.feature_names.size()) +
                                " columns, got " + std::to_string(rows.cols()));
  }
  const double n_trees = static_cast<double>(m.trees.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(rows.rows());
  for (const auto& tree : m.trees) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      out[i] += predict_tree_row(tree, rows, i);
    }
  }
  return out / n_trees;
}

double predict_row(const ForestModel& m, Eigen::Ref<const Eigen::VectorXd> x) {
  double sum = 0.0;
  for (const auto& tree : m.trees) sum += predict_tree(tree, x);
  return sum / static_cast<double>(m.trees.size());
}

OobPrediction oob_predict(const ForestModel& m, const Dataset& d) {
  check_fingerprint(m, d, "oob_predict");
  const Eigen::Index n = d.rows();
  OobPrediction out;
  out.values = Eigen::VectorXd::Zero(n);
  out.n_trees.assign(static_cast<std::size_t>(n), 0);

  std::vector<char> in_bag(static_cast<std::size_t>(n));
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (const std::int32_t r : m.inbag[t]) in_bag[static_cast<std::size_t>(r)] = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_bag[static_cast<std::size_t>(i)]) continue;
      out.values[i] += predict_tree_row(m.trees[t], d.X, i);
      ++out.n_trees[static_cast<std::size_t>(i)];
    }
  }

  Eigen::Index covered = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int32_t c = out.n_trees[static_cast<std::size_t>(i)];
    if (c > 0) {
      out.values[i] /= static_cast<double>(c);
      ++covered;
    } else {
      out.values[i] = kNaN;
    }
  }
  out.coverage = static_cast<double>(covered) / static_cast<double>(n);
  return out;
}

EvalMetrics evaluate(const ForestModel& m, const Dataset& d) {
  check_fingerprint(m, d, "evaluate");
  EvalMetrics metrics;
  const Eigen::VectorXd fitted = predict(m, d.X);
  metrics.rmse_in_sample =
      std::sqrt((fitted - d.y).squaredNorm() / static_cast<double>(d.rows()));

  const OobPrediction oob = oob_predict(m, d);
  metrics.oob_coverage = oob.coverage;
  double sse = 0.0;
  Eigen::Index covered = 0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (oob.n_trees[static_cast<std::size_t>(i)] == 0) continue;
    const double e = oob.values[i] - d.y[i];
    sse += e * e;
    ++covered;
  }
  if (covered > 0) metrics.rmse_oob = std::sqrt(sse / static_cast<double>(covered));
  return metrics;
}

std::vector<std::pair<int, double>> mse_curve_from_model(const ForestModel& m, const Dataset& d,
                                                         const std::vector<int>& checkpoints) {
  check_fingerprint(m, d, "mse_curve");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > static_cast<int>(m.trees.size()) ||
        (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
      throw ConfigError("mse_curve checkpoints must be increasing and within [1, n_trees]");
    }
  }
  const Eigen::Index n = d.rows();
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(n);
  std::vector<std::int32_t> counts(static_cast<std::size_t>(n), 0);
  std::vector<char> in_bag(static_cast<std::size_t>(n));
  std::vector<std::pair<int, double>> curve;
  std::size_t next_cp = 0;

  for (std::size_t t = 0; t < m.trees.size() && next_cp < checkpoints.size(); ++t) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (const std::int32_t r : m.inbag[t]) in_bag[static_cast<std::size_t>(r)] = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_bag[static_cast<std::size_t>(i)]) continue;
      sums[i] += predict_tree_row(m.trees[t], d.X, i);
      ++counts[static_cast<std::size_t>(i)];
    }
    if (static_cast<int>(t + 1) == checkpoints[next_cp]) {
      double sse = 0.0;
      Eigen::Index covered = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::int32_t c = counts[static_cast<std::size_t>(i)];
        if (c == 0) continue;
        const double e = sums[i] / static_cast<double>(c) - d.y[i];
        sse += e * e;
        ++covered;
      }
      curve.emplace_back(checkpoints[next_cp],
                         covered > 0 ? sse / static_cast<double>(covered) : kNaN);
      ++next_cp;
    }
  }
  return curve;
}

std::vector<std::pair<int, double>> mse_curve(const Dataset& d, const ForestConfig& cfg,
                                              const std::vector<int>& checkpoints,
                                              int n_threads) {
  const ForestModel m = fit_forest(d, cfg, n_threads);
  return mse_curve_from_model(m, d, checkpoints);
}

}  // namespace oilrf
