#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include "cart_oracle.hpp"
#include "doctest.h"
#include "oilrf/errors.hpp"
#include "oilrf/rng.hpp"
#include "oilrf/tree.hpp"

using namespace oilrf;

namespace {

std::vector<std::int32_t> all_rows(Eigen::Index n) {
  std::vector<std::int32_t> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

RegressionTree grow(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int min_split_size) {
  TreeConfig cfg;
  cfg.min_split_size = min_split_size;
  const auto rows = all_rows(X.rows());
  return grow_tree(X, y, rows, cfg);
}

}  // namespace

TEST_CASE("step function splits at the midpoint") {
  Eigen::MatrixXd X(4, 1);
  X << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 0, 0, 10, 10;
  const RegressionTree t = grow(X, y, 2);

  REQUIRE(t.nodes.size() == 3);
  CHECK(t.nodes[0].feature == 0);
  CHECK(t.nodes[0].threshold == 2.5);
  CHECK(t.nodes[0].count == 4);
  CHECK(t.n_leaves() == 2);
  CHECK(predict_tree(t, Eigen::VectorXd::Constant(1, 0.0)) == 0.0);
  CHECK(predict_tree(t, Eigen::VectorXd::Constant(1, 9.0)) == 10.0);

  // The split removes all of the node's SSE, and only feature 0 gets credit.
  CHECK(t.feature_reduction[0] == t.nodes[0].sse);
  CHECK(t.nodes[0].sse == 100.0);
}

TEST_CASE("exact threshold routes left") {
  Eigen::MatrixXd X(2, 1);
  X << 0, 1;
  Eigen::VectorXd y(2);
  y << 0, 1;
  const RegressionTree t = grow(X, y, 2);
  REQUIRE(t.nodes[0].threshold == 0.5);
  CHECK(predict_tree(t, Eigen::VectorXd::Constant(1, 0.5)) == 0.0);
  CHECK(predict_tree(t, Eigen::VectorXd::Constant(1, 0.5000001)) == 1.0);
}

TEST_CASE("tied features break to the lowest index") {
  Eigen::MatrixXd X(4, 3);
  Eigen::VectorXd base(4);
  base << 1, 2, 3, 4;
  X.col(0) = base;
  X.col(1) = base;
  X.col(2) = base;
  Eigen::VectorXd y(4);
  y << 0, 0, 10, 10;
  const RegressionTree t = grow(X, y, 2);
  CHECK(t.nodes[0].feature == 0);
  CHECK(t.feature_reduction[1] == 0.0);
  CHECK(t.feature_reduction[2] == 0.0);
}

TEST_CASE("tied thresholds break to the lowest threshold") {
  Eigen::MatrixXd X(4, 1);
  X << 0, 1, 2, 3;
  Eigen::VectorXd y(4);
  y << 0, 1, 1, 0;  // splitting at 0.5 and at 2.5 leaves the same SSE
  const RegressionTree t = grow(X, y, 4);
  CHECK(t.nodes[0].feature == 0);
  CHECK(t.nodes[0].threshold == 0.5);
}

TEST_CASE("nodes below the size threshold become leaves") {
  Eigen::MatrixXd X(9, 1);
  Eigen::VectorXd y(9);
  for (int i = 0; i < 9; ++i) {
    X(i, 0) = i;
    y(i) = i * i;
  }
  const RegressionTree t = grow(X, y, 10);
  REQUIRE(t.nodes.size() == 1);
  CHECK(t.nodes[0].is_leaf());
  CHECK(t.nodes[0].value == doctest::Approx(y.mean()).epsilon(1e-15));
}

TEST_CASE("pure nodes become leaves regardless of size") {
  Eigen::MatrixXd X(20, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(20, 7.0);
  RngStream rng(9);
  for (int i = 0; i < 20; ++i) {
    X(i, 0) = rng.normal();
    X(i, 1) = rng.normal();
  }
  const RegressionTree t = grow(X, y, 2);
  REQUIRE(t.nodes.size() == 1);
  CHECK(t.nodes[0].value == 7.0);
}

TEST_CASE("best_split declines pure and unsplittable nodes") {
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  Eigen::VectorXd y = Eigen::VectorXd::Constant(3, 1.0);
  const auto rows = all_rows(3);
  const std::vector<std::int32_t> features{0};
  CHECK(!best_split(X, y, rows, features).has_value());

  // Constant feature: no threshold separates anything.
  Eigen::MatrixXd Xc = Eigen::MatrixXd::Zero(3, 1);
  Eigen::VectorXd yv(3);
  yv << 1, 2, 3;
  CHECK(!best_split(Xc, yv, rows, features).has_value());
}

TEST_CASE("config validation") {
  TreeConfig cfg;
  cfg.min_split_size = 1;
  CHECK_THROWS_AS(cfg.validate(3), ConfigError);
  cfg.min_split_size = 2;
  cfg.mtry = 4;
  CHECK_THROWS_AS(cfg.validate(3), ConfigError);
  cfg.mtry = 3;
  CHECK_NOTHROW(cfg.validate(3));
}

TEST_CASE("dump_tree is deterministic and names features") {
  Eigen::MatrixXd X(4, 1);
  X << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 0, 0, 10, 10;
  const RegressionTree t = grow(X, y, 2);
  const std::vector<std::string> names{"alpha"};
  const std::string text = dump_tree(t, names);
  CHECK(text.find("if alpha <= 2.5") != std::string::npos);
  CHECK(text.find("leaf value=0 ") != std::string::npos);
  CHECK(text.find("n=4") != std::string::npos);
  CHECK(text == dump_tree(t, names));
  // Without names, the feature index labels the rule.
  CHECK(dump_tree(t).find("if x0 <= 2.5") != std::string::npos);
}

TEST_CASE("mtry subsets draw without replacement and stay in range") {
  // With mtry = d the subset is the full feature set, so the tree must match
  // the deterministic all-features growth exactly.
  Eigen::MatrixXd X(30, 3);
  Eigen::VectorXd y(30);
  RngStream data_rng(11);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = data_rng.normal();
    y(i) = X(i, 0) - 2.0 * X(i, 2) + 0.1 * data_rng.normal();
  }
  TreeConfig cfg;
  cfg.min_split_size = 5;
  cfg.mtry = 3;
  RngStream rng = substream(42, 0);
  const auto rows = all_rows(30);
  const RegressionTree with_rng = grow_tree(X, y, rows, cfg, rng);
  const RegressionTree without = grow(X, y, 5);
  REQUIRE(with_rng.nodes.size() == without.nodes.size());
  for (std::size_t i = 0; i < with_rng.nodes.size(); ++i) {
    CHECK(with_rng.nodes[i].feature == without.nodes[i].feature);
    CHECK(with_rng.nodes[i].threshold == without.nodes[i].threshold);
    CHECK(with_rng.nodes[i].value == without.nodes[i].value);
  }
}

TEST_CASE("engine matches the brute-force reference on random instances") {
  RngStream rng(2024);
  int instances = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 5 + static_cast<int>(rng.uniform_below(36));
    const int d = 1 + static_cast<int>(rng.uniform_below(3));
    const int p = std::array<int, 3>{2, 5, 10}[rng.uniform_below(3)];

    // Coarse integer grids force plenty of exact ties in both X and y.
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X(i, j) = static_cast<double>(rng.uniform_below(5));
      y(i) = static_cast<double>(rng.uniform_below(4));
    }

    const RegressionTree engine = grow(X, y, p);
    const cart_oracle::Tree reference = cart_oracle::grow_tree(X, y, p);

    REQUIRE(engine.nodes.size() == reference.nodes.size());
    for (std::size_t k = 0; k < engine.nodes.size(); ++k) {
      CAPTURE(rep);
      CAPTURE(k);
      CHECK(engine.nodes[k].feature == reference.nodes[k].feature);
      CHECK(engine.nodes[k].threshold == reference.nodes[k].threshold);
      CHECK(engine.nodes[k].count == reference.nodes[k].count);
      if (engine.nodes[k].feature < 0) {
        CHECK(engine.nodes[k].value == reference.nodes[k].value);
      }
    }
    for (int i = 0; i < n; ++i) {
      CHECK(predict_tree_row(engine, X, i) == cart_oracle::predict(reference, X.row(i)));
    }
    ++instances;
  }
  CHECK(instances == 60);
}
