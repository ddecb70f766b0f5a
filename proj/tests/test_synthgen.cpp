#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "oilrf/dataset.hpp"
#include "oilrf/errors.hpp"
#include "oilrf/linear.hpp"
#include "oilrf/synthgen.hpp"

using namespace oilrf;

TEST_CASE("generation is deterministic under the seed") {
  DgpConfig cfg = DgpConfig::benchmark();
  cfg.n_rows = 400;
  const SynthData a = generate(cfg);
  const SynthData b = generate(cfg);
  CHECK((a.data.X - b.data.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.data.y - b.data.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.panel.col(kSynthPriceColumn) - b.panel.col(kSynthPriceColumn))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  cfg.seed = 2;
  const SynthData c = generate(cfg);
  CHECK((a.data.X - c.data.X).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("realized noise reconciles the target with the true function") {
  DgpConfig cfg = DgpConfig::benchmark();
  cfg.n_rows = 300;
  const SynthData s = generate(cfg);
  REQUIRE(s.noise.size() == 300);
  for (Eigen::Index i = 0; i < 300; ++i) {
    const double truth = s.truth(s.data.X.row(i).transpose());
    CHECK(s.data.y[i] == truth + s.noise[i]);
  }
}

TEST_CASE("benchmark preset shape and naming") {
  const DgpConfig cfg = DgpConfig::benchmark();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.n_rows == 3144);
  CHECK(cfg.linear.size() == 11);
  CHECK(cfg.linear[0] == 0.0);  // one deliberately irrelevant feature

  const SynthData s = generate(cfg);
  REQUIRE(s.data.feature_names.size() == 11);
  CHECK(s.data.feature_names.front() == "x01");
  CHECK(s.data.feature_names.back() == kMomentumFeature);
  CHECK(s.data.rows() == 3144);
  CHECK(s.data.dates.front() == Date::parse("2010-01-04"));
  for (const Date d : s.data.dates) CHECK(!d.is_weekend());

  // Price panel shares the calendar and stays positive.
  CHECK(s.panel.calendar == s.data.dates);
  CHECK(s.panel.col(kSynthPriceColumn).minCoeff() > 0.0);
  CHECK(s.panel.col(kSynthPriceColumn)[0] == doctest::Approx(cfg.price_start).epsilon(1e-12));
}

TEST_CASE("features are standardized AR(1) draws") {
  DgpConfig cfg = DgpConfig::benchmark();
  cfg.n_rows = 3144;
  const SynthData s = generate(cfg);
  const Eigen::Index n = s.data.rows();

  for (Eigen::Index j = 0; j < s.data.cols(); ++j) {
    const Eigen::VectorXd col = s.data.X.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / (n - 1));
    // Stationary scale is one; autocorrelation shrinks the effective sample,
    // so the band is wide but still catches wrong variance normalization.
    CHECK(std::abs(mean) < 0.4);
    CHECK(sd > 0.6);
    CHECK(sd < 1.4);

    double num = 0.0, den = 0.0;
    for (Eigen::Index t = 1; t < n; ++t) {
      num += (col[t] - mean) * (col[t - 1] - mean);
      den += (col[t] - mean) * (col[t] - mean);
    }
    CHECK(num / den > 0.8);  // rho = 0.9
    CHECK(num / den < 0.97);
  }
}

TEST_CASE("pure linear noiseless data is an exact OLS problem") {
  DgpConfig cfg = DgpConfig::benchmark();
  cfg.n_rows = 500;
  cfg.hinge_coef = 0.0;
  cfg.interaction_coef = 0.0;
  cfg.noise_std = 0.0;
  const SynthData s = generate(cfg);
  const LinearModel m = fit_ols(s.data);
  for (Eigen::Index j = 0; j < cfg.linear.size(); ++j) {
    CHECK(m.coefficients[j] == doctest::Approx(cfg.linear[j]).epsilon(1e-8));
  }
  CHECK(std::abs(m.intercept) <= 1e-10);
  CHECK(m.rmse_in_sample <= 1e-10);
}

TEST_CASE("true function evaluates its three parts") {
  DgpConfig cfg = DgpConfig::benchmark();
  const SynthData s = generate(cfg);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(11);
  CHECK(s.truth(x) == 0.0);

  x[3] = -1.0;  // hinge feature below zero
  CHECK(s.truth(x) == doctest::Approx(cfg.linear[3] * -1.0 + cfg.hinge_coef).epsilon(1e-15));
  x[3] = 1.0;  // flat side
  CHECK(s.truth(x) == doctest::Approx(cfg.linear[3]).epsilon(1e-15));

  x.setZero();
  x[1] = 2.0;
  x[2] = 3.0;
  CHECK(s.truth(x) == doctest::Approx(cfg.linear[1] * 2.0 + cfg.linear[2] * 3.0 +
                                      cfg.interaction_coef * 6.0)
                           .epsilon(1e-15));
}

TEST_CASE("configuration validation") {
  DgpConfig cfg = DgpConfig::benchmark();
  cfg.autocorr[2] = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = DgpConfig::benchmark();
  cfg.hinge_index = cfg.interaction_a;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = DgpConfig::benchmark();
  cfg.feature_names = {"a", "b"};  // wrong arity
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = DgpConfig::benchmark();
  cfg.feature_names.assign(11, "");
  for (int j = 0; j < 11; ++j) cfg.feature_names[static_cast<std::size_t>(j)] = "v" + std::to_string(j);
  cfg.feature_names[1] = cfg.feature_names[0];  // duplicate
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = DgpConfig::benchmark();
  cfg.hinge_index = 99;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
