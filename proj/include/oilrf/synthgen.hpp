#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "oilrf/dataset.hpp"
#include "oilrf/series.hpp"

namespace oilrf {

// Data-generating process: stationary AR(1) Gaussian features, target
//   y = beta'x + hinge_coef * max(0, -x[hinge_index])
//     + interaction_coef * x[a] * x[b] + noise.
// The hinge gives one feature an asymmetric response (steep below zero, flat
// above); the product term gives two features a pure interaction.
struct DgpConfig {
  Eigen::Index n_rows = 3144;
  std::uint64_t seed = 1;

  Eigen::VectorXd linear;                  // per-feature coefficients; size = d
  Eigen::VectorXd autocorr;                // per-feature AR(1) rho, each in (-1, 1)
  std::vector<std::string> feature_names;  // empty -> x01..x{d-1} plus "momentum"

  Eigen::Index hinge_index = 3;
  double hinge_coef = 1.6;
  Eigen::Index interaction_a = 1;
  Eigen::Index interaction_b = 2;
  double interaction_coef = 0.6;
  double noise_std = 0.15;

  // Daily log-price increments are truth/22 plus this much Gaussian noise, so
  // horizon targets built from the price column stay predictable from x.
  double price_noise_std = 0.01;
  double price_start = 100.0;

  void validate() const;

  // Desk-scale benchmark: 3144 rows, 11 features (one with zero coefficient,
  // the last named "momentum" so the AR(1) baseline applies), rho 0.9.
  static DgpConfig benchmark();
};

// The noiseless regression function; the test oracle for fitted models.
struct TrueFunction {
  Eigen::VectorXd linear;
  Eigen::Index hinge_index = 0;
  double hinge_coef = 0.0;
  Eigen::Index interaction_a = 0;
  Eigen::Index interaction_b = 0;
  double interaction_coef = 0.0;

  double operator()(Eigen::Ref<const Eigen::VectorXd> x) const;
};

struct SynthData {
  Dataset data;
  Eigen::VectorXd noise;  // realized noise: data.y - truth(row) exactly
  TrueFunction truth;
  DailyPanel panel;  // dataset calendar with one "price" column for forecasting
};

inline constexpr const char* kSynthPriceColumn = "price";

// Deterministic under (config, seed); dates are business days from 2010-01-04.
SynthData generate(const DgpConfig& cfg);

}  // namespace oilrf
