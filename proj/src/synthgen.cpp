#include "oilrf/synthgen.hpp"

#include <cmath>
#include <cstdio>

#include "oilrf/errors.hpp"
#include "oilrf/rng.hpp"

namespace oilrf {

namespace {

// Purpose tags for the per-config random streams, so adding a stream never
// shifts the draws of another.
enum StreamTag : std::uint64_t { kFeatures = 0, kNoise = 1, kPriceNoise = 2 };

std::vector<std::string> default_feature_names(Eigen::Index d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j + 1 < d; ++j) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "x%02d", static_cast<int>(j + 1));
    names.emplace_back(buf);
  }
  names.emplace_back(kMomentumFeature);
  return names;
}

}  // namespace

void DgpConfig::validate() const {
  const Eigen::Index d = linear.size();
  if (n_rows < 1) throw ConfigError("synth n_rows must be >= 1");
  if (d < 1) throw ConfigError("synth needs at least one linear coefficient");
  if (autocorr.size() != d) {
    throw ConfigError("synth autocorr must have one entry per feature");
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(autocorr[j] > -1.0 && autocorr[j] < 1.0)) {
      throw ConfigError("synth autocorr must lie in (-1, 1)");
    }
  }
  if (hinge_index < 0 || hinge_index >= d || interaction_a < 0 || interaction_a >= d ||
      interaction_b < 0 || interaction_b >= d) {
    throw ConfigError("synth term indices must be within [0, " + std::to_string(d) + ")");
  }
  if (interaction_a == interaction_b || hinge_index == interaction_a ||
      hinge_index == interaction_b) {
    throw ConfigError("synth hinge and interaction indices must be distinct");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("synth noise std must be >= 0");
  if (!(price_noise_std >= 0.0)) throw ConfigError("synth price noise std must be >= 0");
  if (!(price_start > 0.0)) throw ConfigError("synth price start must be > 0");
  if (!feature_names.empty()) {
    if (static_cast<Eigen::Index>(feature_names.size()) != d) {
      throw ConfigError("synth feature_names must have one entry per feature");
    }
    for (std::size_t a = 0; a < feature_names.size(); ++a) {
      for (std::size_t b = a + 1; b < feature_names.size(); ++b) {
        if (feature_names[a] == feature_names[b]) {
          throw ConfigError("synth feature_names must be unique");
        }
      }
    }
  }
}

DgpConfig DgpConfig::benchmark() {
  DgpConfig cfg;
  cfg.linear.resize(11);
  // x01 stays out of the DGP on purpose: it anchors the "irrelevant feature
  // gets ~zero importance" checks.
  cfg.linear << 0.0, 0.45, 0.4, 0.4, 0.25, 0.22, 0.2, 0.18, 0.15, 0.12, 0.35;
  cfg.autocorr = Eigen::VectorXd::Constant(11, 0.9);
  return cfg;
}

double TrueFunction::operator()(Eigen::Ref<const Eigen::VectorXd> x) const {
  double f = linear.dot(x);
  f += hinge_coef * std::max(0.0, -x[hinge_index]);
  f += interaction_coef * x[interaction_a] * x[interaction_b];
  return f;
}

SynthData generate(const DgpConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = cfg.n_rows;
  const Eigen::Index d = cfg.linear.size();

  SynthData out;
  out.truth.linear = cfg.linear;
  out.truth.hinge_index = cfg.hinge_index;
  out.truth.hinge_coef = cfg.hinge_coef;
  out.truth.interaction_a = cfg.interaction_a;
  out.truth.interaction_b = cfg.interaction_b;
  out.truth.interaction_coef = cfg.interaction_coef;

  // Stationary AR(1) features: x_0 ~ N(0,1), then rho x + sqrt(1-rho^2) eps,
  // drawn row-major so the stream layout is part of the format.
  RngStream feature_rng = substream(cfg.seed, kFeatures);
  Eigen::MatrixXd X(n, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double eps = feature_rng.normal();
      const double rho = cfg.autocorr[j];
      X(t, j) = t == 0 ? eps : rho * X(t - 1, j) + std::sqrt(1.0 - rho * rho) * eps;
    }
  }

  RngStream noise_rng = substream(cfg.seed, kNoise);
  out.noise.resize(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    out.noise[t] = cfg.noise_std * noise_rng.normal();
    y[t] = out.truth(X.row(t).transpose()) + out.noise[t];
  }

  out.data.feature_names =
      cfg.feature_names.empty() ? default_feature_names(d) : cfg.feature_names;
  out.data.X = std::move(X);
  out.data.y = std::move(y);
  out.data.dates.reserve(static_cast<std::size_t>(n));
  Date day = Date::from_ymd(2010, 1, 4);
  for (Eigen::Index t = 0; t < n; ++t) {
    while (day.is_weekend()) day = day + 1;
    out.data.dates.push_back(day);
    day = day + 1;
  }

  // Log price accumulates truth/22 per day plus independent noise; a 22-row
  // change then matches the contemporaneous target scale.
  RngStream price_rng = substream(cfg.seed, kPriceNoise);
  Eigen::VectorXd price(n);
  double log_price = std::log(cfg.price_start);
  for (Eigen::Index t = 0; t < n; ++t) {
    price[t] = std::exp(log_price);
    log_price += out.truth(out.data.X.row(t).transpose()) / 22.0 +
                 cfg.price_noise_std * price_rng.normal();
  }
  out.panel.calendar = out.data.dates;
  out.panel.names = {kSynthPriceColumn};
  out.panel.columns = {std::move(price)};
  return out;
}

}  // namespace oilrf
