#include "oilrf/linear.hpp"

#include <Eigen/QR>
#include <cmath>

#include "oilrf/errors.hpp"

namespace oilrf {

namespace {

// Fit y on [1 | X] by column-pivoted Householder QR. `names` labels the
// columns of X and is used both for the model and for error messages.
LinearModel fit_with_intercept(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               std::vector<std::string> names) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < d + 1) {
    throw ConfigError("least squares needs at least " + std::to_string(d + 1) +
                      " rows for " + std::to_string(d) + " features, got " +
                      std::to_string(n));
  }

  Eigen::MatrixXd design(n, d + 1);
  design.col(0).setOnes();
  design.rightCols(d) = X;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < d + 1) {
    const auto& perm = qr.colsPermutation().indices();
    std::string dependent;
    for (Eigen::Index i = qr.rank(); i < d + 1; ++i) {
      if (!dependent.empty()) dependent += ", ";
      const Eigen::Index col = perm[i];
      dependent += col == 0 ? "(intercept)" : names[static_cast<std::size_t>(col - 1)];
    }
    throw NumericError("design matrix is rank deficient; dependent columns: " + dependent);
  }

  const Eigen::VectorXd beta = qr.solve(y);
  LinearModel m;
  m.intercept = beta[0];
  m.coefficients = beta.tail(d);
  m.feature_names = std::move(names);
  m.rmse_in_sample =
      std::sqrt((design * beta - y).squaredNorm() / static_cast<double>(n));
  return m;
}

}  // namespace

LinearModel fit_ols(const Dataset& d) {
  return fit_with_intercept(d.X, d.y, d.feature_names);
}

LinearModel fit_ar1(const Dataset& d) {
  const Eigen::Index idx = d.feature_index(kMomentumFeature);
  if (idx < 0) {
    throw ConfigError("AR(1) baseline requires a '" + std::string(kMomentumFeature) +
                      "' feature column");
  }
  return fit_with_intercept(d.X.col(idx), d.y, {std::string(kMomentumFeature)});
}

Eigen::VectorXd predict(const LinearModel& m, const Dataset& d) {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(d.rows(), m.intercept);
  for (std::size_t j = 0; j < m.feature_names.size(); ++j) {
    const Eigen::Index idx = d.feature_index(m.feature_names[j]);
    if (idx < 0) {
      throw std::invalid_argument("predict: dataset is missing feature '" +
                                  m.feature_names[j] + "'");
    }
    out += m.coefficients[static_cast<Eigen::Index>(j)] * d.X.col(idx);
  }
  return out;
}

double rmse(const LinearModel& m, const Dataset& d) {
  return std::sqrt((predict(m, d) - d.y).squaredNorm() / static_cast<double>(d.rows()));
}

}  // namespace oilrf
