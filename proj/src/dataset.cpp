#include "carclust/dataset.hpp"

#include <cmath>
#include <string>

#include "carclust/errors.hpp"

namespace carclust {

Dataset::Dataset(Eigen::MatrixXd y, Eigen::VectorXd x) : y_(std::move(y)), x_(std::move(x)) {
  if (y_.rows() < 1) throw InputError("dataset needs at least one unit");
  if (y_.cols() < 2) throw InputError("dataset needs at least two periods");
  if (x_.size() != y_.cols()) throw InputError("covariate length does not match period count");
  if (std::abs(x_.sum()) > 1e-10)
    throw InputError("time covariate must have mean zero; got sum " + std::to_string(x_.sum()));
  unit_means_ = y_.rowwise().mean();
  xty_ = y_ * x_;
  sum_x2_ = x_.squaredNorm();
  sum_y2_ = y_.squaredNorm();
}

Eigen::VectorXd standardize_periods(const std::vector<double>& periods) {
  const int t = static_cast<int>(periods.size());
  if (t < 2) throw InputError("need at least two periods to standardize");
  Eigen::Map<const Eigen::VectorXd> raw(periods.data(), t);
  const double mean = raw.mean();
  const double sd = std::sqrt((raw.array() - mean).square().sum() / (t - 1));
  if (!(sd > 0.0)) throw InputError("periods are all equal");
  return (raw.array() - mean) / sd;
}

double standardized_position(const std::vector<double>& periods, double period) {
  const int t = static_cast<int>(periods.size());
  Eigen::Map<const Eigen::VectorXd> raw(periods.data(), t);
  const double mean = raw.mean();
  const double sd = std::sqrt((raw.array() - mean).square().sum() / (t - 1));
  if (!(sd > 0.0)) throw InputError("periods are all equal");
  return (period - mean) / sd;
}

Dataset Dataset::from_periods(Eigen::MatrixXd y, const std::vector<double>& periods) {
  if (static_cast<int>(periods.size()) != y.cols())
    throw InputError("period count does not match response columns");
  return Dataset(std::move(y), standardize_periods(periods));
}

}  // namespace carclust
