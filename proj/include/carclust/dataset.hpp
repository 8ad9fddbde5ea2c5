#pragma once

#include <Eigen/Dense>
#include <vector>

namespace carclust {

// N x T response matrix plus the centered time covariate and the per-unit
// summary statistics the closed-form likelihood needs. The covariate must
// have (numerically) zero mean so the design stays orthogonal.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd y, Eigen::VectorXd x);

  // Standardizes the period values to mean zero and unit sample variance
  // (T-1 divisor) before constructing the dataset.
  static Dataset from_periods(Eigen::MatrixXd y, const std::vector<double>& periods);

  int n_units() const { return static_cast<int>(y_.rows()); }
  int n_periods() const { return static_cast<int>(y_.cols()); }
  const Eigen::MatrixXd& y() const { return y_; }
  const Eigen::VectorXd& x() const { return x_; }

  const Eigen::VectorXd& unit_means() const { return unit_means_; }  // per-unit mean of y
  const Eigen::VectorXd& xty() const { return xty_; }                // per-unit sum_t x_t y_it
  double sum_x2() const { return sum_x2_; }
  double sum_y2() const { return sum_y2_; }

 private:
  Eigen::MatrixXd y_;
  Eigen::VectorXd x_;
  Eigen::VectorXd unit_means_, xty_;
  double sum_x2_ = 0.0, sum_y2_ = 0.0;
};

// Centered and scaled time index for a vector of period values (shift
// invariant). Also used for placing an out-of-sample period on the same
// scale.
Eigen::VectorXd standardize_periods(const std::vector<double>& periods);
double standardized_position(const std::vector<double>& periods, double period);

}  // namespace carclust
