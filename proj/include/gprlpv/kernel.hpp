#pragma once

#include "gprlpv/types.hpp"

namespace gprlpv {

/// Squared exponential covariance with per-coordinate length scales:
///   kappa(a, b) = sigma^2 * exp(-1/2 * sum_i (a_i - b_i)^2 / lambda_i)
/// where lambda_i are the diagonal entries of Lambda.
struct SquaredExponentialKernel {
  double signal_std = 1.0;
  Eigen::VectorXd length_scales;

  SquaredExponentialKernel() = default;
  SquaredExponentialKernel(double signal_std_, Eigen::VectorXd length_scales_);

  int dim() const { return static_cast<int>(length_scales.size()); }

  /// kappa(theta, theta) = sigma^2 for every theta.
  double variance() const { return signal_std * signal_std; }

  double operator()(const OperatingPoint& a, const OperatingPoint& b) const;
};

inline double kernel_eval(const SquaredExponentialKernel& kernel, const OperatingPoint& a,
                          const OperatingPoint& b) {
  return kernel(a, b);
}

/// Entry (i, j) = kappa(rows.row(i), cols.row(j)); points are matrix rows.
/// With rows == cols the result is exactly symmetric.
Eigen::MatrixXd gram_matrix(const SquaredExponentialKernel& kernel, const Eigen::MatrixXd& rows,
                            const Eigen::MatrixXd& cols);

/// Covariances between every row of `rows` and a single point.
Eigen::VectorXd gram_vector(const SquaredExponentialKernel& kernel, const Eigen::MatrixXd& rows,
                            const OperatingPoint& b);

/// Constant-in-theta prior mean.
struct PriorMean {
  double constant = 0.0;
  double operator()(const OperatingPoint&) const { return constant; }
};

}  // namespace gprlpv
