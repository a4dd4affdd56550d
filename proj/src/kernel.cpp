#include "gprlpv/kernel.hpp"

#include <cmath>
#include <utility>

namespace gprlpv {

SquaredExponentialKernel::SquaredExponentialKernel(double signal_std_,
                                                   Eigen::VectorXd length_scales_)
    : signal_std(signal_std_), length_scales(std::move(length_scales_)) {
  if (!(signal_std > 0.0)) {
    throw ValidationError("kernel: signal std must be positive");
  }
  if (length_scales.size() == 0 || !(length_scales.array() > 0.0).all()) {
    throw ValidationError("kernel: every length scale must be positive");
  }
}

double SquaredExponentialKernel::operator()(const OperatingPoint& a,
                                            const OperatingPoint& b) const {
  if (a.size() != dim() || b.size() != dim()) {
    throw DimensionError("kernel: point dimension does not match length scales");
  }
  const double quad = ((a - b).array().square() / length_scales.array()).sum();
  return variance() * std::exp(-0.5 * quad);
}

Eigen::MatrixXd gram_matrix(const SquaredExponentialKernel& kernel, const Eigen::MatrixXd& rows,
                            const Eigen::MatrixXd& cols) {
  if ((rows.rows() > 0 && rows.cols() != kernel.dim()) ||
      (cols.rows() > 0 && cols.cols() != kernel.dim())) {
    throw DimensionError("gram matrix: point dimension does not match kernel");
  }
  Eigen::MatrixXd out(rows.rows(), cols.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < cols.rows(); ++j) {
      const double quad =
          ((rows.row(i) - cols.row(j)).array().square() /
           kernel.length_scales.transpose().array())
              .sum();
      out(i, j) = kernel.variance() * std::exp(-0.5 * quad);
    }
  }
  return out;
}

Eigen::VectorXd gram_vector(const SquaredExponentialKernel& kernel, const Eigen::MatrixXd& rows,
                            const OperatingPoint& b) {
  if (b.size() != kernel.dim() || (rows.rows() > 0 && rows.cols() != kernel.dim())) {
    throw DimensionError("gram vector: point dimension does not match kernel");
  }
  Eigen::VectorXd out(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double quad =
        ((rows.row(i).transpose() - b).array().square() / kernel.length_scales.array()).sum();
    out(i) = kernel.variance() * std::exp(-0.5 * quad);
  }
  return out;
}

}  // namespace gprlpv
