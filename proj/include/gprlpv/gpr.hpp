#pragma once

#include "gprlpv/kernel.hpp"

namespace gprlpv {

/// Training data for one scalar GP: operating points with labels and
/// per-label observation-noise standard deviations (the local standard
/// errors of the parameter estimates).
struct GprDataset {
  Eigen::MatrixXd points;    // m x d, one operating point per row
  Eigen::VectorXd labels;    // m
  Eigen::VectorXd noise_sd;  // m, all >= 0

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  void validate() const;
  GprDataset appended(const OperatingPoint& point, double label, double noise_sd_) const;
};

/// Posterior of a scalar GP with heteroscedastic Gaussian observation noise.
/// Immutable once fitted; fit and append return new values, so concurrent
/// reads are safe.
class GprPosterior {
 public:
  struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
  };

  GprPosterior() = default;

  /// Factorizes K(points, points) + diag(noise_sd^2), escalating diagonal
  /// jitter eps * sigma^2 from 1e-10 to 1e-6 on factorization failure.
  /// An empty dataset is legal and yields the prior.
  static GprPosterior fit(GprDataset data, SquaredExponentialKernel kernel, PriorMean mean);

  /// Posterior mean and variance at a single test point. The variance is
  /// clamped to [0, kappa(target, target)]; values below -1e-10 raise
  /// NumericalDegeneracyError.
  Prediction predict(const OperatingPoint& target) const;

  /// Reduction in posterior variance at `target` if an observation at
  /// `next_point` with standard error `next_noise_sd` were appended:
  ///
  ///   (kappa(t, p) - k_p^T K^-1 k_t)^2
  ///   --------------------------------------
  ///   kappa(p, p) + se^2 - k_p^T K^-1 k_p
  ///
  /// The denominator is a Schur complement and must be positive.
  double variance_reduction(const OperatingPoint& next_point, double next_noise_sd,
                            const OperatingPoint& target) const;

  /// Refit with one more observation; observationally equivalent to fit()
  /// on the extended dataset.
  GprPosterior append_observation(const OperatingPoint& point, double label,
                                  double noise_sd) const;

  const GprDataset& dataset() const { return data_; }
  const SquaredExponentialKernel& kernel() const { return kernel_; }
  const PriorMean& prior_mean() const { return mean_; }

  /// Diagonal jitter actually applied (0 when the first attempt succeeded).
  double jitter() const { return jitter_; }

  /// Lower-triangular L with L L^T = K + Sigma + jitter I (empty when m = 0).
  Eigen::MatrixXd factor() const;

 private:
  GprDataset data_;
  SquaredExponentialKernel kernel_;
  PriorMean mean_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd weights_;  // (K + Sigma)^-1 (f - mu)
  double jitter_ = 0.0;
};

}  // namespace gprlpv
