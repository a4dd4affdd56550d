#pragma once

#include "gprlpv/types.hpp"

namespace gprlpv {

/// One local experiment at a fixed operating point: T samples of the state
/// and input sequences, in normalized units.
struct TimeSeriesData {
  Eigen::MatrixXd states;  // T x n
  Eigen::MatrixXd inputs;  // T x m
  OperatingPoint operating_point;

  int sample_count() const { return static_cast<int>(states.rows()); }
  int state_dim() const { return static_cast<int>(states.cols()); }
  int input_dim() const { return static_cast<int>(inputs.cols()); }
  void validate() const;
};

/// Local linear model (A_hat, B_hat) with elementwise standard errors and
/// the residual covariance estimate.
struct LocalModelEstimate {
  Eigen::MatrixXd a_hat;         // n x n
  Eigen::MatrixXd b_hat;         // n x m
  Eigen::MatrixXd a_se;          // n x n, >= 0
  Eigen::MatrixXd b_se;          // n x m, >= 0
  Eigen::MatrixXd residual_cov;  // n x n, symmetric PSD
  OperatingPoint operating_point;

  int state_dim() const { return static_cast<int>(a_hat.rows()); }
  int input_dim() const { return static_cast<int>(b_hat.cols()); }
};

struct ExcitationCheck {
  bool ok = false;
  double smallest_singular_value = 0.0;
};

/// Smallest singular value of the regressor matrix Z scaled by 1/sqrt(T);
/// ok iff it exceeds 1e-8.
ExcitationCheck check_persistency_of_excitation(const TimeSeriesData& data);

/// Least-squares fit of x_{k+1} = A x_k + B u_k + w_k on one experiment.
///
/// Because every state equation shares the same regressors, generalized
/// least squares coincides with equationwise OLS; standard errors come from
/// the diagonal of Sigma_w (x) (Z^T Z)^-1. The residual covariance uses the
/// degrees-of-freedom correction T - 1 - (n + m). Solves via QR of Z when
/// the regressors are ill conditioned (cond > 1e6), normal equations
/// otherwise.
LocalModelEstimate identify_local_model(const TimeSeriesData& data);

}  // namespace gprlpv
