#include "gprlpv/varx.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace gprlpv {

namespace {

constexpr double kExcitationThreshold = 1e-8;
constexpr double kQrConditionSwitch = 1e6;

Eigen::MatrixXd regressor_matrix(const TimeSeriesData& data) {
  const int rows = data.sample_count() - 1;
  const int n = data.state_dim();
  const int m = data.input_dim();
  Eigen::MatrixXd z(rows, n + m);
  z.leftCols(n) = data.states.topRows(rows);
  z.rightCols(m) = data.inputs.topRows(rows);
  return z;
}

}  // namespace

void TimeSeriesData::validate() const {
  if (states.rows() != inputs.rows()) {
    throw DimensionError("time series: states and inputs must have the same sample count");
  }
  if (state_dim() < 1 || input_dim() < 1) {
    throw DimensionError("time series: state and input dimensions must be at least 1");
  }
  if (sample_count() < state_dim() + input_dim() + 2) {
    std::ostringstream msg;
    msg << "time series: " << sample_count() << " samples are too few; need at least "
        << state_dim() + input_dim() + 2;
    throw InsufficientDataError(msg.str());
  }
  if (!states.allFinite() || !inputs.allFinite()) {
    throw ValidationError("time series: non-finite entries");
  }
}

ExcitationCheck check_persistency_of_excitation(const TimeSeriesData& data) {
  data.validate();
  const Eigen::MatrixXd z = regressor_matrix(data);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(z);
  ExcitationCheck out;
  out.smallest_singular_value =
      svd.singularValues().minCoeff() / std::sqrt(static_cast<double>(data.sample_count()));
  out.ok = out.smallest_singular_value > kExcitationThreshold;
  return out;
}

LocalModelEstimate identify_local_model(const TimeSeriesData& data) {
  data.validate();
  const int t = data.sample_count();
  const int n = data.state_dim();
  const int m = data.input_dim();
  const int p = n + m;

  const Eigen::MatrixXd z = regressor_matrix(data);
  const Eigen::MatrixXd y = data.states.bottomRows(t - 1);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(z);
  const Eigen::VectorXd singular = svd.singularValues();
  const double scaled_min = singular.minCoeff() / std::sqrt(static_cast<double>(t));
  if (scaled_min <= kExcitationThreshold) {
    std::ostringstream msg;
    msg << "identify: regressors are not persistently exciting (scaled smallest singular value "
        << scaled_min << ")";
    throw PersistencyError(msg.str());
  }

  Eigen::MatrixXd coef;      // p x n, rows = [A B]^T columns
  Eigen::MatrixXd gram_inv;  // (Z^T Z)^-1
  const double cond = singular.maxCoeff() / singular.minCoeff();
  if (cond > kQrConditionSwitch) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    coef = qr.solve(y);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    gram_inv = r_inv * r_inv.transpose();
  } else {
    const Eigen::MatrixXd gram = z.transpose() * z;
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    coef = llt.solve(z.transpose() * y);
    gram_inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
  }

  const Eigen::MatrixXd resid = y - z * coef;
  const int dof = (t - 1) - p;
  Eigen::MatrixXd sigma_w = resid.transpose() * resid / static_cast<double>(dof);
  sigma_w = 0.5 * (sigma_w + sigma_w.transpose()).eval();

  const Eigen::VectorXd gram_diag = gram_inv.diagonal().cwiseMax(0.0);

  LocalModelEstimate est;
  est.a_hat = coef.topRows(n).transpose();
  est.b_hat = coef.bottomRows(m).transpose();
  est.a_se.resize(n, n);
  est.b_se.resize(n, m);
  for (int i = 0; i < n; ++i) {
    const double row_var = std::max(sigma_w(i, i), 0.0);
    for (int j = 0; j < n; ++j) {
      est.a_se(i, j) = std::sqrt(row_var * gram_diag(j));
    }
    for (int j = 0; j < m; ++j) {
      est.b_se(i, j) = std::sqrt(row_var * gram_diag(n + j));
    }
  }
  est.residual_cov = sigma_w;
  est.operating_point = data.operating_point;
  return est;
}

}  // namespace gprlpv
