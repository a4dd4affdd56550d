#include "gprlpv/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace gprlpv {

namespace {

constexpr double kJitterInitial = 1e-10;
constexpr double kJitterMax = 1e-6;
constexpr double kNegativeVarianceTol = 1e-10;

std::pair<int, int> closest_pair(const Eigen::MatrixXd& points) {
  int a = 0;
  int b = 1;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
      const double dist = (points.row(i) - points.row(j)).norm();
      if (dist < best) {
        best = dist;
        a = static_cast<int>(i);
        b = static_cast<int>(j);
      }
    }
  }
  return {a, b};
}

}  // namespace

void GprDataset::validate() const {
  const Eigen::Index m = points.rows();
  if (labels.size() != m || noise_sd.size() != m) {
    throw DimensionError("gpr dataset: points, labels, noise_sd must have equal length");
  }
  if (!points.allFinite() || !labels.allFinite() || !noise_sd.allFinite()) {
    throw ValidationError("gpr dataset: non-finite entries");
  }
  if (m > 0 && (noise_sd.array() < 0.0).any()) {
    throw ValidationError("gpr dataset: negative noise standard deviation");
  }
}

GprDataset GprDataset::appended(const OperatingPoint& point, double label,
                                double noise_sd_) const {
  if (size() > 0 && point.size() != dim()) {
    throw DimensionError("gpr dataset: appended point dimension mismatch");
  }
  GprDataset out;
  out.points.resize(size() + 1, point.size());
  if (size() > 0) {
    out.points.topRows(size()) = points;
  }
  out.points.row(size()) = point.transpose();
  out.labels.resize(size() + 1);
  out.labels.head(size()) = labels;
  out.labels(size()) = label;
  out.noise_sd.resize(size() + 1);
  out.noise_sd.head(size()) = noise_sd;
  out.noise_sd(size()) = noise_sd_;
  return out;
}

GprPosterior GprPosterior::fit(GprDataset data, SquaredExponentialKernel kernel, PriorMean mean) {
  data.validate();
  GprPosterior post;
  post.data_ = std::move(data);
  post.kernel_ = std::move(kernel);
  post.mean_ = mean;

  const int m = post.data_.size();
  if (m == 0) {
    return post;
  }
  if (post.data_.dim() != post.kernel_.dim()) {
    throw DimensionError("gpr fit: dataset dimension does not match kernel");
  }

  // Coincident noise-free pairs make K + Sigma exactly singular; reject them
  // up front so jitter cannot mask an invalid dataset.
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (post.data_.noise_sd(i) == 0.0 && post.data_.noise_sd(j) == 0.0 &&
          (post.data_.points.row(i).array() == post.data_.points.row(j).array()).all()) {
        std::ostringstream msg;
        msg << "gpr fit: coincident noise-free points " << i << " and " << j
            << " make the gram matrix singular";
        throw SingularGramError(msg.str(), i, j);
      }
    }
  }

  const double sig2 = post.kernel_.variance();
  Eigen::MatrixXd base = gram_matrix(post.kernel_, post.data_.points, post.data_.points);
  base.diagonal() += post.data_.noise_sd.array().square().matrix();

  double eps = 0.0;
  bool factorized = false;
  while (true) {
    Eigen::MatrixXd shifted = base;
    if (eps > 0.0) {
      shifted.diagonal().array() += eps * sig2;
    }
    post.llt_.compute(shifted);
    if (post.llt_.info() == Eigen::Success) {
      post.jitter_ = eps * sig2;
      factorized = true;
      break;
    }
    if (eps == 0.0) {
      eps = kJitterInitial;
    } else if (eps < kJitterMax * 0.999) {
      eps = std::min(eps * 10.0, kJitterMax);
    } else {
      break;
    }
  }
  if (!factorized) {
    const auto [a, b] = closest_pair(post.data_.points);
    std::ostringstream msg;
    msg << "gpr fit: gram matrix not positive definite at maximum jitter; closest points are "
        << a << " and " << b << " (distance "
        << (post.data_.points.row(a) - post.data_.points.row(b)).norm() << ")";
    throw SingularGramError(msg.str(), a, b);
  }

  Eigen::VectorXd centered(m);
  for (int i = 0; i < m; ++i) {
    centered(i) = post.data_.labels(i) - post.mean_(post.data_.points.row(i).transpose());
  }
  post.weights_ = post.llt_.solve(centered);
  return post;
}

GprPosterior::Prediction GprPosterior::predict(const OperatingPoint& target) const {
  if (target.size() != kernel_.dim()) {
    throw DimensionError("gpr predict: target dimension does not match kernel");
  }
  const double prior_var = kernel_.variance();
  Prediction out;
  out.mean = mean_(target);
  out.variance = prior_var;
  if (data_.size() == 0) {
    return out;
  }
  const Eigen::VectorXd k_star = gram_vector(kernel_, data_.points, target);
  out.mean += k_star.dot(weights_);
  const Eigen::VectorXd v = llt_.matrixL().solve(k_star);
  const double variance = prior_var - v.squaredNorm();
  if (variance < -kNegativeVarianceTol) {
    std::ostringstream msg;
    msg << "gpr predict: structurally negative posterior variance " << variance;
    throw NumericalDegeneracyError(msg.str());
  }
  out.variance = std::clamp(variance, 0.0, prior_var);
  return out;
}

double GprPosterior::variance_reduction(const OperatingPoint& next_point, double next_noise_sd,
                                        const OperatingPoint& target) const {
  if (next_point.size() != kernel_.dim() || target.size() != kernel_.dim()) {
    throw DimensionError("variance reduction: point dimension does not match kernel");
  }
  if (!(next_noise_sd >= 0.0)) {
    throw ValidationError("variance reduction: noise standard deviation must be >= 0");
  }
  const double se2 = next_noise_sd * next_noise_sd;
  double numerator_root = kernel_(target, next_point);
  double denominator = kernel_.variance() + se2;
  if (data_.size() > 0) {
    const Eigen::VectorXd k_next = gram_vector(kernel_, data_.points, next_point);
    const Eigen::VectorXd u = llt_.solve(k_next);
    const Eigen::VectorXd k_target = gram_vector(kernel_, data_.points, target);
    numerator_root -= u.dot(k_target);
    denominator -= u.dot(k_next);
  }
  const double tol = 1e-12 * (kernel_.variance() + se2);
  if (denominator <= tol) {
    std::ostringstream msg;
    msg << "variance reduction: Schur complement " << denominator
        << " is not positive; appended point duplicates existing information";
    throw NumericalDegeneracyError(msg.str());
  }
  const double reduction = numerator_root * numerator_root / denominator;
  return reduction;
}

GprPosterior GprPosterior::append_observation(const OperatingPoint& point, double label,
                                              double noise_sd) const {
  return fit(data_.appended(point, label, noise_sd), kernel_, mean_);
}

Eigen::MatrixXd GprPosterior::factor() const {
  if (data_.size() == 0) {
    return Eigen::MatrixXd();
  }
  return llt_.matrixL();
}

}  // namespace gprlpv
