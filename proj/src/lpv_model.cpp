#include "gprlpv/lpv_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace gprlpv {

void HyperConfig::validate(int sched_dim) const {
  if (length_scales.size() != sched_dim) {
    throw DimensionError("hyper config: need one length scale per theta coordinate");
  }
  if (!(length_scales.array() > 0.0).all()) {
    throw ValidationError("hyper config: length scales must be positive");
  }
  if (!(sigma_factor > 0.0) || !(sigma_floor > 0.0)) {
    throw ValidationError("hyper config: sigma factor and floor must be positive");
  }
  if (!(std::abs(prior_a_diag) < 1.0)) {
    throw ValidationError("hyper config: prior A diagonal must have magnitude below 1");
  }
}

std::string GprLpvModel::element_key(int state_dim, int input_dim, int flat_index) {
  const int a_count = state_dim * state_dim;
  std::ostringstream key;
  if (flat_index < a_count) {
    key << "a_" << flat_index / state_dim + 1 << "_" << flat_index % state_dim + 1;
  } else {
    const int rel = flat_index - a_count;
    key << "b_" << rel / input_dim + 1 << "_" << rel % input_dim + 1;
  }
  return key.str();
}

int GprLpvModel::element_index(int state_dim, int input_dim, const std::string& key) {
  const int total = state_dim * state_dim + state_dim * input_dim;
  for (int flat = 0; flat < total; ++flat) {
    if (element_key(state_dim, input_dim, flat) == key) {
      return flat;
    }
  }
  throw ValidationError("unknown element key: " + key);
}

double GprLpvModel::element_label(const LocalModelEstimate& est, int flat_index) const {
  const int a_count = n_ * n_;
  if (flat_index < a_count) {
    return est.a_hat(flat_index / n_, flat_index % n_);
  }
  const int rel = flat_index - a_count;
  return est.b_hat(rel / m_, rel % m_);
}

double GprLpvModel::element_se(const LocalModelEstimate& est, int flat_index) const {
  const int a_count = n_ * n_;
  if (flat_index < a_count) {
    return est.a_se(flat_index / n_, flat_index % n_);
  }
  const int rel = flat_index - a_count;
  return est.b_se(rel / m_, rel % m_);
}

double GprLpvModel::prior_mean_for(int flat_index) const {
  const int a_count = n_ * n_;
  if (flat_index < a_count && flat_index / n_ == flat_index % n_) {
    return hyper_.prior_a_diag;
  }
  return 0.0;  // off-diagonal A and all B elements
}

int GprLpvModel::experiment_count() const { return static_cast<int>(points_.rows()); }

GprLpvModel GprLpvModel::from_parts(int state_dim, int input_dim, const OperatingBox& box,
                                    const HyperConfig& hyper, const Eigen::MatrixXd& points,
                                    std::vector<ElementData> elements) {
  if (state_dim < 1 || input_dim < 1) {
    throw DimensionError("gpr-lpv: state and input dimensions must be at least 1");
  }
  hyper.validate(box.dim());
  const int total = state_dim * state_dim + state_dim * input_dim;
  if (static_cast<int>(elements.size()) != total) {
    throw DimensionError("gpr-lpv: expected one element dataset per matrix entry");
  }
  if (points.rows() > 0 && points.cols() != box.dim()) {
    throw DimensionError("gpr-lpv: point dimension does not match box");
  }
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (!box.contains(points.row(i).transpose())) {
      throw ValidationError("gpr-lpv: operating point outside the box");
    }
  }

  GprLpvModel model;
  model.n_ = state_dim;
  model.m_ = input_dim;
  model.box_ = box;
  model.hyper_ = hyper;
  model.points_ = points;
  model.elements_.reserve(total);
  for (int flat = 0; flat < total; ++flat) {
    const auto& el = elements[flat];
    if (el.labels.size() != points.rows() || el.noise_sd.size() != points.rows()) {
      throw DimensionError("gpr-lpv: element dataset length does not match point count");
    }
    if (!(el.sigma > 0.0)) {
      throw ValidationError("gpr-lpv: element sigma must be positive");
    }
    GprDataset data;
    data.points = points;
    data.labels = el.labels;
    data.noise_sd = el.noise_sd;
    model.elements_.push_back(GprPosterior::fit(
        std::move(data), SquaredExponentialKernel(el.sigma, hyper.length_scales),
        PriorMean{el.prior_mean}));
  }
  return model;
}

GprLpvModel GprLpvModel::build(const std::vector<LocalModelEstimate>& estimates,
                               const OperatingBox& box, const HyperConfig& hyper) {
  if (estimates.empty()) {
    throw ValidationError("gpr-lpv build: need at least one local estimate");
  }
  const int n = estimates.front().state_dim();
  const int m = estimates.front().input_dim();
  const int k = static_cast<int>(estimates.size());
  Eigen::MatrixXd points(k, box.dim());
  for (int i = 0; i < k; ++i) {
    const auto& est = estimates[i];
    if (est.state_dim() != n || est.input_dim() != m) {
      throw DimensionError("gpr-lpv build: estimates disagree on system dimensions");
    }
    if (est.operating_point.size() != box.dim()) {
      throw DimensionError("gpr-lpv build: operating point dimension does not match box");
    }
    points.row(i) = est.operating_point.transpose();
  }

  GprLpvModel probe;  // for element accessors only
  probe.n_ = n;
  probe.m_ = m;
  probe.hyper_ = hyper;

  const int total = n * n + n * m;
  std::vector<ElementData> elements(total);
  for (int flat = 0; flat < total; ++flat) {
    ElementData el;
    el.labels.resize(k);
    el.noise_sd.resize(k);
    double max_se = 0.0;
    for (int i = 0; i < k; ++i) {
      el.labels(i) = probe.element_label(estimates[i], flat);
      el.noise_sd(i) = probe.element_se(estimates[i], flat);
      max_se = std::max(max_se, el.noise_sd(i));
    }
    el.sigma = std::max(hyper.sigma_floor, hyper.sigma_factor * max_se);
    el.prior_mean = probe.prior_mean_for(flat);
    elements[flat] = std::move(el);
  }
  return from_parts(n, m, box, hyper, points, std::move(elements));
}

MatrixPrediction GprLpvModel::predict_matrices(const OperatingPoint& target) const {
  if (target.size() != sched_dim()) {
    throw DimensionError("gpr-lpv predict: target dimension mismatch");
  }
  MatrixPrediction out;
  out.outside_box = !box_.contains(target);
  out.a_mean.resize(n_, n_);
  out.a_var.resize(n_, n_);
  out.b_mean.resize(n_, m_);
  out.b_var.resize(n_, m_);
  const int a_count = n_ * n_;
  for (int flat = 0; flat < element_count(); ++flat) {
    const auto pred = elements_[flat].predict(target);
    if (flat < a_count) {
      out.a_mean(flat / n_, flat % n_) = pred.mean;
      out.a_var(flat / n_, flat % n_) = pred.variance;
    } else {
      const int rel = flat - a_count;
      out.b_mean(rel / m_, rel % m_) = pred.mean;
      out.b_var(rel / m_, rel % m_) = pred.variance;
    }
  }
  return out;
}

double GprLpvModel::uncertainty_criterion(const OperatingPoint& target) const {
  if (target.size() != sched_dim()) {
    throw DimensionError("gpr-lpv criterion: target dimension mismatch");
  }
  double total = 0.0;
  for (const auto& el : elements_) {
    total += el.predict(target).variance;
  }
  return total;
}

GprLpvModel GprLpvModel::append_experiment(const LocalModelEstimate& estimate) const {
  if (estimate.state_dim() != n_ || estimate.input_dim() != m_) {
    throw DimensionError("gpr-lpv append: estimate dimensions do not match model");
  }
  if (estimate.operating_point.size() != sched_dim()) {
    throw DimensionError("gpr-lpv append: operating point dimension mismatch");
  }
  if (!box_.contains(estimate.operating_point)) {
    throw ValidationError("gpr-lpv append: operating point outside the box");
  }

  if (!hyper_.reresolve_sigma_on_append) {
    GprLpvModel out = *this;
    Eigen::MatrixXd points(points_.rows() + 1, box_.dim());
    points.topRows(points_.rows()) = points_;
    points.row(points_.rows()) = estimate.operating_point.transpose();
    out.points_ = points;
    for (int flat = 0; flat < element_count(); ++flat) {
      out.elements_[flat] = elements_[flat].append_observation(
          estimate.operating_point, element_label(estimate, flat), element_se(estimate, flat));
    }
    return out;
  }

  // Re-resolve each element sigma from the extended noise vector.
  Eigen::MatrixXd points(points_.rows() + 1, box_.dim());
  points.topRows(points_.rows()) = points_;
  points.row(points_.rows()) = estimate.operating_point.transpose();
  std::vector<ElementData> elements(element_count());
  for (int flat = 0; flat < element_count(); ++flat) {
    const auto& existing = elements_[flat].dataset();
    ElementData el;
    el.labels.resize(points.rows());
    el.labels.head(existing.labels.size()) = existing.labels;
    el.labels(points.rows() - 1) = element_label(estimate, flat);
    el.noise_sd.resize(points.rows());
    el.noise_sd.head(existing.noise_sd.size()) = existing.noise_sd;
    el.noise_sd(points.rows() - 1) = element_se(estimate, flat);
    el.sigma = std::max(hyper_.sigma_floor, hyper_.sigma_factor * el.noise_sd.maxCoeff());
    el.prior_mean = prior_mean_for(flat);
    elements[flat] = std::move(el);
  }
  return from_parts(n_, m_, box_, hyper_, points, std::move(elements));
}

}  // namespace gprlpv
