#pragma once

#include "gprlpv/gpr.hpp"
#include "gprlpv/varx.hpp"

#include <string>
#include <vector>

namespace gprlpv {

/// Kernel and prior settings shared by all element GPs. Length scales are
/// per theta-coordinate; the signal std of each element is resolved
/// empirically as sigma_factor times the largest observed standard error of
/// that element, floored to keep the kernel nondegenerate.
struct HyperConfig {
  Eigen::VectorXd length_scales;
  double sigma_factor = 2.0;
  double sigma_floor = 1e-6;
  double prior_a_diag = 0.8;  // constant prior mean of diagonal A elements
  bool reresolve_sigma_on_append = false;

  void validate(int sched_dim) const;
};

struct MatrixPrediction {
  Eigen::MatrixXd a_mean;
  Eigen::MatrixXd b_mean;
  Eigen::MatrixXd a_var;
  Eigen::MatrixXd b_var;
  bool outside_box = false;
};

/// The GPR-LPV model: one scalar GP per element of A(theta) and B(theta),
/// all sharing the same list of operating points, with observation noise set
/// from the local standard errors. Immutable after build; append returns a
/// new model.
class GprLpvModel {
 public:
  /// Raw per-element state for (de)serialization and direct construction.
  struct ElementData {
    Eigen::VectorXd labels;
    Eigen::VectorXd noise_sd;
    double sigma = 1.0;
    double prior_mean = 0.0;
  };

  GprLpvModel() = default;

  static GprLpvModel build(const std::vector<LocalModelEstimate>& estimates,
                           const OperatingBox& box, const HyperConfig& hyper);

  /// Construct from explicit element datasets with fixed sigmas (no
  /// empirical re-resolution); used by loaders and prior-only models.
  static GprLpvModel from_parts(int state_dim, int input_dim, const OperatingBox& box,
                                const HyperConfig& hyper, const Eigen::MatrixXd& points,
                                std::vector<ElementData> elements);

  MatrixPrediction predict_matrices(const OperatingPoint& target) const;

  /// Sum of elementwise posterior variances at the target (the trace of the
  /// stacked-parameter posterior covariance).
  double uncertainty_criterion(const OperatingPoint& target) const;

  GprLpvModel append_experiment(const LocalModelEstimate& estimate) const;

  int state_dim() const { return n_; }
  int input_dim() const { return m_; }
  int sched_dim() const { return box_.dim(); }
  int element_count() const { return n_ * n_ + n_ * m_; }
  int experiment_count() const;
  const OperatingBox& box() const { return box_; }
  const HyperConfig& hyper() const { return hyper_; }
  const Eigen::MatrixXd& points() const { return points_; }
  const GprPosterior& element(int flat_index) const { return elements_.at(flat_index); }

  /// Flat element order: A row-major, then B row-major.
  static std::string element_key(int state_dim, int input_dim, int flat_index);
  static int element_index(int state_dim, int input_dim, const std::string& key);

 private:
  double element_label(const LocalModelEstimate& est, int flat_index) const;
  double element_se(const LocalModelEstimate& est, int flat_index) const;
  double prior_mean_for(int flat_index) const;

  int n_ = 0;
  int m_ = 0;
  OperatingBox box_;
  HyperConfig hyper_;
  Eigen::MatrixXd points_;  // k x d, shared by every element GP
  std::vector<GprPosterior> elements_;
};

}  // namespace gprlpv
