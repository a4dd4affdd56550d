#pragma once

#include "gprlpv/lpv_model.hpp"

#include <vector>

namespace gprlpv {

/// Coarse global scan plus coordinate-wise golden-section polish.
struct SelectionConfig {
  std::vector<int> grid_resolution;  // per dimension, each >= 2
  int refinement_steps = 2;
  double refinement_shrink = 0.5;  // in (0, 1)
  double tie_tolerance = 0.0;

  void validate(int sched_dim) const;
};

struct SelectionResult {
  OperatingPoint theta;
  double g_value = 0.0;
};

/// Regular grid over the box including the boundary, enumerated in
/// lexicographic coordinate order.
std::vector<OperatingPoint> grid_points(const OperatingBox& box, const std::vector<int>& res);

/// g_M at every point; evaluations may run on several threads, the output
/// order is fixed.
Eigen::VectorXd evaluate_criterion(const GprLpvModel& model,
                                   const std::vector<OperatingPoint>& points, int threads = 1);

/// argmax of g_M over the box. Ties within tie_tolerance of the grid
/// maximum break to the lexicographically smallest point, which seeds the
/// refinement; the result never falls below the scanned maximum.
SelectionResult select_next_operating_point(const GprLpvModel& model, const SelectionConfig& cfg,
                                            int threads = 1);

/// Midpoint-rule quadrature of g_M over the box.
double uncertainty_volume(const GprLpvModel& model, const std::vector<int>& resolution,
                          int threads = 1);

}  // namespace gprlpv
