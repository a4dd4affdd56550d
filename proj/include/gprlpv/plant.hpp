#pragma once

#include "gprlpv/varx.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace gprlpv {

/// Multisine excitation parameters before phase realization. Frequencies
/// are indexed in cycles per base_period, independent of the record length,
/// so experiments of different lengths see statistically identical inputs
/// (quasistationarity).
struct MultisineConfig {
  int harmonics = 5;
  double amplitude = 1.0;
  int base_period = 256;
  std::optional<double> slew_limit;
};

/// A realized multisine: per-channel harmonic list (frequency index in
/// cycles per base_period, amplitude, phase).
struct MultisineSignal {
  struct Harmonic {
    int freq_index = 0;
    double amplitude = 0.0;
    double phase = 0.0;
  };

  int channels = 0;
  int length = 0;
  int base_period = 256;
  std::vector<std::vector<Harmonic>> harmonics;
  std::optional<double> slew_limit;
};

/// Assigns disjoint frequency indices across channels and draws phases
/// uniformly from the seed. Per-harmonic amplitude is amplitude/sqrt(H).
MultisineSignal make_multisine(int channels, int length, const MultisineConfig& config,
                               std::uint64_t seed);

/// Deterministic evaluation of the harmonic sum; applies the slew limit by
/// clamping per-step changes when one is set.
Eigen::MatrixXd render_multisine(const MultisineSignal& signal);

/// make_multisine followed by render_multisine.
Eigen::MatrixXd multisine_input(int channels, int length, const MultisineConfig& config,
                                std::uint64_t seed);

/// Number of distinct frequencies per channel recommended for the
/// first-order regression to be persistently exciting.
int recommended_harmonics(int state_dim, int input_dim);

/// Synthetic stable LPV plant over a box: A(theta) and B(theta) are affine
/// combinations of smooth basis functions (scaled coordinates and their
/// sines), with i.i.d. process noise.
struct SyntheticLpvPlant {
  enum class NoiseKind { gaussian, uniform };

  int state_dim = 0;
  int input_dim = 0;
  int sched_dim = 0;
  Eigen::MatrixXd a_const;                // n x n
  std::vector<Eigen::MatrixXd> a_coeffs;  // one n x n block per basis function
  Eigen::MatrixXd b_const;                // n x m
  std::vector<Eigen::MatrixXd> b_coeffs;  // one n x m block per basis function
  Eigen::MatrixXd noise_cov;              // n x n PSD, E at the box center
  double noise_gradient = 0.0;            // scales E linearly in theta; 0 = constant
  NoiseKind noise_kind = NoiseKind::gaussian;
  OperatingBox box;
  double stability_margin = 0.9;

  int basis_size() const { return 2 * sched_dim; }

  /// Coordinates mapped to [-1, 1] over the box.
  Eigen::VectorXd scaled(const OperatingPoint& theta) const;

  /// [s_1 .. s_d, sin(pi s_1) .. sin(pi s_d)] of the scaled coordinates.
  Eigen::VectorXd basis(const OperatingPoint& theta) const;

  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> true_matrices(const OperatingPoint& theta) const;

  Eigen::MatrixXd noise_cov_at(const OperatingPoint& theta) const;

  double spectral_radius(const OperatingPoint& theta) const;

  void validate() const;

  /// Draws coefficients from the seed, then rescales the A blocks so the
  /// spectral radius stays within the margin over a validation grid.
  static SyntheticLpvPlant random(int state_dim, int input_dim, int sched_dim, OperatingBox box,
                                  double stability_margin, double noise_std, std::uint64_t seed);

  /// Default campaign shape: 4 states, 3 inputs, 2 scheduling coordinates.
  static SyntheticLpvPlant default_plant(std::uint64_t seed);
};

/// Iterates x_{k+1} = A(theta) x_k + B(theta) u_k + w_k from x_0 = 0 with
/// w_k i.i.d. of covariance E(theta); deterministic given the seed.
TimeSeriesData simulate_experiment(const SyntheticLpvPlant& plant, const OperatingPoint& theta,
                                   const Eigen::MatrixXd& input, std::uint64_t seed);

}  // namespace gprlpv
