#include "gprlpv/plant.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace gprlpv {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Per-dimension validation-grid sizes keep the off-grid stability excursion
// small relative to the normalization headroom below.
int validation_grid_per_dim(int sched_dim) {
  switch (sched_dim) {
    case 1:
      return 101;
    case 2:
      return 41;
    default:
      return 15;
  }
}

// Normalize to slightly inside the requested margin so the spectral radius
// stays below it between validation-grid nodes as well.
constexpr double kNormalizationHeadroom = 0.97;

void for_each_grid_point(const OperatingBox& box, int per_dim,
                         const std::function<void(const OperatingPoint&)>& fn) {
  const int d = box.dim();
  std::vector<int> idx(d, 0);
  OperatingPoint theta(d);
  while (true) {
    for (int k = 0; k < d; ++k) {
      theta(k) = box.lower(k) + (box.upper(k) - box.lower(k)) * idx[k] / (per_dim - 1);
    }
    fn(theta);
    int k = d - 1;
    while (k >= 0 && ++idx[k] == per_dim) {
      idx[k] = 0;
      --k;
    }
    if (k < 0) {
      break;
    }
  }
}

Eigen::MatrixXd draw_matrix(int rows, int cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      out(i, j) = scale * gauss(rng);
    }
  }
  return out;
}

}  // namespace

int recommended_harmonics(int state_dim, int input_dim) {
  return (state_dim + input_dim + 1) / 2 + 1;
}

MultisineSignal make_multisine(int channels, int length, const MultisineConfig& config,
                               std::uint64_t seed) {
  if (channels < 1 || length < 1) {
    throw ValidationError("multisine: channels and length must be at least 1");
  }
  if (config.harmonics < 0 || !(config.amplitude >= 0.0)) {
    throw ValidationError("multisine: harmonics must be >= 0 and amplitude >= 0");
  }
  if (config.slew_limit && !(*config.slew_limit > 0.0)) {
    throw ValidationError("multisine: slew limit must be positive when set");
  }
  if (config.base_period < 2) {
    throw ValidationError("multisine: base period must be at least 2");
  }
  const int max_freq = config.harmonics > 0 ? channels + (config.harmonics - 1) * channels : 0;
  if (2 * max_freq >= config.base_period) {
    throw ValidationError(
        "multisine: too many harmonics for the base period (frequencies would alias)");
  }
  MultisineSignal sig;
  sig.channels = channels;
  sig.length = length;
  sig.base_period = config.base_period;
  sig.slew_limit = config.slew_limit;
  sig.harmonics.resize(channels);
  if (config.harmonics == 0) {
    return sig;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * kPi);
  const double amplitude = config.amplitude / std::sqrt(static_cast<double>(config.harmonics));
  for (int c = 0; c < channels; ++c) {
    sig.harmonics[c].reserve(config.harmonics);
    for (int h = 0; h < config.harmonics; ++h) {
      MultisineSignal::Harmonic harm;
      // Disjoint frequency sets across channels keep the channels linearly
      // independent.
      harm.freq_index = 1 + c + h * channels;
      harm.amplitude = amplitude;
      harm.phase = phase_dist(rng);
      sig.harmonics[c].push_back(harm);
    }
  }
  return sig;
}

Eigen::MatrixXd render_multisine(const MultisineSignal& signal) {
  if (signal.channels < 1 || signal.length < 1 ||
      static_cast<int>(signal.harmonics.size()) != signal.channels) {
    throw ValidationError("multisine: inconsistent signal description");
  }
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(signal.length, signal.channels);
  for (int c = 0; c < signal.channels; ++c) {
    for (const auto& harm : signal.harmonics[c]) {
      const double omega = 2.0 * kPi * harm.freq_index / signal.base_period;
      for (int k = 0; k < signal.length; ++k) {
        u(k, c) += harm.amplitude * std::sin(omega * k + harm.phase);
      }
    }
  }
  if (signal.slew_limit) {
    const double limit = *signal.slew_limit;
    for (int c = 0; c < signal.channels; ++c) {
      for (int k = 1; k < signal.length; ++k) {
        const double step = u(k, c) - u(k - 1, c);
        if (step > limit) {
          u(k, c) = u(k - 1, c) + limit;
        } else if (step < -limit) {
          u(k, c) = u(k - 1, c) - limit;
        }
      }
    }
  }
  return u;
}

Eigen::MatrixXd multisine_input(int channels, int length, const MultisineConfig& config,
                                std::uint64_t seed) {
  return render_multisine(make_multisine(channels, length, config, seed));
}

Eigen::VectorXd SyntheticLpvPlant::scaled(const OperatingPoint& theta) const {
  if (theta.size() != sched_dim) {
    throw DimensionError("plant: operating point dimension mismatch");
  }
  return (2.0 * (theta - box.lower).array() / (box.upper - box.lower).array() - 1.0).matrix();
}

Eigen::VectorXd SyntheticLpvPlant::basis(const OperatingPoint& theta) const {
  const Eigen::VectorXd s = scaled(theta);
  Eigen::VectorXd phi(2 * sched_dim);
  phi.head(sched_dim) = s;
  for (int i = 0; i < sched_dim; ++i) {
    phi(sched_dim + i) = std::sin(kPi * s(i));
  }
  return phi;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> SyntheticLpvPlant::true_matrices(
    const OperatingPoint& theta) const {
  if (!box.contains(theta)) {
    throw ValidationError("plant: operating point outside the box");
  }
  const Eigen::VectorXd phi = basis(theta);
  Eigen::MatrixXd a = a_const;
  Eigen::MatrixXd b = b_const;
  for (int j = 0; j < basis_size(); ++j) {
    a += phi(j) * a_coeffs[j];
    b += phi(j) * b_coeffs[j];
  }
  return {a, b};
}

Eigen::MatrixXd SyntheticLpvPlant::noise_cov_at(const OperatingPoint& theta) const {
  if (noise_gradient == 0.0) {
    return noise_cov;
  }
  const Eigen::VectorXd s = scaled(theta);
  return noise_cov * (1.0 + noise_gradient * s.mean());
}

double SyntheticLpvPlant::spectral_radius(const OperatingPoint& theta) const {
  const auto [a, b] = true_matrices(theta);
  (void)b;
  return a.eigenvalues().cwiseAbs().maxCoeff();
}

void SyntheticLpvPlant::validate() const {
  if (state_dim < 1 || input_dim < 1 || sched_dim < 1) {
    throw ValidationError("plant: dimensions must be at least 1");
  }
  if (box.dim() != sched_dim) {
    throw DimensionError("plant: box dimension does not match sched_dim");
  }
  if (a_const.rows() != state_dim || a_const.cols() != state_dim ||
      b_const.rows() != state_dim || b_const.cols() != input_dim) {
    throw DimensionError("plant: constant block dimensions inconsistent");
  }
  if (static_cast<int>(a_coeffs.size()) != basis_size() ||
      static_cast<int>(b_coeffs.size()) != basis_size()) {
    throw DimensionError("plant: expected one coefficient block per basis function");
  }
  if (noise_cov.rows() != state_dim || noise_cov.cols() != state_dim) {
    throw DimensionError("plant: noise covariance must be n x n");
  }
  if (!noise_cov.isApprox(noise_cov.transpose(), 1e-12)) {
    throw ValidationError("plant: noise covariance must be symmetric");
  }
  if (!(stability_margin > 0.0 && stability_margin < 1.0)) {
    throw ValidationError("plant: stability margin must lie in (0, 1)");
  }
  if (!(noise_gradient >= 0.0 && noise_gradient < 1.0)) {
    throw ValidationError("plant: noise gradient must lie in [0, 1)");
  }
}

SyntheticLpvPlant SyntheticLpvPlant::random(int state_dim, int input_dim, int sched_dim,
                                            OperatingBox box, double stability_margin,
                                            double noise_std, std::uint64_t seed) {
  SyntheticLpvPlant plant;
  plant.state_dim = state_dim;
  plant.input_dim = input_dim;
  plant.sched_dim = sched_dim;
  plant.box = std::move(box);
  plant.stability_margin = stability_margin;

  std::mt19937_64 rng(seed);
  plant.a_const =
      0.4 * Eigen::MatrixXd::Identity(state_dim, state_dim) +
      draw_matrix(state_dim, state_dim, 0.2, rng);
  plant.b_const = draw_matrix(state_dim, input_dim, 0.8, rng);
  for (int j = 0; j < plant.basis_size(); ++j) {
    plant.a_coeffs.push_back(draw_matrix(state_dim, state_dim, 0.12, rng));
    plant.b_coeffs.push_back(draw_matrix(state_dim, input_dim, 0.3, rng));
  }
  plant.noise_cov =
      noise_std * noise_std * Eigen::MatrixXd::Identity(state_dim, state_dim);
  plant.validate();

  double max_radius = 0.0;
  for_each_grid_point(plant.box, validation_grid_per_dim(sched_dim),
                      [&](const OperatingPoint& theta) {
                        max_radius = std::max(max_radius, plant.spectral_radius(theta));
                      });
  if (max_radius > 0.0) {
    const double scale = kNormalizationHeadroom * stability_margin / max_radius;
    plant.a_const *= scale;
    for (auto& block : plant.a_coeffs) {
      block *= scale;
    }
  }
  return plant;
}

SyntheticLpvPlant SyntheticLpvPlant::default_plant(std::uint64_t seed) {
  Eigen::VectorXd lo(2), hi(2);
  lo << 0.0, 0.0;
  hi << 2.0, 1.0;
  return random(4, 3, 2, OperatingBox(lo, hi), 0.9, 0.05, seed);
}

TimeSeriesData simulate_experiment(const SyntheticLpvPlant& plant, const OperatingPoint& theta,
                                   const Eigen::MatrixXd& input, std::uint64_t seed) {
  plant.validate();
  if (!plant.box.contains(theta)) {
    throw ValidationError("simulate: operating point outside the box");
  }
  if (input.cols() != plant.input_dim) {
    throw DimensionError("simulate: input column count does not match plant inputs");
  }
  const int t = static_cast<int>(input.rows());
  if (t < 1) {
    throw ValidationError("simulate: need at least one sample");
  }

  const auto [a, b] = plant.true_matrices(theta);
  const Eigen::MatrixXd cov = plant.noise_cov_at(theta);
  const bool noiseless = cov.isZero(0.0);
  Eigen::MatrixXd noise_sqrt;
  if (!noiseless) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    noise_sqrt = es.eigenvectors() *
                 es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double uniform_half_width = std::sqrt(3.0);  // unit variance
  std::uniform_real_distribution<double> uniform(-uniform_half_width, uniform_half_width);

  const int n = plant.state_dim;
  Eigen::MatrixXd states(t, n);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z(n);
  for (int k = 0; k < t; ++k) {
    states.row(k) = x.transpose();
    Eigen::VectorXd next = a * x + b * input.row(k).transpose();
    if (!noiseless) {
      for (int i = 0; i < n; ++i) {
        z(i) = plant.noise_kind == SyntheticLpvPlant::NoiseKind::gaussian ? gauss(rng)
                                                                          : uniform(rng);
      }
      next += noise_sqrt * z;
    }
    x = next;
  }
  if (!states.allFinite()) {
    throw std::logic_error("simulate: state diverged on a stable plant (internal error)");
  }

  TimeSeriesData data;
  data.states = std::move(states);
  data.inputs = input;
  data.operating_point = theta;
  return data;
}

}  // namespace gprlpv
