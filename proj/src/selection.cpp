#include "gprlpv/selection.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace gprlpv {

namespace {

constexpr double kScanSlack = 1e-12;
constexpr int kGoldenIters = 24;
const double kGoldenRatio = (std::sqrt(5.0) - 1.0) / 2.0;

long checked_total(const std::vector<int>& res) {
  long total = 1;
  for (int r : res) {
    total *= r;
  }
  return total;
}

/// Golden-section maximization of f on [lo, hi]; returns the best probed
/// point, never an interpolated one.
template <typename F>
std::pair<double, double> golden_max(const F& f, double lo, double hi) {
  double a = lo;
  double b = hi;
  double c = b - kGoldenRatio * (b - a);
  double d = a + kGoldenRatio * (b - a);
  double fc = f(c);
  double fd = f(d);
  double best_x = fc >= fd ? c : d;
  double best_f = std::max(fc, fd);
  for (int it = 0; it < kGoldenIters; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGoldenRatio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGoldenRatio * (b - a);
      fd = f(d);
    }
    if (fc > best_f) {
      best_f = fc;
      best_x = c;
    }
    if (fd > best_f) {
      best_f = fd;
      best_x = d;
    }
  }
  return {best_x, best_f};
}

struct Refined {
  OperatingPoint theta;
  double value;
};

Refined refine(const GprLpvModel& model, OperatingPoint start, double start_value,
               Eigen::VectorXd half_width, const SelectionConfig& cfg) {
  const auto& box = model.box();
  OperatingPoint x = std::move(start);
  double best = start_value;
  for (int step = 0; step < cfg.refinement_steps; ++step) {
    for (int k = 0; k < box.dim(); ++k) {
      const double lo = std::max(box.lower(k), x(k) - half_width(k));
      const double hi = std::min(box.upper(k), x(k) + half_width(k));
      if (!(hi > lo)) {
        continue;
      }
      OperatingPoint probe = x;
      const auto line = [&](double t) {
        probe(k) = t;
        return model.uncertainty_criterion(probe);
      };
      const auto [t_best, f_best] = golden_max(line, lo, hi);
      if (f_best > best) {
        best = f_best;
        x(k) = t_best;
      }
    }
    half_width *= cfg.refinement_shrink;
  }
  return {x, best};
}

}  // namespace

void SelectionConfig::validate(int sched_dim) const {
  if (static_cast<int>(grid_resolution.size()) != sched_dim) {
    throw DimensionError("selection config: need one grid resolution per dimension");
  }
  for (int r : grid_resolution) {
    if (r < 2) {
      throw ValidationError("selection config: grid resolution must be >= 2 per dimension");
    }
  }
  if (refinement_steps < 0) {
    throw ValidationError("selection config: refinement steps must be >= 0");
  }
  if (!(refinement_shrink > 0.0 && refinement_shrink < 1.0)) {
    throw ValidationError("selection config: refinement shrink must lie in (0, 1)");
  }
  if (!(tie_tolerance >= 0.0)) {
    throw ValidationError("selection config: tie tolerance must be >= 0");
  }
}

std::vector<OperatingPoint> grid_points(const OperatingBox& box, const std::vector<int>& res) {
  const int d = box.dim();
  if (static_cast<int>(res.size()) != d) {
    throw DimensionError("grid: need one resolution per dimension");
  }
  for (int r : res) {
    if (r < 2) {
      throw ValidationError("grid: resolution must be >= 2 per dimension");
    }
  }
  const long total = checked_total(res);
  std::vector<OperatingPoint> points;
  points.reserve(total);
  OperatingPoint theta(d);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int k = d - 1; k >= 0; --k) {
      const long i = rem % res[k];
      rem /= res[k];
      theta(k) = box.lower(k) + (box.upper(k) - box.lower(k)) * i / (res[k] - 1);
    }
    points.push_back(theta);
  }
  return points;
}

Eigen::VectorXd evaluate_criterion(const GprLpvModel& model,
                                   const std::vector<OperatingPoint>& points, int threads) {
  const long n = static_cast<long>(points.size());
  Eigen::VectorXd values(n);
  const auto worker = [&](long begin, long end) {
    for (long i = begin; i < end; ++i) {
      values(i) = model.uncertainty_criterion(points[i]);
    }
  };
  if (threads <= 1 || n < 64) {
    worker(0, n);
    return values;
  }
  const int used = std::min<long>(threads, n);
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int t = 0; t < used; ++t) {
    const long begin = n * t / used;
    const long end = n * (t + 1) / used;
    pool.emplace_back([&, begin, end] {
      try {
        worker(begin, end);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) {
          first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) {
    th.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
  return values;
}

SelectionResult select_next_operating_point(const GprLpvModel& model, const SelectionConfig& cfg,
                                            int threads) {
  cfg.validate(model.sched_dim());
  const auto& box = model.box();
  const auto points = grid_points(box, cfg.grid_resolution);
  const Eigen::VectorXd values = evaluate_criterion(model, points, threads);
  const double scan_max = values.maxCoeff();

  long exact = 0;
  for (long i = 0; i < values.size(); ++i) {
    if (values(i) >= scan_max) {
      exact = i;
      break;
    }
  }
  long start = exact;
  if (cfg.tie_tolerance > 0.0) {
    for (long i = 0; i < values.size(); ++i) {
      if (values(i) >= scan_max - cfg.tie_tolerance) {
        start = i;
        break;
      }
    }
  }

  Eigen::VectorXd half_width(box.dim());
  for (int k = 0; k < box.dim(); ++k) {
    half_width(k) = (box.upper(k) - box.lower(k)) / (cfg.grid_resolution[k] - 1);
  }

  Refined result = refine(model, points[start], values(start), half_width, cfg);
  if (result.value < scan_max - kScanSlack) {
    // Refinement from a near-tie start stalled below the scanned maximum;
    // fall back to polishing the exact argmax.
    result = refine(model, points[exact], values(exact), half_width, cfg);
  }
  return {result.theta, result.value};
}

double uncertainty_volume(const GprLpvModel& model, const std::vector<int>& resolution,
                          int threads) {
  const auto& box = model.box();
  const int d = box.dim();
  if (static_cast<int>(resolution.size()) != d) {
    throw DimensionError("volume: need one resolution per dimension");
  }
  for (int r : resolution) {
    if (r < 2) {
      throw ValidationError("volume: resolution must be >= 2 per dimension");
    }
  }
  const long total = checked_total(resolution);
  Eigen::VectorXd widths(d);
  double cell = 1.0;
  for (int k = 0; k < d; ++k) {
    widths(k) = (box.upper(k) - box.lower(k)) / resolution[k];
    cell *= widths(k);
  }
  std::vector<OperatingPoint> centers;
  centers.reserve(total);
  OperatingPoint theta(d);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int k = d - 1; k >= 0; --k) {
      const long i = rem % resolution[k];
      rem /= resolution[k];
      theta(k) = box.lower(k) + widths(k) * (i + 0.5);
    }
    centers.push_back(theta);
  }
  const Eigen::VectorXd values = evaluate_criterion(model, centers, threads);
  // Fixed-order sum keeps the quadrature deterministic across thread counts.
  double sum = 0.0;
  for (long i = 0; i < values.size(); ++i) {
    sum += values(i);
  }
  return sum * cell;
}

}  // namespace gprlpv
