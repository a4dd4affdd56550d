// Acceptance suite: one self-contained check per release criterion, each
// printed as a single PASS/FAIL line. The process exits with the number of
// failed criteria.

#include "gprlpv/config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace gprlpv;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Criterion {
  int number;
  std::string title;
  std::function<void(std::ostringstream&)> body;  // throws or writes "FAIL:" details
};

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

OperatingPoint random_point(const OperatingBox& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd out(box.dim());
  for (int k = 0; k < box.dim(); ++k) {
    out(k) = box.lower(k) + (box.upper(k) - box.lower(k)) * unit(rng);
  }
  return out;
}

GprDataset random_dataset(int m, int d, std::mt19937_64& rng, double min_noise,
                          double max_noise) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  GprDataset data;
  data.points.resize(m, d);
  data.labels.resize(m);
  data.noise_sd.resize(m);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < d; ++k) {
      data.points(i, k) = unit(rng);
    }
    data.labels(i) = gauss(rng);
    data.noise_sd(i) = min_noise + (max_noise - min_noise) * unit(rng);
  }
  return data;
}

SquaredExponentialKernel random_kernel(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> sig(0.5, 2.5);
  std::uniform_real_distribution<double> scale(0.05, 1.0);
  Eigen::VectorXd ls(d);
  for (int k = 0; k < d; ++k) {
    ls(k) = scale(rng);
  }
  return {sig(rng), ls};
}

#define REQUIRE_MSG(cond, stream_expr)                  \
  do {                                                  \
    if (!(cond)) {                                      \
      out << "FAIL: " << stream_expr;                   \
      return;                                           \
    }                                                   \
  } while (0)

// ---------------------------------------------------------------------------
// 1. Variance-reduction formula vs full-refit differencing.
void criterion_variance_reduction(std::ostringstream& out) {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 3;
    const int m = 1 + trial % 10;
    const auto data = random_dataset(m, d, rng, 0.01, 0.5);
    const auto kernel = random_kernel(d, rng);
    const auto post = GprPosterior::fit(data, kernel, PriorMean{});
    Eigen::VectorXd next(d), target(d);
    for (int k = 0; k < d; ++k) {
      next(k) = unit(rng);
      target(k) = unit(rng);
    }
    const double se = 0.5 * unit(rng);
    const double reduction = post.variance_reduction(next, se, target);
    const double before = post.predict(target).variance;
    const double after = post.append_observation(next, 0.0, se).predict(target).variance;
    const double diff = before - after;
    const double tol = 1e-8 * std::max(std::abs(reduction), std::abs(diff)) +
                       1e-12 * kernel.variance();
    REQUIRE_MSG(std::abs(reduction - diff) <= tol,
                "trial " << trial << ": reduction " << reduction << " vs refit diff " << diff);
    REQUIRE_MSG(reduction >= 0.0, "trial " << trial << ": negative reduction " << reduction);
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  REQUIRE_MSG(elapsed < 10.0, "took " << elapsed << " s, limit 10 s");
  out << "100 randomized configurations agree to 1e-8 relative";
}

// ---------------------------------------------------------------------------
// 2. Posterior variance at the appended point is bounded by its noise.
void criterion_appended_variance_bound(std::ostringstream& out) {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 3;
    const int m = 1 + trial % 10;
    const auto data = random_dataset(m, d, rng, 0.01, 0.5);
    const auto kernel = random_kernel(d, rng);
    const auto post = GprPosterior::fit(data, kernel, PriorMean{});
    Eigen::VectorXd next(d);
    for (int k = 0; k < d; ++k) {
      next(k) = unit(rng);
    }
    const double se = 0.6 * unit(rng);
    const auto grown = post.append_observation(next, unit(rng), se);
    const double var = grown.predict(next).variance;
    REQUIRE_MSG(var <= se * se + 1e-10,
                "trial " << trial << ": variance " << var << " exceeds se^2 " << se * se);
  }
  out << "100 randomized appends respect the bound";
}

// ---------------------------------------------------------------------------
// 3. Posterior mean/variance vs dense-inverse evaluation up to m = 20.
void criterion_dense_inverse(std::ostringstream& out) {
  std::mt19937_64 rng(303);
  for (int m = 1; m <= 20; ++m) {
    const int d = 1 + m % 3;
    const auto data = random_dataset(m, d, rng, 0.05, 0.4);
    const auto kernel = random_kernel(d, rng);
    const PriorMean mean{0.15};
    const auto post = GprPosterior::fit(data, kernel, mean);

    Eigen::MatrixXd big_k = gram_matrix(kernel, data.points, data.points);
    big_k.diagonal() += data.noise_sd.array().square().matrix();
    const Eigen::MatrixXd inv = big_k.inverse();

    for (int probe = 0; probe < 5; ++probe) {
      const auto target = random_point(
          OperatingBox(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)), rng);
      const Eigen::VectorXd k_star = gram_vector(kernel, data.points, target);
      const Eigen::VectorXd centered = data.labels.array() - mean.constant;
      const double mean_oracle = mean.constant + k_star.dot(inv * centered);
      const double var_oracle = kernel.variance() - k_star.dot(inv * k_star);
      const auto got = post.predict(target);
      REQUIRE_MSG(std::abs(got.mean - mean_oracle) <=
                      1e-8 * std::max({1.0, std::abs(got.mean), std::abs(mean_oracle)}),
                  "m=" << m << ": mean " << got.mean << " vs oracle " << mean_oracle);
      REQUIRE_MSG(std::abs(got.variance - var_oracle) <=
                      1e-8 * std::max({1.0, got.variance, std::abs(var_oracle)}),
                  "m=" << m << ": variance " << got.variance << " vs oracle " << var_oracle);
    }
  }
  out << "datasets up to m=20 match the direct formulas to 1e-8 relative";
}

// ---------------------------------------------------------------------------
// 4. Local identification: exactness, coverage, and error scaling.
void criterion_varx(std::ostringstream& out) {
  const auto plant = SyntheticLpvPlant::default_plant(404);
  const auto theta = plant.box.center();
  MultisineConfig input;
  input.harmonics = recommended_harmonics(plant.state_dim, plant.input_dim);

  // Noiseless exactness.
  {
    SyntheticLpvPlant quiet = plant;
    quiet.noise_cov.setZero();
    const auto u = multisine_input(quiet.input_dim, 3000, input, 1);
    const auto est = identify_local_model(simulate_experiment(quiet, theta, u, 2));
    const auto [a, b] = plant.true_matrices(theta);
    const double err = (est.a_hat - a).norm() + (est.b_hat - b).norm();
    REQUIRE_MSG(err <= 1e-8, "noiseless recovery error " << err);
    REQUIRE_MSG(std::max(est.a_se.maxCoeff(), est.b_se.maxCoeff()) <= 1e-8,
                "noiseless standard errors not vanishing");
  }

  // 95% interval coverage over 500 Monte-Carlo runs.
  {
    const auto [a, b] = plant.true_matrices(theta);
    long covered = 0;
    long total = 0;
    for (int run = 0; run < 500; ++run) {
      const auto u = multisine_input(plant.input_dim, 400, input, 1000 + run);
      const auto est =
          identify_local_model(simulate_experiment(plant, theta, u, 100000 + run));
      for (int i = 0; i < plant.state_dim; ++i) {
        for (int j = 0; j < plant.state_dim; ++j) {
          covered += std::abs(est.a_hat(i, j) - a(i, j)) <= 1.96 * est.a_se(i, j);
          ++total;
        }
        for (int j = 0; j < plant.input_dim; ++j) {
          covered += std::abs(est.b_hat(i, j) - b(i, j)) <= 1.96 * est.b_se(i, j);
          ++total;
        }
      }
    }
    const double coverage = static_cast<double>(covered) / total;
    REQUIRE_MSG(coverage >= 0.90 && coverage <= 0.98, "coverage " << coverage);
    out << "coverage " << coverage;
  }

  // Median standard-error ratio between T and 4T.
  {
    std::vector<double> ratios;
    for (int seed = 0; seed < 50; ++seed) {
      const auto u_short = multisine_input(plant.input_dim, 600, input, 2000 + seed);
      const auto u_long = multisine_input(plant.input_dim, 2400, input, 3000 + seed);
      const auto est_short =
          identify_local_model(simulate_experiment(plant, theta, u_short, 200000 + seed));
      const auto est_long =
          identify_local_model(simulate_experiment(plant, theta, u_long, 300000 + seed));
      for (int i = 0; i < plant.state_dim; ++i) {
        for (int j = 0; j < plant.state_dim; ++j) {
          ratios.push_back(est_long.a_se(i, j) / est_short.a_se(i, j));
        }
        for (int j = 0; j < plant.input_dim; ++j) {
          ratios.push_back(est_long.b_se(i, j) / est_short.b_se(i, j));
        }
      }
    }
    std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
    const double median = ratios[ratios.size() / 2];
    REQUIRE_MSG(median >= 0.4 && median <= 0.6, "median se ratio " << median);
    out << ", median se ratio " << median;
  }
}

// ---------------------------------------------------------------------------
// 5. Reference-shape campaign: 16 initial experiments, budget 19.
void criterion_reference_campaign(std::ostringstream& out) {
  const auto start = Clock::now();
  const auto plant = SyntheticLpvPlant::default_plant(505);
  MultisineConfig input;
  input.harmonics = recommended_harmonics(plant.state_dim, plant.input_dim);
  const SimulatedRunner runner(plant, input);

  std::vector<TimeSeriesData> initial;
  int stream = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      Eigen::VectorXd theta(2);
      theta << plant.box.lower(0) + plant.box.widths()(0) * i / 3.0,
          plant.box.lower(1) + plant.box.widths()(1) * j / 3.0;
      initial.push_back(runner.run(theta, 6000, derive_seed(505, stream++)));
    }
  }

  HyperConfig hyper;
  hyper.length_scales = vec2(0.4, 0.1);
  CampaignSettings settings;
  settings.selection.grid_resolution = {41, 41};
  settings.selection.refinement_steps = 2;
  settings.volume_resolution = {40, 40};
  settings.experiment_length = 6000;

  const auto result =
      greedy_campaign(initial, runner, 19, plant.box, hyper, settings, 505);
  const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();

  REQUIRE_MSG(result.record.entries.size() == 20,
              "expected 20 record entries, got " << result.record.entries.size());
  for (std::size_t i = 1; i < result.record.entries.size(); ++i) {
    const double prev = result.record.entries[i - 1].volume;
    const double cur = result.record.entries[i].volume;
    REQUIRE_MSG(cur <= prev * (1.0 + 1e-9) + 1e-15,
                "volume rose at iteration " << i << ": " << prev << " -> " << cur);
  }
  REQUIRE_MSG(elapsed < 300.0, "campaign took " << elapsed << " s");
  out << "volumes " << result.record.entries.front().volume << " -> "
      << result.record.entries.back().volume << " in " << elapsed << " s";
}

// ---------------------------------------------------------------------------
// 6. Active selection beats uniform-random selection on paired seeds.
void criterion_active_beats_random(std::ostringstream& out) {
  int wins = 0;
  const int pairs = 20;
  for (int pair = 0; pair < pairs; ++pair) {
    const std::uint64_t seed = 600 + pair;
    auto plant = SyntheticLpvPlant::random(
        2, 1, 2, OperatingBox(vec2(0.0, 0.0), vec2(1.0, 1.0)), 0.9, 0.08, seed);
    // Process noise grows across the box, so the estimates stay noisier on
    // one side; the probe is whether selection allocates its budget there.
    plant.noise_gradient = 0.9;
    MultisineConfig input;
    input.harmonics = 3;
    const SimulatedRunner runner(plant, input);

    std::vector<TimeSeriesData> initial;
    int stream = 0;
    for (double x : {0.25, 0.75}) {
      for (double y : {0.25, 0.75}) {
        initial.push_back(runner.run(vec2(x, y), 300, derive_seed(seed, stream++)));
      }
    }

    HyperConfig hyper;
    hyper.length_scales = vec2(0.08, 0.08);
    CampaignSettings settings;
    settings.selection.grid_resolution = {21, 21};
    settings.selection.refinement_steps = 1;
    settings.volume_resolution = {20, 20};
    settings.experiment_length = 300;
    const int budget = 12;

    const auto active =
        greedy_campaign(initial, runner, budget, plant.box, hyper, settings, seed);
    const double active_final = active.record.entries.back().volume;

    // Random baseline: same initial data, same per-iteration experiment
    // seeds, uniformly drawn operating points.
    std::vector<LocalModelEstimate> estimates;
    for (const auto& data : initial) {
      estimates.push_back(identify_local_model(data));
    }
    auto model = GprLpvModel::build(estimates, plant.box, hyper);
    std::mt19937_64 theta_rng(derive_seed(seed, 0xACDC));
    for (int iter = 1; iter <= budget; ++iter) {
      const auto theta = random_point(plant.box, theta_rng);
      const auto data =
          runner.run(theta, settings.experiment_length,
                     derive_seed(seed, initial.size() + iter - 1));
      model = model.append_experiment(identify_local_model(data));
    }
    const double random_final = uncertainty_volume(model, settings.volume_resolution);

    if (std::getenv("GPRLPV_DEBUG_PAIRS")) {
      std::cerr << "pair " << pair << ": active " << active_final << " random " << random_final
                << " initial " << active.record.entries.front().volume << "\n";
      if (pair == 0) {
        for (const auto& e : active.record.entries) {
          if (e.iteration > 0) {
            std::cerr << "  active theta " << e.theta.transpose() << " -> " << e.volume << "\n";
          }
        }
      }
    }
    wins += active_final <= random_final;
  }
  REQUIRE_MSG(wins >= 16, "active won only " << wins << "/20 pairs");
  out << "active lower in " << wins << "/20 pairs";
}

// ---------------------------------------------------------------------------
// 7. Selection matches an exhaustive 201x201 argmax within one cell.
void criterion_selection_correctness(std::ostringstream& out) {
  for (int trial = 0; trial < 10; ++trial) {
    const auto plant = SyntheticLpvPlant::default_plant(700 + trial);
    MultisineConfig input;
    input.harmonics = recommended_harmonics(plant.state_dim, plant.input_dim);
    const SimulatedRunner runner(plant, input);
    std::vector<LocalModelEstimate> estimates;
    int stream = 0;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        Eigen::VectorXd theta(2);
        theta << plant.box.lower(0) + plant.box.widths()(0) * i / 3.0,
            plant.box.lower(1) + plant.box.widths()(1) * j / 3.0;
        estimates.push_back(identify_local_model(
            runner.run(theta, 1500, derive_seed(700 + trial, stream++))));
      }
    }
    HyperConfig hyper;
    hyper.length_scales = vec2(0.4, 0.1);
    const auto model = GprLpvModel::build(estimates, plant.box, hyper);

    SelectionConfig cfg;
    cfg.grid_resolution = {41, 41};
    cfg.refinement_steps = 3;
    const auto sel = select_next_operating_point(model, cfg, 2);

    const auto fine = grid_points(plant.box, {201, 201});
    const Eigen::VectorXd values = evaluate_criterion(model, fine, 2);
    Eigen::Index best = 0;
    values.maxCoeff(&best);
    const Eigen::VectorXd cell =
        (plant.box.widths().array() / 40.0).matrix();
    const Eigen::VectorXd gap = (sel.theta - fine[best]).cwiseAbs();
    REQUIRE_MSG((gap.array() <= cell.array() + 1e-12).all(),
                "trial " << trial << ": selected " << sel.theta.transpose()
                         << " vs exhaustive " << fine[best].transpose());
  }
  out << "10 models agree with the exhaustive argmax";
}

// ---------------------------------------------------------------------------
// 8. Campaign outputs are byte-identical across reruns.
void criterion_determinism(std::ostringstream& out) {
  const auto root = fs::temp_directory_path() / "gprlpv_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);

  const auto config_for = [&](const std::string& outdir) {
    std::ostringstream cfg;
    cfg << R"({
  "format_version": 1,
  "plant": {"state_dim": 2, "input_dim": 1, "sched_dim": 2,
            "box": {"lower": [0.0, 0.0], "upper": [1.0, 1.0]},
            "stability_margin": 0.9, "noise_std": 0.05, "seed": 88},
  "kernel": {"length_scales": [0.2, 0.2]},
  "selection": {"grid_resolution": [15, 15], "refinement_steps": 1},
  "volume_resolution": [12, 12],
  "initial_points": {"grid": [2, 2]},
  "budget": 3,
  "experiment_length": 400,
  "seed": 2024,
  "output_dir": ")" << outdir
        << R"("
})";
    return cfg.str();
  };

  const auto write = [](const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
  };
  const auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
  };

  const auto out1 = (root / "run1").string();
  const auto out2 = (root / "run2").string();
  write(root / "cfg1.json", config_for(out1));
  write(root / "cfg2.json", config_for(out2));
  REQUIRE_MSG(run_campaign((root / "cfg1.json").string()) == 0, "first run failed");
  REQUIRE_MSG(run_campaign((root / "cfg2.json").string()) == 0, "second run failed");

  REQUIRE_MSG(slurp(out1 + "/record.csv") == slurp(out2 + "/record.csv"),
              "record tables differ");
  int datasets = 0;
  for (const auto& entry : fs::directory_iterator(out1)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("dataset_", 0) == 0 && name.find(".csv") != std::string::npos &&
        name.find(".meta") == std::string::npos) {
      REQUIRE_MSG(slurp(entry.path()) == slurp(fs::path(out2) / name),
                  "dataset " << name << " differs");
      ++datasets;
    }
  }
  REQUIRE_MSG(datasets == 7, "expected 7 dataset files, saw " << datasets);
  REQUIRE_MSG(slurp(out1 + "/model.json") == slurp(out2 + "/model.json"), "models differ");
  fs::remove_all(root);
  out << "record, datasets, and model identical across reruns";
}

}  // namespace

int main(int argc, char** argv) {
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  std::vector<Criterion> criteria{
      {1, "variance-reduction formula matches full-refit differencing",
       criterion_variance_reduction},
      {2, "posterior variance at an appended point is bounded by its noise",
       criterion_appended_variance_bound},
      {3, "posterior moments match dense-inverse evaluation", criterion_dense_inverse},
      {4, "local identification: exact recovery, CI coverage, se scaling", criterion_varx},
      {5, "reference campaign completes with non-increasing volumes",
       criterion_reference_campaign},
      {6, "active selection beats random selection on paired seeds",
       criterion_active_beats_random},
      {7, "selection matches the exhaustive fine-grid argmax", criterion_selection_correctness},
      {8, "campaign outputs are byte-identical across reruns", criterion_determinism},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (only != 0 && criterion.number != only) {
      continue;
    }
    const auto start = Clock::now();
    std::ostringstream detail;
    bool threw = false;
    std::string error;
    try {
      criterion.body(detail);
    } catch (const std::exception& e) {
      threw = true;
      error = e.what();
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    const std::string text = detail.str();
    const bool failed = threw || text.rfind("FAIL:", 0) == 0;
    failures += failed;
    std::printf("[%s] %d %s (%.2f s)\n", failed ? "FAIL" : "PASS", criterion.number,
                criterion.title.c_str(), elapsed);
    if (threw) {
      std::printf("       exception: %s\n", error.c_str());
    } else if (!text.empty()) {
      std::printf("       %s\n", text.c_str());
    }
  }
  return failures;
}
