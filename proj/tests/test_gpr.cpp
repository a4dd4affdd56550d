#include "gprlpv/gpr.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace gprlpv;
using testutil::random_dataset;
using testutil::random_kernel;
using testutil::vec;

namespace {

/// Dense-inverse oracle: posterior mean/variance straight from the textbook
/// formulas, no Cholesky, no caching.
GprPosterior::Prediction dense_oracle(const GprDataset& data,
                                      const SquaredExponentialKernel& kernel, double prior_mean,
                                      const OperatingPoint& target) {
  Eigen::MatrixXd big_k = gram_matrix(kernel, data.points, data.points);
  big_k.diagonal() += data.noise_sd.array().square().matrix();
  const Eigen::MatrixXd inv = big_k.inverse();
  const Eigen::VectorXd k_star = gram_vector(kernel, data.points, target);
  const Eigen::VectorXd centered = data.labels.array() - prior_mean;
  GprPosterior::Prediction out;
  out.mean = prior_mean + k_star.dot(inv * centered);
  out.variance = kernel.variance() - k_star.dot(inv * k_star);
  return out;
}

}  // namespace

TEST_CASE("fit on an empty dataset yields the prior") {
  const SquaredExponentialKernel kernel(2.0, vec({0.5, 0.5}));
  const auto post = GprPosterior::fit(GprDataset{}, kernel, PriorMean{0.3});
  for (double x : {0.0, 0.7, -2.0}) {
    const auto pred = post.predict(vec({x, -x}));
    CHECK(pred.mean == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(pred.variance == doctest::Approx(4.0).epsilon(1e-15));
  }
}

TEST_CASE("single noise-free observation is interpolated exactly") {
  GprDataset data;
  data.points.resize(1, 2);
  data.points << 0.4, 0.6;
  data.labels = vec({1.25});
  data.noise_sd = vec({0.0});
  const auto post =
      GprPosterior::fit(data, SquaredExponentialKernel(2.0, vec({0.3, 0.3})), PriorMean{0.0});
  const auto pred = post.predict(vec({0.4, 0.6}));
  CHECK(std::abs(pred.mean - 1.25) <= 1e-10);
  CHECK(pred.variance <= 1e-10);
  CHECK(pred.variance >= 0.0);
}

TEST_CASE("two noisy observations match a hand-rolled 2x2 solve") {
  GprDataset data;
  data.points.resize(2, 1);
  data.points << 0.2, 0.9;
  data.labels = vec({1.0, -0.5});
  data.noise_sd = vec({0.3, 0.1});
  const SquaredExponentialKernel kernel(1.5, vec({0.4}));
  const PriorMean mean{0.2};
  const auto post = GprPosterior::fit(data, kernel, mean);

  // Explicit 2x2 inverse of K + Sigma.
  const double k11 = kernel.variance() + 0.09;
  const double k22 = kernel.variance() + 0.01;
  const double k12 = kernel(vec({0.2}), vec({0.9}));
  const double det = k11 * k22 - k12 * k12;
  const auto target = vec({0.5});
  const double ks1 = kernel(target, vec({0.2}));
  const double ks2 = kernel(target, vec({0.9}));
  const double f1 = 1.0 - 0.2;
  const double f2 = -0.5 - 0.2;
  const double w1 = (k22 * f1 - k12 * f2) / det;
  const double w2 = (-k12 * f1 + k11 * f2) / det;
  const double mean_oracle = 0.2 + ks1 * w1 + ks2 * w2;
  const double q1 = (k22 * ks1 - k12 * ks2) / det;
  const double q2 = (-k12 * ks1 + k11 * ks2) / det;
  const double var_oracle = kernel.variance() - (ks1 * q1 + ks2 * q2);

  const auto pred = post.predict(target);
  CHECK(pred.mean == doctest::Approx(mean_oracle).epsilon(1e-12));
  CHECK(pred.variance == doctest::Approx(var_oracle).epsilon(1e-12));
}

TEST_CASE("prediction far from all data reverts to the prior") {
  std::mt19937_64 rng(3);
  auto data = random_dataset(6, 2, rng, 0.05, 0.3);
  const SquaredExponentialKernel kernel(1.8, vec({0.01, 0.01}));
  const auto post = GprPosterior::fit(data, kernel, PriorMean{0.4});
  const auto pred = post.predict(vec({30.0, -30.0}));
  CHECK(std::abs(pred.mean - 0.4) <= 1e-6);
  CHECK(std::abs(pred.variance - kernel.variance()) <= 1e-6);
}

TEST_CASE("predict matches the dense-inverse oracle on random datasets") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 3;
    const auto data = random_dataset(5, d, rng, 0.05, 0.4);
    const auto kernel = random_kernel(d, rng);
    const PriorMean mean{0.1};
    const auto post = GprPosterior::fit(data, kernel, mean);
    const auto target = testutil::random_point(
        OperatingBox(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)), rng);
    const auto got = post.predict(target);
    const auto want = dense_oracle(data, kernel, mean.constant, target);
    CHECK(std::abs(got.mean - want.mean) <=
          1e-8 * std::max({1.0, std::abs(got.mean), std::abs(want.mean)}));
    CHECK(std::abs(got.variance - want.variance) <=
          1e-8 * std::max({1.0, got.variance, std::abs(want.variance)}));
  }
}

TEST_CASE("variance reduction vanishes for an uninformative observation") {
  std::mt19937_64 rng(23);
  const auto data = random_dataset(4, 2, rng, 0.0, 0.3);
  const auto post =
      GprPosterior::fit(data, SquaredExponentialKernel(2.0, vec({0.5, 0.5})), PriorMean{});
  const double reduction =
      post.variance_reduction(vec({0.5, 0.5}), 1e12, vec({0.4, 0.4}));
  CHECK(reduction >= 0.0);
  CHECK(reduction <= 1e-12);
}

TEST_CASE("variance reduction from the prior at the queried point is sigma^2") {
  const SquaredExponentialKernel kernel(1.7, vec({0.25, 0.25}));
  const auto post = GprPosterior::fit(GprDataset{}, kernel, PriorMean{});
  const auto point = vec({0.3, 0.8});
  CHECK(post.variance_reduction(point, 0.0, point) ==
        doctest::Approx(kernel.variance()).epsilon(1e-14));
}

TEST_CASE("variance reduction equals full-refit differencing") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 1 + trial % 3;
    const int m = 1 + trial % 8;
    const auto data = random_dataset(m, d, rng, 0.01, 0.5);
    const auto kernel = random_kernel(d, rng);
    const auto post = GprPosterior::fit(data, kernel, PriorMean{});
    Eigen::VectorXd next(d), target(d);
    for (int k = 0; k < d; ++k) {
      next(k) = unit(rng);
      target(k) = unit(rng);
    }
    const double next_se = 0.4 * unit(rng);

    const double reduction = post.variance_reduction(next, next_se, target);
    const double before = post.predict(target).variance;
    const double after = post.append_observation(next, 0.0, next_se).predict(target).variance;
    const double diff = before - after;
    const double tol = 1e-8 * std::max(std::abs(reduction), std::abs(diff)) +
                       1e-12 * kernel.variance();
    CHECK(std::abs(reduction - diff) <= tol);
  }
}

TEST_CASE("variance reduction rejects a degenerate Schur complement") {
  GprDataset data;
  data.points.resize(1, 1);
  data.points << 0.5;
  data.labels = vec({1.0});
  data.noise_sd = vec({0.0});
  const auto post =
      GprPosterior::fit(data, SquaredExponentialKernel(1.0, vec({0.2})), PriorMean{});
  // Duplicating the noise-free point with zero standard error leaves no new
  // information; the Schur complement collapses.
  CHECK_THROWS_AS(post.variance_reduction(vec({0.5}), 0.0, vec({0.5})),
                  NumericalDegeneracyError);
}

TEST_CASE("append then predict at the new noise-free point has zero variance") {
  std::mt19937_64 rng(31);
  const auto data = random_dataset(3, 2, rng, 0.1, 0.3);
  const auto post =
      GprPosterior::fit(data, SquaredExponentialKernel(1.0, vec({0.3, 0.3})), PriorMean{});
  const auto grown = post.append_observation(vec({0.42, 0.17}), 0.9, 0.0);
  CHECK(grown.predict(vec({0.42, 0.17})).variance <= 1e-10);
}

TEST_CASE("append agrees with a full refit on a probe grid") {
  std::mt19937_64 rng(37);
  const auto data = random_dataset(5, 2, rng, 0.05, 0.4);
  const auto kernel = random_kernel(2, rng);
  const PriorMean mean{0.25};
  const auto post = GprPosterior::fit(data, kernel, mean);
  const auto point = vec({0.6, 0.3});
  const auto appended = post.append_observation(point, -0.4, 0.2);
  const auto refit = GprPosterior::fit(data.appended(point, -0.4, 0.2), kernel, mean);
  for (int i = 0; i < 10; ++i) {
    const auto probe = vec({0.1 * i, 1.0 - 0.1 * i});
    const auto a = appended.predict(probe);
    const auto b = refit.predict(probe);
    CHECK(std::abs(a.variance - b.variance) <= 1e-10);
    CHECK(std::abs(a.mean - b.mean) <= 1e-10);
  }
}

TEST_CASE("appending an essentially infinite-noise observation changes nothing") {
  std::mt19937_64 rng(41);
  const auto data = random_dataset(4, 2, rng, 0.05, 0.4);
  const auto post =
      GprPosterior::fit(data, SquaredExponentialKernel(1.5, vec({0.4, 0.4})), PriorMean{});
  const auto grown = post.append_observation(vec({0.5, 0.5}), 123.0, 1e12);
  for (int i = 0; i < 10; ++i) {
    const auto probe = vec({0.05 + 0.09 * i, 0.95 - 0.09 * i});
    const auto a = post.predict(probe);
    const auto b = grown.predict(probe);
    CHECK(std::abs(a.mean - b.mean) <= 1e-9);
    CHECK(std::abs(a.variance - b.variance) <= 1e-9);
  }
}

TEST_CASE("posterior variance never increases under append") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 2;
    const auto data = random_dataset(3 + trial % 5, d, rng, 0.0, 0.4);
    const auto kernel = random_kernel(d, rng);
    const auto post = GprPosterior::fit(data, kernel, PriorMean{});
    Eigen::VectorXd next(d);
    for (int k = 0; k < d; ++k) {
      next(k) = unit(rng);
    }
    const auto grown = post.append_observation(next, unit(rng), 0.05 + 0.4 * unit(rng));
    for (int i = 0; i < 8; ++i) {
      Eigen::VectorXd probe(d);
      for (int k = 0; k < d; ++k) {
        probe(k) = unit(rng);
      }
      CHECK(grown.predict(probe).variance <= post.predict(probe).variance + 1e-10);
    }
  }
}

TEST_CASE("posterior variance at the appended point is bounded by its noise variance") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 3;
    const auto data = random_dataset(1 + trial % 10, d, rng, 0.01, 0.5);
    const auto kernel = random_kernel(d, rng);
    const auto post = GprPosterior::fit(data, kernel, PriorMean{});
    Eigen::VectorXd next(d);
    for (int k = 0; k < d; ++k) {
      next(k) = unit(rng);
    }
    const double se = 0.5 * unit(rng);
    const auto grown = post.append_observation(next, unit(rng), se);
    CHECK(grown.predict(next).variance <= se * se + 1e-10);
  }
}

TEST_CASE("predict mean is invariant under dataset permutation") {
  std::mt19937_64 rng(53);
  const auto data = random_dataset(7, 2, rng, 0.05, 0.4);
  const auto kernel = random_kernel(2, rng);
  const PriorMean mean{0.1};
  const auto post = GprPosterior::fit(data, kernel, mean);

  std::vector<int> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  GprDataset shuffled;
  shuffled.points.resize(7, 2);
  shuffled.labels.resize(7);
  shuffled.noise_sd.resize(7);
  for (int i = 0; i < 7; ++i) {
    shuffled.points.row(i) = data.points.row(perm[i]);
    shuffled.labels(i) = data.labels(perm[i]);
    shuffled.noise_sd(i) = data.noise_sd(perm[i]);
  }
  const auto post2 = GprPosterior::fit(shuffled, kernel, mean);
  for (int i = 0; i < 10; ++i) {
    const auto probe = vec({0.1 * i, 0.03 * i});
    CHECK(std::abs(post.predict(probe).mean - post2.predict(probe).mean) <= 1e-10);
    CHECK(std::abs(post.predict(probe).variance - post2.predict(probe).variance) <= 1e-10);
  }
}

TEST_CASE("noise-free posterior interpolates every training label") {
  std::mt19937_64 rng(59);
  auto data = random_dataset(6, 2, rng, 0.0, 0.0);
  const auto post =
      GprPosterior::fit(data, SquaredExponentialKernel(1.0, vec({0.5, 0.5})), PriorMean{0.2});
  for (int i = 0; i < data.size(); ++i) {
    const auto pred = post.predict(data.points.row(i).transpose());
    CHECK(std::abs(pred.mean - data.labels(i)) <= 1e-8);
  }
}

TEST_CASE("factor reconstructs the gram matrix") {
  std::mt19937_64 rng(61);
  const auto data = random_dataset(6, 2, rng, 0.05, 0.4);
  const auto kernel = random_kernel(2, rng);
  const auto post = GprPosterior::fit(data, kernel, PriorMean{});
  Eigen::MatrixXd gram = gram_matrix(kernel, data.points, data.points);
  gram.diagonal() += data.noise_sd.array().square().matrix();
  gram.diagonal().array() += post.jitter();
  const Eigen::MatrixXd l = post.factor();
  CHECK((l * l.transpose() - gram).cwiseAbs().maxCoeff() <= 1e-10 * kernel.variance());
}

TEST_CASE("coincident noise-free points are rejected with the offending pair") {
  GprDataset data;
  data.points.resize(3, 2);
  data.points << 0.1, 0.2, 0.5, 0.5, 0.1, 0.2;
  data.labels = vec({1.0, 2.0, 3.0});
  data.noise_sd = vec({0.0, 0.1, 0.0});
  try {
    GprPosterior::fit(data, SquaredExponentialKernel(1.0, vec({0.3, 0.3})), PriorMean{});
    FAIL("expected SingularGramError");
  } catch (const SingularGramError& e) {
    CHECK(e.point_a == 0);
    CHECK(e.point_b == 2);
  }

  // The same pair duplicated via append is rejected too.
  GprDataset ok;
  ok.points.resize(1, 2);
  ok.points << 0.1, 0.2;
  ok.labels = vec({1.0});
  ok.noise_sd = vec({0.0});
  const auto post =
      GprPosterior::fit(ok, SquaredExponentialKernel(1.0, vec({0.3, 0.3})), PriorMean{});
  CHECK_THROWS_AS(post.append_observation(vec({0.1, 0.2}), 2.0, 0.0), SingularGramError);
}

TEST_CASE("dataset validation catches inconsistent or invalid fields") {
  GprDataset data;
  data.points.resize(2, 1);
  data.points << 0.0, 1.0;
  data.labels = vec({1.0});
  data.noise_sd = vec({0.1, 0.1});
  CHECK_THROWS_AS(data.validate(), DimensionError);
  data.labels = vec({1.0, 2.0});
  data.noise_sd = vec({0.1, -0.1});
  CHECK_THROWS_AS(data.validate(), ValidationError);
}
