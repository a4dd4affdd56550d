#include "gprlpv/campaign.hpp"

#include <chrono>
#include <sstream>
#include <utility>

namespace gprlpv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

TimeSeriesData SimulatedRunner::run(const OperatingPoint& theta, int length,
                                    std::uint64_t seed) const {
  const Eigen::MatrixXd u =
      multisine_input(plant.input_dim, length, input, derive_seed(seed, 0));
  return simulate_experiment(plant, theta, u, derive_seed(seed, 1));
}

CampaignResult greedy_campaign(const std::vector<TimeSeriesData>& initial_datasets,
                               const ExperimentRunner& runner, int budget,
                               const OperatingBox& box, const HyperConfig& hyper,
                               const CampaignSettings& settings, std::uint64_t seed) {
  if (budget < 0) {
    throw ValidationError("campaign: budget must be >= 0");
  }
  if (initial_datasets.empty()) {
    throw ValidationError("campaign: need at least one initial dataset");
  }
  settings.selection.validate(box.dim());

  CampaignResult result;
  const auto start0 = Clock::now();
  std::vector<LocalModelEstimate> estimates;
  estimates.reserve(initial_datasets.size());
  try {
    for (const auto& data : initial_datasets) {
      estimates.push_back(identify_local_model(data));
    }
    result.model = GprLpvModel::build(estimates, box, hyper);
  } catch (const std::exception& e) {
    throw CampaignError(std::string("iteration 0: ") + e.what(), 0);
  }
  CampaignEntry first;
  first.iteration = 0;
  first.volume =
      uncertainty_volume(result.model, settings.volume_resolution, settings.threads);
  first.duration_seconds = seconds_since(start0);
  result.record.entries.push_back(std::move(first));

  const std::uint64_t stream_base = initial_datasets.size();
  for (int iter = 1; iter <= budget; ++iter) {
    const auto start = Clock::now();
    try {
      const SelectionResult sel =
          select_next_operating_point(result.model, settings.selection, settings.threads);
      const std::uint64_t experiment_seed = derive_seed(seed, stream_base + iter - 1);
      TimeSeriesData data = runner.run(sel.theta, settings.experiment_length, experiment_seed);
      const LocalModelEstimate estimate = identify_local_model(data);
      result.model = result.model.append_experiment(estimate);
      result.new_datasets.push_back(std::move(data));
      result.new_seeds.push_back(experiment_seed);

      CampaignEntry entry;
      entry.iteration = iter;
      entry.theta = sel.theta;
      entry.volume =
          uncertainty_volume(result.model, settings.volume_resolution, settings.threads);
      entry.duration_seconds = seconds_since(start);
      result.record.entries.push_back(std::move(entry));
    } catch (const CampaignError&) {
      throw;
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "iteration " << iter << ": " << e.what();
      throw CampaignError(msg.str(), iter);
    }
  }
  return result;
}

}  // namespace gprlpv
