#pragma once

#include "gprlpv/plant.hpp"
#include "gprlpv/selection.hpp"

#include <vector>

namespace gprlpv {

/// Experiment source for campaigns: given an operating point, an experiment
/// length, and a seed, produce one local dataset. Implementations wrap the
/// synthetic plant here; lab data enters through the importer instead.
struct ExperimentRunner {
  virtual ~ExperimentRunner() = default;
  virtual TimeSeriesData run(const OperatingPoint& theta, int length,
                             std::uint64_t seed) const = 0;
};

/// Multisine-excited simulation of a synthetic plant.
struct SimulatedRunner : ExperimentRunner {
  SyntheticLpvPlant plant;
  MultisineConfig input;

  SimulatedRunner(SyntheticLpvPlant plant_, MultisineConfig input_)
      : plant(std::move(plant_)), input(input_) {}

  TimeSeriesData run(const OperatingPoint& theta, int length, std::uint64_t seed) const override;
};

struct CampaignEntry {
  int iteration = 0;          // 0 = initial model, before any active selection
  OperatingPoint theta;       // empty at iteration 0
  double volume = 0.0;        // uncertainty volume after this iteration's append
  double duration_seconds = 0.0;  // wall clock; diagnostics only, not deterministic
};

struct CampaignRecord {
  std::vector<CampaignEntry> entries;  // budget + 1 entries including iteration 0
};

struct CampaignSettings {
  SelectionConfig selection;
  std::vector<int> volume_resolution;
  int experiment_length = 1000;
  int threads = 1;
};

struct CampaignResult {
  GprLpvModel model;
  CampaignRecord record;
  std::vector<TimeSeriesData> new_datasets;   // experiments run during the campaign, in order
  std::vector<std::uint64_t> new_seeds;       // the per-experiment seeds used for them
};

/// Greedy sequential active learning: identify local models once for the
/// initial datasets, then repeatedly select the maximizer of the uncertainty
/// criterion, run one experiment there, and append it. Experiment seeds are
/// derived from the master seed with stream indices continuing after the
/// initial experiments. Failures carry the iteration index.
CampaignResult greedy_campaign(const std::vector<TimeSeriesData>& initial_datasets,
                               const ExperimentRunner& runner, int budget,
                               const OperatingBox& box, const HyperConfig& hyper,
                               const CampaignSettings& settings, std::uint64_t seed);

}  // namespace gprlpv
