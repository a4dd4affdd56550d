#pragma once

#include "gprlpv/io.hpp"

#include <optional>
#include <string>

namespace gprlpv {

/// Fully resolved campaign description. Initial data comes either from the
/// synthetic plant at the listed operating points or from external dataset
/// files; a plant is required whenever new experiments must be run.
struct CampaignConfig {
  bool has_plant = false;
  SyntheticLpvPlant plant;
  std::vector<std::string> initial_dataset_paths;
  std::vector<OperatingPoint> initial_points;
  OperatingBox box;
  HyperConfig hyper;
  CampaignSettings settings;
  MultisineConfig input;
  int budget = 0;
  std::uint64_t seed = 0;
  std::string output_dir;
};

/// Parses and validates a campaign config document. Unknown keys are
/// rejected; referenced paths must exist; numeric fields are range-checked.
/// Throws ParseError (with line/column) or ValidationError.
CampaignConfig load_campaign_config(const std::string& path);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

/// Runs a full campaign from a config file and writes all artifacts
/// (datasets, record table, timings, resolved plant, final model) to the
/// configured output directory. Returns the process exit status: 0 on
/// success, 2 on config/parse errors, 3 on numerical failures.
int run_campaign(const std::string& config_path, const RunOverrides& overrides = {});

}  // namespace gprlpv
