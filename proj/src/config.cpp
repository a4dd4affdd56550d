#include "gprlpv/config.hpp"

#include "json_util.hpp"

#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

namespace gprlpv {

namespace fs = std::filesystem;
using detail::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ValidationError("config: unknown key \"" + item.key() + "\" in " + context);
    }
  }
}

void require_exists(const std::string& path) {
  if (!fs::exists(path)) {
    throw ValidationError("config: referenced path does not exist: " + path);
  }
}

std::vector<int> int_list_from_json(const json& j, const std::string& context) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError(context + ": expected a non-empty integer array");
  }
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) {
      throw ValidationError(context + ": expected integers");
    }
    out.push_back(v.get<int>());
  }
  return out;
}

std::vector<OperatingPoint> resolve_initial_points(const json& j, const OperatingBox& box,
                                                   const std::string& context) {
  std::vector<OperatingPoint> points;
  if (j.is_object()) {
    check_keys(j, {"grid"}, context);
    const auto counts = int_list_from_json(j.at("grid"), context + ".grid");
    if (static_cast<int>(counts.size()) != box.dim()) {
      throw ValidationError(context + ".grid: need one count per theta coordinate");
    }
    for (int c : counts) {
      if (c < 2) {
        throw ValidationError(context + ".grid: counts must be >= 2");
      }
    }
    long total = 1;
    for (int c : counts) {
      total *= c;
    }
    OperatingPoint theta(box.dim());
    for (long idx = 0; idx < total; ++idx) {
      long rem = idx;
      for (int k = box.dim() - 1; k >= 0; --k) {
        const long i = rem % counts[k];
        rem /= counts[k];
        theta(k) = box.lower(k) + (box.upper(k) - box.lower(k)) * i / (counts[k] - 1);
      }
      points.push_back(theta);
    }
  } else if (j.is_array()) {
    for (const auto& row : j) {
      const OperatingPoint theta = detail::vector_from_json(row, context);
      if (theta.size() != box.dim()) {
        throw ValidationError(context + ": point dimension does not match box");
      }
      points.push_back(theta);
    }
  } else {
    throw ValidationError(context + ": expected {\"grid\": [...]} or an array of points");
  }
  for (const auto& theta : points) {
    if (!box.contains(theta)) {
      throw ValidationError(context + ": initial point outside the box");
    }
  }
  return points;
}

}  // namespace

CampaignConfig load_campaign_config(const std::string& path) {
  const json j = detail::load_json_file(path);
  if (!j.is_object()) {
    throw ValidationError(path + ": expected a top-level object");
  }
  check_keys(j,
             {"format_version", "plant", "plant_path", "initial_dataset_paths", "box", "kernel",
              "prior", "reresolve_sigma", "selection", "volume_resolution", "initial_points",
              "budget", "experiment_length", "seed", "input", "output_dir", "threads"},
             "top level");
  if (!j.contains("format_version") || !j.at("format_version").is_number_integer() ||
      j.at("format_version").get<int>() != detail::kFormatVersion) {
    throw ValidationError(path + ": format_version must be " +
                          std::to_string(detail::kFormatVersion));
  }

  CampaignConfig cfg;

  if (j.contains("plant") && j.contains("plant_path")) {
    throw ValidationError("config: give either plant or plant_path, not both");
  }
  if (j.contains("plant")) {
    cfg.plant = detail::plant_from_json(j.at("plant"), path + ":plant");
    cfg.has_plant = true;
  } else if (j.contains("plant_path")) {
    const auto plant_path = j.at("plant_path").get<std::string>();
    require_exists(plant_path);
    cfg.plant = load_plant(plant_path);
    cfg.has_plant = true;
  }

  if (j.contains("box")) {
    cfg.box = detail::box_from_json(j.at("box"), path + ":box");
    if (cfg.has_plant &&
        (cfg.box.dim() != cfg.plant.sched_dim ||
         (cfg.box.lower.array() != cfg.plant.box.lower.array()).any() ||
         (cfg.box.upper.array() != cfg.plant.box.upper.array()).any())) {
      throw ValidationError("config: box disagrees with the plant's box");
    }
  } else if (cfg.has_plant) {
    cfg.box = cfg.plant.box;
  } else {
    throw ValidationError("config: box is required when no plant is given");
  }

  const json& kernel = j.at("kernel");
  check_keys(kernel, {"length_scales", "sigma_factor", "sigma_floor"}, "kernel");
  cfg.hyper.length_scales =
      detail::vector_from_json(kernel.at("length_scales"), path + ":kernel.length_scales");
  cfg.hyper.sigma_factor = kernel.value("sigma_factor", 2.0);
  cfg.hyper.sigma_floor = kernel.value("sigma_floor", 1e-6);
  if (j.contains("prior")) {
    const json& prior = j.at("prior");
    check_keys(prior, {"a_diag"}, "prior");
    cfg.hyper.prior_a_diag = prior.value("a_diag", 0.8);
  }
  cfg.hyper.reresolve_sigma_on_append = j.value("reresolve_sigma", false);
  cfg.hyper.validate(cfg.box.dim());

  const json& selection = j.at("selection");
  check_keys(selection,
             {"grid_resolution", "refinement_steps", "refinement_shrink", "tie_tolerance"},
             "selection");
  cfg.settings.selection.grid_resolution =
      int_list_from_json(selection.at("grid_resolution"), path + ":selection.grid_resolution");
  cfg.settings.selection.refinement_steps = selection.value("refinement_steps", 2);
  cfg.settings.selection.refinement_shrink = selection.value("refinement_shrink", 0.5);
  cfg.settings.selection.tie_tolerance = selection.value("tie_tolerance", 0.0);
  cfg.settings.selection.validate(cfg.box.dim());

  cfg.settings.volume_resolution =
      int_list_from_json(j.at("volume_resolution"), path + ":volume_resolution");
  if (static_cast<int>(cfg.settings.volume_resolution.size()) != cfg.box.dim()) {
    throw ValidationError("config: volume_resolution needs one entry per theta coordinate");
  }
  for (int r : cfg.settings.volume_resolution) {
    if (r < 2) {
      throw ValidationError("config: volume_resolution entries must be >= 2");
    }
  }

  if (!j.contains("budget") || !j.at("budget").is_number_integer() ||
      j.at("budget").get<int>() < 0) {
    throw ValidationError("config: budget must be a non-negative integer");
  }
  cfg.budget = j.at("budget").get<int>();

  if (!j.contains("seed") || !j.at("seed").is_number_unsigned()) {
    throw ValidationError("config: seed must be a non-negative integer");
  }
  cfg.seed = j.at("seed").get<std::uint64_t>();

  cfg.settings.experiment_length = j.value("experiment_length", 1000);
  if (cfg.settings.experiment_length < 4) {
    throw ValidationError("config: experiment_length is too small");
  }
  if (cfg.has_plant &&
      cfg.settings.experiment_length < cfg.plant.state_dim + cfg.plant.input_dim + 2) {
    throw ValidationError("config: experiment_length below the identification minimum");
  }

  if (j.contains("input")) {
    const json& input = j.at("input");
    check_keys(input, {"harmonics", "amplitude", "base_period", "slew_limit"}, "input");
    cfg.input.harmonics = input.value("harmonics", 5);
    cfg.input.amplitude = input.value("amplitude", 1.0);
    cfg.input.base_period = input.value("base_period", 256);
    if (cfg.input.base_period < 2) {
      throw ValidationError("config: input base_period must be at least 2");
    }
    if (input.contains("slew_limit") && !input.at("slew_limit").is_null()) {
      cfg.input.slew_limit = input.at("slew_limit").get<double>();
      if (!(*cfg.input.slew_limit > 0.0)) {
        throw ValidationError("config: slew_limit must be positive or null");
      }
    }
    if (cfg.input.harmonics < 0 || cfg.input.amplitude < 0.0) {
      throw ValidationError("config: input harmonics and amplitude must be non-negative");
    }
  }

  const bool has_points = j.contains("initial_points");
  const bool has_files = j.contains("initial_dataset_paths");
  if (has_points == has_files) {
    throw ValidationError("config: give exactly one of initial_points or initial_dataset_paths");
  }
  if (has_points) {
    if (!cfg.has_plant) {
      throw ValidationError("config: initial_points requires a plant to simulate");
    }
    cfg.initial_points =
        resolve_initial_points(j.at("initial_points"), cfg.box, "initial_points");
    if (cfg.initial_points.empty()) {
      throw ValidationError("config: need at least one initial point");
    }
  } else {
    for (const auto& p : j.at("initial_dataset_paths")) {
      if (!p.is_string()) {
        throw ValidationError("config: initial_dataset_paths must be strings");
      }
      cfg.initial_dataset_paths.push_back(p.get<std::string>());
      require_exists(cfg.initial_dataset_paths.back());
    }
    if (cfg.initial_dataset_paths.empty()) {
      throw ValidationError("config: need at least one initial dataset");
    }
  }
  if (cfg.budget > 0 && !cfg.has_plant) {
    throw ValidationError("config: a plant is required to run new experiments (budget > 0)");
  }

  if (!j.contains("output_dir") || !j.at("output_dir").is_string() ||
      j.at("output_dir").get<std::string>().empty()) {
    throw ValidationError("config: output_dir is required");
  }
  cfg.output_dir = j.at("output_dir").get<std::string>();

  cfg.settings.threads = j.value("threads", 1);
  if (cfg.settings.threads < 1) {
    throw ValidationError("config: threads must be >= 1");
  }
  return cfg;
}

namespace {

std::string dataset_path(const std::string& dir, int index) {
  char name[32];
  std::snprintf(name, sizeof(name), "dataset_%03d.csv", index);
  return (fs::path(dir) / name).string();
}

}  // namespace

int run_campaign(const std::string& config_path, const RunOverrides& overrides) {
  CampaignConfig cfg;
  try {
    cfg = load_campaign_config(config_path);
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what();
    if (e.line >= 0) {
      std::cerr << " (line " << e.line << ", column " << e.column << ")";
    }
    std::cerr << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (overrides.seed) {
    cfg.seed = *overrides.seed;
  }
  if (overrides.threads) {
    cfg.settings.threads = *overrides.threads;
  }

  try {
    fs::create_directories(cfg.output_dir);

    std::vector<TimeSeriesData> initial;
    int file_index = 0;
    if (!cfg.initial_dataset_paths.empty()) {
      for (const auto& imported : import_external_datasets(cfg.initial_dataset_paths)) {
        if (!imported.excitation_ok) {
          std::cerr << "warning: dataset at index " << file_index
                    << " fails the excitation check (smallest singular value "
                    << imported.smallest_singular_value << ")\n";
        }
        initial.push_back(imported.data);
        ++file_index;
      }
      file_index = 0;
    } else {
      for (std::size_t i = 0; i < cfg.initial_points.size(); ++i) {
        const std::uint64_t experiment_seed = derive_seed(cfg.seed, i);
        const Eigen::MatrixXd u =
            multisine_input(cfg.plant.input_dim, cfg.settings.experiment_length, cfg.input,
                            derive_seed(experiment_seed, 0));
        TimeSeriesData data = simulate_experiment(cfg.plant, cfg.initial_points[i], u,
                                                  derive_seed(experiment_seed, 1));
        write_dataset(data, dataset_path(cfg.output_dir, file_index), experiment_seed);
        ++file_index;
        initial.push_back(std::move(data));
      }
    }
    if (cfg.has_plant) {
      save_plant(cfg.plant, (fs::path(cfg.output_dir) / "plant.json").string());
    }

    CampaignResult result;
    if (cfg.has_plant) {
      const SimulatedRunner runner(cfg.plant, cfg.input);
      result = greedy_campaign(initial, runner, cfg.budget, cfg.box, cfg.hyper, cfg.settings,
                               cfg.seed);
    } else {
      // No plant: budget is 0, run the degenerate campaign with a runner
      // that must never be called.
      struct NoRunner : ExperimentRunner {
        TimeSeriesData run(const OperatingPoint&, int, std::uint64_t) const override {
          throw ValidationError("no plant available to run experiments");
        }
      };
      result = greedy_campaign(initial, NoRunner{}, cfg.budget, cfg.box, cfg.hyper, cfg.settings,
                               cfg.seed);
    }

    for (std::size_t i = 0; i < result.new_datasets.size(); ++i) {
      write_dataset(result.new_datasets[i], dataset_path(cfg.output_dir, file_index),
                    result.new_seeds[i]);
      ++file_index;
    }
    write_record(result.record, cfg.box.dim(),
                 (fs::path(cfg.output_dir) / "record.csv").string());
    write_timings(result.record, (fs::path(cfg.output_dir) / "timings.csv").string());
    save_model(result.model, (fs::path(cfg.output_dir) / "model.json").string());
    return 0;
  } catch (const CampaignError& e) {
    std::cerr << "campaign failed at iteration " << e.iteration << ": " << e.what() << "\n";
    return 3;
  } catch (const SingularGramError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const NumericalDegeneracyError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const PersistencyError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const InsufficientDataError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace gprlpv
