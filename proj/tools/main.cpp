// Command-line front end: every campaign stage is independently invocable
// so lab data can be pushed through the same pipeline as the simulator.

#include "gprlpv/config.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace gprlpv;

Eigen::VectorXd parse_reals(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string field;
  while (std::getline(in, field, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(field, &used));
      if (used != field.size()) {
        throw std::invalid_argument(field);
      }
    } catch (const std::exception&) {
      throw ValidationError(what + ": not a number: \"" + field + "\"");
    }
  }
  if (values.empty()) {
    throw ValidationError(what + ": empty list");
  }
  Eigen::VectorXd out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = values[i];
  }
  return out;
}

std::vector<int> parse_ints(const std::string& text, const std::string& what) {
  const Eigen::VectorXd reals = parse_reals(text, what);
  std::vector<int> out;
  for (Eigen::Index i = 0; i < reals.size(); ++i) {
    const int v = static_cast<int>(reals(i));
    if (static_cast<double>(v) != reals(i)) {
      throw ValidationError(what + ": expected integers");
    }
    out.push_back(v);
  }
  return out;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SingularGramError*>(&e) ||
      dynamic_cast<const NumericalDegeneracyError*>(&e) ||
      dynamic_cast<const PersistencyError*>(&e) ||
      dynamic_cast<const InsufficientDataError*>(&e) ||
      dynamic_cast<const CampaignError*>(&e)) {
    return 3;
  }
  return 2;
}

void print_matrix(const std::string& name, const Eigen::MatrixXd& m) {
  std::cout << name << ":\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::cout << (j ? " " : "  ") << format_double(m(i, j));
    }
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active learning for LPV system identification"};
  app.require_subcommand(1);

  int threads = 1;
  app.add_option("--threads", threads, "Cap on compute threads")->check(CLI::PositiveNumber);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run one synthetic experiment and write a dataset");
  std::string sim_plant, sim_theta, sim_out;
  int sim_length = 1000;
  std::uint64_t sim_seed = 0;
  int sim_harmonics = 5;
  double sim_amplitude = 1.0;
  double sim_slew = 0.0;
  sim->add_option("--plant", sim_plant, "Plant description file")->required();
  sim->add_option("--theta", sim_theta, "Operating point, comma separated")->required();
  sim->add_option("--length", sim_length, "Samples to record")->required();
  sim->add_option("--seed", sim_seed, "Experiment seed")->required();
  sim->add_option("--out", sim_out, "Output dataset path (.csv)")->required();
  sim->add_option("--harmonics", sim_harmonics, "Multisine harmonics per channel");
  sim->add_option("--amplitude", sim_amplitude, "Multisine amplitude");
  sim->add_option("--slew-limit", sim_slew, "Max per-step input change (0 = none)");

  // identify
  auto* ident = app.add_subcommand("identify", "Fit a local linear model to one dataset");
  std::string ident_data;
  ident->add_option("--data", ident_data, "Dataset path (.csv)")->required();

  // build-model
  auto* build = app.add_subcommand("build-model", "Fit a GPR-LPV model to datasets");
  std::vector<std::string> build_data;
  std::string build_lower, build_upper, build_scales, build_out;
  double build_sigma_factor = 2.0, build_sigma_floor = 1e-6, build_prior_a = 0.8;
  build->add_option("--data", build_data, "Dataset paths (.csv)")->required()->expected(-1);
  build->add_option("--box-lower", build_lower, "Box lower corner, comma separated")->required();
  build->add_option("--box-upper", build_upper, "Box upper corner, comma separated")->required();
  build->add_option("--length-scales", build_scales, "Kernel length scales per coordinate")
      ->required();
  build->add_option("--sigma-factor", build_sigma_factor, "Signal-std factor on the max se");
  build->add_option("--sigma-floor", build_sigma_floor, "Signal-std floor");
  build->add_option("--prior-a-diag", build_prior_a, "Prior mean of diagonal A elements");
  build->add_option("--out", build_out, "Output model path (.json)")->required();

  // select-next
  auto* select = app.add_subcommand("select-next", "Maximize the uncertainty criterion");
  std::string select_model, select_grid = "41,41";
  int select_steps = 2;
  double select_shrink = 0.5, select_tie = 0.0;
  select->add_option("--model", select_model, "Model path (.json)")->required();
  select->add_option("--grid", select_grid, "Scan resolution per dimension");
  select->add_option("--refinement-steps", select_steps, "Polish passes");
  select->add_option("--refinement-shrink", select_shrink, "Polish window shrink factor");
  select->add_option("--tie-tolerance", select_tie, "Tie window for the scan maximum");

  // volume
  auto* vol = app.add_subcommand("volume", "Integrate the uncertainty criterion over the box");
  std::string vol_model, vol_res = "50,50";
  vol->add_option("--model", vol_model, "Model path (.json)")->required();
  vol->add_option("--resolution", vol_res, "Quadrature cells per dimension");

  // campaign
  auto* camp = app.add_subcommand("campaign", "Run a full active-learning campaign");
  std::string camp_config;
  std::uint64_t camp_seed = 0;
  bool camp_seed_set = false;
  camp->add_option("--config", camp_config, "Campaign config path (.json)")->required();
  camp->add_option("--seed", camp_seed, "Override the config seed")
      ->each([&](const std::string&) { camp_seed_set = true; });

  // export-surface
  auto* surf = app.add_subcommand("export-surface", "Export g or an element surface on a grid");
  std::string surf_model, surf_res = "101,101", surf_out, surf_element;
  surf->add_option("--model", surf_model, "Model path (.json)")->required();
  surf->add_option("--resolution", surf_res, "Grid points per dimension");
  surf->add_option("--out", surf_out, "Output table path (.csv)")->required();
  surf->add_option("--element", surf_element, "Element key such as a_1_1 (default: g)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const SyntheticLpvPlant plant = load_plant(sim_plant);
      const OperatingPoint theta = parse_reals(sim_theta, "--theta");
      MultisineConfig input;
      input.harmonics = sim_harmonics;
      input.amplitude = sim_amplitude;
      if (sim_slew > 0.0) {
        input.slew_limit = sim_slew;
      }
      const Eigen::MatrixXd u = multisine_input(plant.input_dim, sim_length, input,
                                                derive_seed(sim_seed, 0));
      const TimeSeriesData data =
          simulate_experiment(plant, theta, u, derive_seed(sim_seed, 1));
      write_dataset(data, sim_out, sim_seed);
      std::cout << "wrote " << sim_out << " (" << data.sample_count() << " samples)\n";
      return 0;
    }
    if (*ident) {
      const TimeSeriesData data = read_dataset(ident_data);
      const auto check = check_persistency_of_excitation(data);
      if (!check.ok) {
        std::cerr << "warning: excitation check failed (smallest singular value "
                  << check.smallest_singular_value << ")\n";
      }
      const LocalModelEstimate est = identify_local_model(data);
      std::cout << "theta: " << est.operating_point.transpose() << "\n";
      print_matrix("A_hat", est.a_hat);
      print_matrix("B_hat", est.b_hat);
      print_matrix("A_se", est.a_se);
      print_matrix("B_se", est.b_se);
      print_matrix("residual_cov", est.residual_cov);
      return 0;
    }
    if (*build) {
      const OperatingBox box(parse_reals(build_lower, "--box-lower"),
                             parse_reals(build_upper, "--box-upper"));
      HyperConfig hyper;
      hyper.length_scales = parse_reals(build_scales, "--length-scales");
      hyper.sigma_factor = build_sigma_factor;
      hyper.sigma_floor = build_sigma_floor;
      hyper.prior_a_diag = build_prior_a;
      std::vector<LocalModelEstimate> estimates;
      for (const auto& imported : import_external_datasets(build_data)) {
        if (!imported.excitation_ok) {
          std::cerr << "warning: " << build_data[estimates.size()]
                    << " fails the excitation check (smallest singular value "
                    << imported.smallest_singular_value << ")\n";
        }
        estimates.push_back(identify_local_model(imported.data));
      }
      const GprLpvModel model = GprLpvModel::build(estimates, box, hyper);
      save_model(model, build_out);
      std::cout << "wrote " << build_out << " (" << model.element_count() << " element GPs, "
                << model.experiment_count() << " experiments)\n";
      return 0;
    }
    if (*select) {
      const GprLpvModel model = load_model(select_model);
      SelectionConfig cfg;
      cfg.grid_resolution = parse_ints(select_grid, "--grid");
      cfg.refinement_steps = select_steps;
      cfg.refinement_shrink = select_shrink;
      cfg.tie_tolerance = select_tie;
      const SelectionResult result = select_next_operating_point(model, cfg, threads);
      std::cout << "theta_next:";
      for (Eigen::Index k = 0; k < result.theta.size(); ++k) {
        std::cout << " " << format_double(result.theta(k));
      }
      std::cout << "\ng: " << format_double(result.g_value) << "\n";
      return 0;
    }
    if (*vol) {
      const GprLpvModel model = load_model(vol_model);
      const double volume =
          uncertainty_volume(model, parse_ints(vol_res, "--resolution"), threads);
      std::cout << "volume: " << format_double(volume) << "\n";
      return 0;
    }
    if (*camp) {
      RunOverrides overrides;
      if (camp_seed_set) {
        overrides.seed = camp_seed;
      }
      if (app.count("--threads") > 0) {
        overrides.threads = threads;
      }
      return run_campaign(camp_config, overrides);
    }
    if (*surf) {
      const GprLpvModel model = load_model(surf_model);
      export_surface(model, parse_ints(surf_res, "--resolution"), surf_out, surf_element,
                     threads);
      std::cout << "wrote " << surf_out << "\n";
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what();
    if (e.line >= 0) {
      std::cerr << " (line " << e.line;
      if (e.column >= 0) {
        std::cerr << ", column " << e.column;
      }
      std::cerr << ")";
    }
    std::cerr << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
