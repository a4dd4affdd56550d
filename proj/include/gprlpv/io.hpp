#pragma once

#include "gprlpv/campaign.hpp"

#include <string>
#include <vector>

namespace gprlpv {

/// Formats a double with 17 significant digits so text round-trips exactly.
std::string format_double(double value);

/// Writes the dataset as a comma-separated table (header k,x1..xn,u1..um)
/// plus a sidecar metadata document holding theta, T, seed, and units. The
/// sidecar path replaces a trailing ".csv" with ".meta.json".
void write_dataset(const TimeSeriesData& data, const std::string& csv_path, std::uint64_t seed,
                   const std::string& units = "normalized");

/// Reads a dataset written by write_dataset; read(write(data)) == data.
TimeSeriesData read_dataset(const std::string& csv_path);

struct ImportedDataset {
  TimeSeriesData data;
  bool excitation_ok = false;
  double smallest_singular_value = 0.0;
};

/// Reads external datasets and runs the excitation check eagerly; datasets
/// failing it are still returned, flagged.
std::vector<ImportedDataset> import_external_datasets(const std::vector<std::string>& paths);

/// Record table: iteration,theta_1..theta_d,volume. Deterministic for a
/// fixed seed; wall-clock durations go to the separate timings table.
void write_record(const CampaignRecord& record, int sched_dim, const std::string& path);
void write_timings(const CampaignRecord& record, const std::string& path);

/// Serialized GPR-LPV model: element datasets, hyperparameters, box; the
/// format is versioned and round-trip stable.
void save_model(const GprLpvModel& model, const std::string& path);
GprLpvModel load_model(const std::string& path);

/// Plant files come in two forms: explicit coefficient blocks, or a
/// generator description (dimensions, box, margin, noise_std, seed) that is
/// materialized on load. save_plant always writes the explicit form.
void save_plant(const SyntheticLpvPlant& plant, const std::string& path);
SyntheticLpvPlant load_plant(const std::string& path);

/// Writes a (res1 x res2)-row table over the box (2-D models only). With an
/// empty element key the column is the uncertainty criterion g; with a key
/// such as "a_1_1" the columns are that element's posterior mean and
/// variance.
void export_surface(const GprLpvModel& model, const std::vector<int>& resolution,
                    const std::string& out_path, const std::string& element_key = "",
                    int threads = 1);

}  // namespace gprlpv
