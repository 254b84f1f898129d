#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spar/dataset.hpp"
#include "spar/nnet.hpp"

namespace spar {

/// Everything a run needs, serialized as 'key = value' lines with '#'
/// comments. `config init` dumps the defaults below; values cited from the
/// shipped defaults are pinned by the acceptance suite.
struct RunConfig {
  // data
  std::string input_path;
  std::string format = "metocean";  // metocean | generic
  MetoceanColumns metocean_columns;
  std::vector<std::string> generic_columns;
  std::string origin = "physical";  // physical | mean | zero

  double zeta = 0.1;

  // kde bandwidth search
  std::size_t kappa_count = 50;
  double kappa_min = 10.0;
  double kappa_max = 10000.0;
  std::size_t m_pred = 1000;
  std::size_t k_exclude = 48;

  // network architecture
  int hidden_layers = 3;
  int hidden_width = 16;

  TrainConfig train;

  std::uint64_t seed = 1;

  // simulation
  double sim_multiplier = 100.0;

  // diagnostics
  double theta_max_deg = 15.0;
  int grid_m = 5;
  std::size_t downsample_stride = 24;
  std::size_t min_count = 200;
  std::size_t bootstrap_replicates = 200;
  std::size_t bootstrap_block_length = 96;  // four days of hourly data
  bool bootstrap_enabled = false;

  // threshold stability sweep
  double stability_zeta_min = 0.0125;
  double stability_zeta_max = 0.25;
  double stability_zeta_step = 0.0125;
  double quantile_level = 1e-6;

  // preprocessing
  double steepness_max = 0.1;

  std::vector<double> kappa_grid() const;
  std::vector<double> stability_zeta_grid() const;
  std::vector<int> hidden_widths() const;
};

std::string dump_config(const RunConfig& config);
RunConfig parse_config(const std::string& text);

RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& config, const std::filesystem::path& path);

/// FNV-1a hash of the canonical dump, recorded in output-table provenance.
std::uint64_t config_hash(const RunConfig& config);

}  // namespace spar
