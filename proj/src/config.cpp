#include "spar/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spar/angular.hpp"
#include "spar/io.hpp"

namespace spar {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ',';
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

std::vector<double> RunConfig::kappa_grid() const {
  return default_kappa_grid(kappa_count, kappa_min, kappa_max);
}

std::vector<double> RunConfig::stability_zeta_grid() const {
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double z = stability_zeta_min + i * stability_zeta_step;
    if (z > stability_zeta_max + 1e-12) break;
    grid.push_back(z);
  }
  return grid;
}

std::vector<int> RunConfig::hidden_widths() const {
  return std::vector<int>(static_cast<std::size_t>(hidden_layers), hidden_width);
}

std::string dump_config(const RunConfig& c) {
  std::ostringstream os;
  os << "# spar run configuration\n";
  os << "data.input = " << c.input_path << "\n";
  os << "data.format = " << c.format << "\n";
  os << "data.col_hs = " << c.metocean_columns.hs << "\n";
  os << "data.col_tm = " << c.metocean_columns.tm << "\n";
  os << "data.col_dir_wave = " << c.metocean_columns.dir_wave << "\n";
  os << "data.col_u10 = " << c.metocean_columns.u10 << "\n";
  os << "data.col_dir_wind = " << c.metocean_columns.dir_wind << "\n";
  os << "data.generic_columns = " << join(c.generic_columns) << "\n";
  os << "preprocess.origin = " << c.origin << "\n";
  os << "preprocess.steepness_max = " << format_double(c.steepness_max) << "\n";
  os << "model.zeta = " << format_double(c.zeta) << "\n";
  os << "kde.kappa_count = " << c.kappa_count << "\n";
  os << "kde.kappa_min = " << format_double(c.kappa_min) << "\n";
  os << "kde.kappa_max = " << format_double(c.kappa_max) << "\n";
  os << "kde.m_pred = " << c.m_pred << "\n";
  os << "kde.k_exclude = " << c.k_exclude << "\n";
  os << "mlp.hidden_layers = " << c.hidden_layers << "\n";
  os << "mlp.hidden_width = " << c.hidden_width << "\n";
  os << "train.learning_rate = " << format_double(c.train.learning_rate) << "\n";
  os << "train.batch_size = " << c.train.batch_size << "\n";
  os << "train.max_epochs = " << c.train.max_epochs << "\n";
  os << "train.validation_fraction = " << format_double(c.train.validation_fraction) << "\n";
  os << "train.patience = " << c.train.patience << "\n";
  os << "train.restart_shrink = " << format_double(c.train.restart_shrink) << "\n";
  os << "train.max_restarts = " << c.train.max_restarts << "\n";
  os << "seed = " << c.seed << "\n";
  os << "simulate.multiplier = " << format_double(c.sim_multiplier) << "\n";
  os << "diagnostics.theta_max_deg = " << format_double(c.theta_max_deg) << "\n";
  os << "diagnostics.grid_m = " << c.grid_m << "\n";
  os << "diagnostics.downsample_stride = " << c.downsample_stride << "\n";
  os << "diagnostics.min_count = " << c.min_count << "\n";
  os << "diagnostics.bootstrap_replicates = " << c.bootstrap_replicates << "\n";
  os << "diagnostics.bootstrap_block_length = " << c.bootstrap_block_length << "\n";
  os << "diagnostics.bootstrap_enabled = " << (c.bootstrap_enabled ? "true" : "false") << "\n";
  os << "stability.zeta_min = " << format_double(c.stability_zeta_min) << "\n";
  os << "stability.zeta_max = " << format_double(c.stability_zeta_max) << "\n";
  os << "stability.zeta_step = " << format_double(c.stability_zeta_step) << "\n";
  os << "stability.quantile_level = " << format_double(c.quantile_level) << "\n";
  return os.str();
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    try {
      if (key == "data.input") c.input_path = value;
      else if (key == "data.format") c.format = value;
      else if (key == "data.col_hs") c.metocean_columns.hs = value;
      else if (key == "data.col_tm") c.metocean_columns.tm = value;
      else if (key == "data.col_dir_wave") c.metocean_columns.dir_wave = value;
      else if (key == "data.col_u10") c.metocean_columns.u10 = value;
      else if (key == "data.col_dir_wind") c.metocean_columns.dir_wind = value;
      else if (key == "data.generic_columns") c.generic_columns = split_list(value);
      else if (key == "preprocess.origin") c.origin = value;
      else if (key == "preprocess.steepness_max") c.steepness_max = parse_double(value);
      else if (key == "model.zeta") c.zeta = parse_double(value);
      else if (key == "kde.kappa_count") c.kappa_count = static_cast<std::size_t>(parse_long(value));
      else if (key == "kde.kappa_min") c.kappa_min = parse_double(value);
      else if (key == "kde.kappa_max") c.kappa_max = parse_double(value);
      else if (key == "kde.m_pred") c.m_pred = static_cast<std::size_t>(parse_long(value));
      else if (key == "kde.k_exclude") c.k_exclude = static_cast<std::size_t>(parse_long(value));
      else if (key == "mlp.hidden_layers") c.hidden_layers = static_cast<int>(parse_long(value));
      else if (key == "mlp.hidden_width") c.hidden_width = static_cast<int>(parse_long(value));
      else if (key == "train.learning_rate") c.train.learning_rate = parse_double(value);
      else if (key == "train.batch_size") c.train.batch_size = static_cast<int>(parse_long(value));
      else if (key == "train.max_epochs") c.train.max_epochs = static_cast<int>(parse_long(value));
      else if (key == "train.validation_fraction") c.train.validation_fraction = parse_double(value);
      else if (key == "train.patience") c.train.patience = static_cast<int>(parse_long(value));
      else if (key == "train.restart_shrink") c.train.restart_shrink = parse_double(value);
      else if (key == "train.max_restarts") c.train.max_restarts = static_cast<int>(parse_long(value));
      else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_long(value));
      else if (key == "simulate.multiplier") c.sim_multiplier = parse_double(value);
      else if (key == "diagnostics.theta_max_deg") c.theta_max_deg = parse_double(value);
      else if (key == "diagnostics.grid_m") c.grid_m = static_cast<int>(parse_long(value));
      else if (key == "diagnostics.downsample_stride") c.downsample_stride = static_cast<std::size_t>(parse_long(value));
      else if (key == "diagnostics.min_count") c.min_count = static_cast<std::size_t>(parse_long(value));
      else if (key == "diagnostics.bootstrap_replicates") c.bootstrap_replicates = static_cast<std::size_t>(parse_long(value));
      else if (key == "diagnostics.bootstrap_block_length") c.bootstrap_block_length = static_cast<std::size_t>(parse_long(value));
      else if (key == "diagnostics.bootstrap_enabled") c.bootstrap_enabled = value == "true" || value == "1";
      else if (key == "stability.zeta_min") c.stability_zeta_min = parse_double(value);
      else if (key == "stability.zeta_max") c.stability_zeta_max = parse_double(value);
      else if (key == "stability.zeta_step") c.stability_zeta_step = parse_double(value);
      else if (key == "stability.quantile_level") c.quantile_level = parse_double(value);
      else throw std::invalid_argument("unknown key");
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + " ('" + key +
                                  "'): " + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
  write_file_atomic(path, dump_config(config));
}

std::uint64_t config_hash(const RunConfig& config) {
  const std::string dump = dump_config(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace spar
