#include "spar/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "spar/io.hpp"
#include "spar/table.hpp"

namespace spar {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kGravity = 9.81;

double deg_to_rad(double deg) { return deg * kPi / 180.0; }

Eigen::Index find_column(const MetoceanSample& sample, const std::string& name) {
  const auto it = std::find(sample.columns.begin(), sample.columns.end(), name);
  if (it == sample.columns.end()) {
    throw std::invalid_argument("missing column: " + name);
  }
  return static_cast<Eigen::Index>(it - sample.columns.begin());
}

}  // namespace

RawTable ingest(const std::filesystem::path& path, const std::vector<std::string>& columns) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path.string());

  std::string line;
  std::size_t line_no = 0;
  // header (skipping any leading comment block)
  std::vector<std::size_t> col_index;
  for (;;) {
    if (!std::getline(in, line)) throw std::runtime_error("empty data file: " + path.string());
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto header = split_csv_line(line);
    for (const auto& want : columns) {
      const auto it = std::find(header.begin(), header.end(), std::string_view(want));
      if (it == header.end()) {
        throw std::runtime_error(path.string() + ": missing column '" + want + "' in header");
      }
      col_index.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    break;
  }

  RawTable table;
  table.columns = columns;
  for (const auto& c : columns) table.report.nan_counts[c] = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (col_index[j] >= fields.size()) {
        throw std::runtime_error(path.string() + ": row " + std::to_string(line_no) +
                                 " is missing column '" + columns[j] + "'");
      }
      const auto field = fields[col_index[j]];
      if (field.empty() || field == "nan" || field == "NaN" || field == "NA") {
        row[j] = std::numeric_limits<double>::quiet_NaN();
        ++table.report.nan_counts[columns[j]];
        continue;
      }
      try {
        row[j] = parse_double(field);
      } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ": non-numeric cell at row " +
                                 std::to_string(line_no) + ", column '" + columns[j] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": no data rows");

  table.report.rows = rows.size();
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return table;
}

DerivedTable derive_components(const RawTable& raw, const MetoceanColumns& columns) {
  auto col_of = [&](const std::string& name) {
    const auto it = std::find(raw.columns.begin(), raw.columns.end(), name);
    if (it == raw.columns.end()) throw std::invalid_argument("derive_components: missing column " + name);
    return static_cast<Eigen::Index>(it - raw.columns.begin());
  };
  const Eigen::Index c_hs = col_of(columns.hs);
  const Eigen::Index c_tm = col_of(columns.tm);
  const Eigen::Index c_dw = col_of(columns.dir_wave);
  const Eigen::Index c_u10 = col_of(columns.u10);
  const Eigen::Index c_di = col_of(columns.dir_wind);

  DerivedTable out;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < raw.values.rows(); ++i) {
    if (raw.values.row(i).allFinite()) {
      keep.push_back(i);
    } else {
      ++out.dropped_nan_rows;
    }
  }

  out.values.resize(static_cast<Eigen::Index>(keep.size()), 5);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const Eigen::Index i = keep[k];
    const double hs = raw.values(i, c_hs);
    const double tm = raw.values(i, c_tm);
    const double u10 = raw.values(i, c_u10);
    if (!(tm > 0.0)) {
      throw std::invalid_argument("derive_components: Tm <= 0 at data row " + std::to_string(i) +
                                  " (log-period undefined)");
    }
    const double wave = deg_to_rad(raw.values(i, c_dw));
    const double wind = deg_to_rad(raw.values(i, c_di));
    const auto r = static_cast<Eigen::Index>(k);
    out.values(r, 0) = u10 * std::cos(wind);
    out.values(r, 1) = u10 * std::sin(wind);
    out.values(r, 2) = hs * std::cos(wave);
    out.values(r, 3) = hs * std::sin(wave);
    out.values(r, 4) = std::log(tm);
  }
  return out;
}

namespace {

Normalized normalize_impl(const Eigen::MatrixXd& values, const std::vector<std::string>& names,
                          const std::vector<double>& offsets, const std::string& recipe,
                          const std::vector<std::string>& roles,
                          const std::vector<std::string>& sources) {
  const Eigen::Index n = values.rows();
  const Eigen::Index k = values.cols();
  Normalized out;
  out.spec.recipe = recipe;
  out.data.resize(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::ArrayXd centred = values.col(j).array() - offsets[static_cast<std::size_t>(j)];
    const double sd = std::sqrt(
        (values.col(j).array() - values.col(j).mean()).square().sum() / static_cast<double>(n));
    if (!(sd > 0.0)) {
      throw std::invalid_argument("normalize: column '" + names[static_cast<std::size_t>(j)] +
                                  "' has zero variance");
    }
    out.data.col(j) = (centred / sd).matrix();
    ColumnSpec col;
    col.name = names[static_cast<std::size_t>(j)];
    col.role = roles[static_cast<std::size_t>(j)];
    col.source = sources[static_cast<std::size_t>(j)];
    col.scale = sd;
    col.offset = offsets[static_cast<std::size_t>(j)];
    out.spec.columns.push_back(std::move(col));
  }
  return out;
}

}  // namespace

Normalized normalize_metocean(const DerivedTable& derived, OriginPolicy policy) {
  const auto& names = metocean_derived_names();
  std::vector<double> offsets(5, 0.0);
  switch (policy) {
    case OriginPolicy::physical:
      // origin on the axis Hx = Hy = 0 (and Ux = Uy = 0); mean log-period
      offsets[4] = derived.values.col(4).mean();
      break;
    case OriginPolicy::mean:
      for (int j = 0; j < 5; ++j) offsets[static_cast<std::size_t>(j)] = derived.values.col(j).mean();
      break;
    case OriginPolicy::zero:
      break;
  }
  const std::vector<std::string> roles = {"component", "component", "component", "component", "log"};
  const std::vector<std::string> sources = {"U10,DirWind", "U10,DirWind", "Hs,DirWave",
                                            "Hs,DirWave", "Tm"};
  return normalize_impl(derived.values, names, offsets, "metocean", roles, sources);
}

Normalized normalize_generic(const Eigen::MatrixXd& values, const std::vector<std::string>& names,
                             OriginPolicy policy) {
  if (static_cast<std::size_t>(values.cols()) != names.size()) {
    throw std::invalid_argument("normalize_generic: name count mismatch");
  }
  std::vector<double> offsets(names.size(), 0.0);
  if (policy == OriginPolicy::mean) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      offsets[static_cast<std::size_t>(j)] = values.col(j).mean();
    }
  }
  std::vector<std::string> roles(names.size(), "plain");
  return normalize_impl(values, names, offsets, "generic", roles, names);
}

Eigen::MatrixXd denormalize(const Eigen::MatrixXd& normalized, const PreprocessSpec& spec) {
  if (static_cast<std::size_t>(normalized.cols()) != spec.columns.size()) {
    throw std::invalid_argument("denormalize: column count mismatch");
  }
  Eigen::MatrixXd out(normalized.rows(), normalized.cols());
  for (Eigen::Index j = 0; j < normalized.cols(); ++j) {
    const auto& col = spec.columns[static_cast<std::size_t>(j)];
    out.col(j) = (normalized.col(j).array() * col.scale + col.offset).matrix();
  }
  return out;
}

double compass_degrees_from_components(double x, double y) {
  double deg = std::atan2(y, x) * 180.0 / kPi;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

MetoceanSample reconstruct_metocean(const Eigen::MatrixXd& derived) {
  if (derived.cols() != 5) throw std::invalid_argument("reconstruct_metocean: expected 5 columns");
  MetoceanSample out;
  out.columns = {"Hs", "Tm", "DirWave", "U10", "DirWind", "Steepness"};
  out.values.resize(derived.rows(), 6);
  for (Eigen::Index i = 0; i < derived.rows(); ++i) {
    const double ux = derived(i, 0), uy = derived(i, 1);
    const double hx = derived(i, 2), hy = derived(i, 3);
    const double hs = std::hypot(hx, hy);
    const double tm = std::exp(derived(i, 4));
    out.values(i, 0) = hs;
    out.values(i, 1) = tm;
    out.values(i, 2) = compass_degrees_from_components(hx, hy);
    out.values(i, 3) = std::hypot(ux, uy);
    out.values(i, 4) = compass_degrees_from_components(ux, uy);
    out.values(i, 5) = steepness(hs, tm);
  }
  return out;
}

double steepness(double hs, double tm) {
  if (!(tm > 0.0)) throw std::invalid_argument("steepness: Tm must be > 0");
  return 2.0 * kPi * hs / (kGravity * tm * tm);
}

SteepnessFilterResult filter_steepness(const MetoceanSample& sample, double s_max) {
  const Eigen::Index c_s = find_column(sample, "Steepness");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < sample.values.rows(); ++i) {
    if (!(sample.values(i, c_s) > s_max)) keep.push_back(i);
  }
  SteepnessFilterResult out;
  out.kept.resize(static_cast<Eigen::Index>(keep.size()), sample.values.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.kept.row(static_cast<Eigen::Index>(k)) = sample.values.row(keep[k]);
  }
  out.removed_fraction =
      1.0 - static_cast<double>(keep.size()) / static_cast<double>(sample.values.rows());
  return out;
}

}  // namespace spar
