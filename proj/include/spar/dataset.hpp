#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "spar/preprocess.hpp"

namespace spar {

struct NanReport {
  std::size_t rows = 0;
  std::map<std::string, std::size_t> nan_counts;

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& [_, c] : nan_counts) t += c;
    return t;
  }
};

/// Columns of interest pulled out of a CSV file, in the requested order.
struct RawTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
  NanReport report;
};

/// Streaming CSV ingestion. Requires a header row naming every requested
/// column; unrequested columns (timestamps etc.) are ignored and row order
/// is preserved. Empty/"nan" cells parse to NaN and are tallied in the
/// report; any other non-numeric cell is rejected with row/column context.
RawTable ingest(const std::filesystem::path& path, const std::vector<std::string>& columns);

/// Header names of the five metocean inputs.
struct MetoceanColumns {
  std::string hs = "Hs";
  std::string tm = "Tm";
  std::string dir_wave = "DirWave";
  std::string u10 = "U10";
  std::string dir_wind = "DirWind";

  std::vector<std::string> all() const { return {hs, tm, dir_wave, u10, dir_wind}; }
};

/// Derived modelling variables in fixed order.
inline const std::vector<std::string>& metocean_derived_names() {
  static const std::vector<std::string> names = {"Ux", "Uy", "Hx", "Hy", "LT"};
  return names;
}

/// Directional components and log-period:
///   Ux = U10 cos(theta_wind), Uy = U10 sin(theta_wind),
///   Hx = Hs cos(theta_wave),  Hy = Hs sin(theta_wave),  LT = log(Tm),
/// with directions given in degrees clockwise from North ("going to") and
/// converted to radians for the trig. Rows with any NaN are dropped;
/// Tm <= 0 is rejected.
struct DerivedTable {
  Eigen::MatrixXd values;  // n x 5: Ux Uy Hx Hy LT
  std::size_t dropped_nan_rows = 0;
};

DerivedTable derive_components(const RawTable& raw, const MetoceanColumns& columns);

enum class OriginPolicy {
  physical,  // metocean: origin 0 for the four components, mean for LT
  mean,      // per-column mean origin
  zero,      // origin at 0 for every column
};

struct Normalized {
  Eigen::MatrixXd data;
  PreprocessSpec spec;
};

/// Scales each derived metocean column by its standard deviation after
/// removing the origin chosen by the policy. Zero-variance columns are
/// rejected.
Normalized normalize_metocean(const DerivedTable& derived,
                              OriginPolicy policy = OriginPolicy::physical);

/// Same affine normalization for generic numeric columns.
Normalized normalize_generic(const Eigen::MatrixXd& values, const std::vector<std::string>& names,
                             OriginPolicy policy = OriginPolicy::mean);

/// Inverts the affine part of the preprocessing (back to derived units).
Eigen::MatrixXd denormalize(const Eigen::MatrixXd& normalized, const PreprocessSpec& spec);

/// Raw physical variables recovered from derived metocean columns:
/// Hs, Tm, DirWave, U10, DirWind (degrees in [0, 360)), plus steepness.
struct MetoceanSample {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
};

MetoceanSample reconstruct_metocean(const Eigen::MatrixXd& derived);

/// Compass degrees in [0, 360) from x/y components.
double compass_degrees_from_components(double x, double y);

/// Wave steepness s = 2 pi Hs / (g Tm^2), g = 9.81 m/s^2.
double steepness(double hs, double tm);

struct SteepnessFilterResult {
  Eigen::MatrixXd kept;
  double removed_fraction = 0.0;
};

/// Drops rows whose steepness exceeds s_max.
SteepnessFilterResult filter_steepness(const MetoceanSample& sample, double s_max);

}  // namespace spar
