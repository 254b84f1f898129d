#pragma once

#include <string>
#include <vector>

namespace spar {

/// One normalized model column: how it was derived and the affine map
/// (value - offset) / scale that produced it. Roles:
///   "component" - x or y component of a magnitude/direction pair
///   "log"       - log-transformed raw column
///   "plain"     - raw column used as-is
struct ColumnSpec {
  std::string name;
  std::string role = "plain";
  std::string source;  // raw column(s) behind this one, e.g. "U10,theta_wind"
  double scale = 1.0;
  double offset = 0.0;
};

/// Invertible record of the preprocessing that produced the normalized
/// sample: recipe is "metocean" for the five-variable derivation,
/// "generic" for per-column affine normalization, or "none".
struct PreprocessSpec {
  std::string recipe = "none";
  std::vector<ColumnSpec> columns;

  bool operator==(const PreprocessSpec&) const = default;
};

inline bool operator==(const ColumnSpec& a, const ColumnSpec& b) {
  return a.name == b.name && a.role == b.role && a.source == b.source && a.scale == b.scale &&
         a.offset == b.offset;
}

}  // namespace spar
