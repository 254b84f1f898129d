#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace spar {

/// Numeric CSV table with named columns and a leading '#' comment block
/// (used for provenance: producing command, seed, config hash). Values are
/// written in shortest round-trip form, so emit/ingest loses nothing.
struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::initializer_list<double> values) { rows.emplace_back(values); }
};

/// Splits one CSV line on commas, trimming surrounding whitespace. No
/// quoting: field values must not contain commas.
std::vector<std::string_view> split_csv_line(std::string_view line);

void write_table(const Table& table, const std::filesystem::path& path);

/// Reads a table written by write_table (or any plain numeric CSV with a
/// header row); '#' lines are skipped. Empty fields and "nan" parse to NaN.
Table read_table(const std::filesystem::path& path);

}  // namespace spar
