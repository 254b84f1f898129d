#include "spar/table.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "spar/io.hpp"

namespace spar {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return fields;
}

void write_table(const Table& table, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& c : table.comments) out << "# " << c << '\n';
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j > 0) out << ',';
    out << table.columns[j];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw std::logic_error("write_table: row width does not match header");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out << ',';
      out << format_double(row[j]);
    }
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open table: " + path.string());
  Table table;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = trim(line);
    if (trimmed.empty()) continue;
    if (trimmed.front() == '#') {
      table.comments.emplace_back(trimmed.substr(trimmed.size() > 1 && trimmed[1] == ' ' ? 2 : 1));
      continue;
    }
    const auto fields = split_csv_line(trimmed);
    if (!have_header) {
      for (const auto& f : fields) table.columns.emplace_back(f);
      have_header = true;
      continue;
    }
    if (fields.size() != table.columns.size()) {
      throw std::runtime_error("table " + path.string() + ": row " + std::to_string(line_no) +
                               " has " + std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(table.columns.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (fields[j].empty() || fields[j] == "nan") {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      try {
        row.push_back(parse_double(fields[j]));
      } catch (const std::exception&) {
        throw std::runtime_error("table " + path.string() + ": non-numeric cell at row " +
                                 std::to_string(line_no) + ", column '" + table.columns[j] + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::runtime_error("table " + path.string() + ": empty file");
  return table;
}

}  // namespace spar
