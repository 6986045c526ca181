#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace asymcast {

/// Rows are methods, columns are asymmetry levels (or any labelled axis).
/// Missing or undefined cells are empty optionals, written as "NA".
struct ResultsTable {
  std::string title;
  std::string row_header = "method";
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::vector<std::optional<double>>> cells;

  std::size_t row_index(std::string_view name) const;  // throws if absent
  bool has_row(std::string_view name) const;
  const std::vector<std::optional<double>>& row(std::string_view name) const;
  void add_row(std::string name, std::vector<std::optional<double>> values);

  bool operator==(const ResultsTable&) const = default;
};

/// Column labels "a=0.1", ... for a grid of asymmetry levels.
std::vector<std::string> level_columns(const std::vector<double>& a_grid);

/// Header row then one line per method; numbers in shortest round-trip form.
void write_table_csv(const ResultsTable& table, std::ostream& out);
/// Inverse of write_table_csv (the title is not stored in the CSV).
ResultsTable read_table_csv(std::istream& in);

/// Fixed-width rendering; `percent` appends '%' and uses two decimals.
std::string render_table(const ResultsTable& table, bool percent = false);

/// Writes `content` to `dir / name`, creating `dir`. Throws IoError.
void write_text_file(const std::filesystem::path& dir, const std::string& name,
                     const std::string& content);

}  // namespace asymcast
