#include "asymcast/report.hpp"

#include "asymcast/errors.hpp"
#include "asymcast/text.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace asymcast {

std::size_t ResultsTable::row_index(std::string_view name) const {
  const auto it = std::find(rows.begin(), rows.end(), name);
  if (it == rows.end()) throw InvalidInputError("results table has no row '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - rows.begin());
}

bool ResultsTable::has_row(std::string_view name) const {
  return std::find(rows.begin(), rows.end(), name) != rows.end();
}

const std::vector<std::optional<double>>& ResultsTable::row(std::string_view name) const {
  return cells[row_index(name)];
}

void ResultsTable::add_row(std::string name, std::vector<std::optional<double>> values) {
  if (values.size() != columns.size()) {
    throw InvalidInputError("results table row '" + name + "' has " +
                            std::to_string(values.size()) + " cells, expected " +
                            std::to_string(columns.size()));
  }
  rows.push_back(std::move(name));
  cells.push_back(std::move(values));
}

std::vector<std::string> level_columns(const std::vector<double>& a_grid) {
  std::vector<std::string> out;
  for (double a : a_grid) out.push_back("a=" + text::format_double(a));
  return out;
}

void write_table_csv(const ResultsTable& table, std::ostream& out) {
  out << table.row_header;
  for (const auto& c : table.columns) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << table.rows[r];
    for (const auto& cell : table.cells[r]) out << ',' << (cell ? text::format_double(*cell) : "NA");
    out << '\n';
  }
}

ResultsTable read_table_csv(std::istream& in) {
  ResultsTable table;
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("results table: empty input", 0);
  auto header = text::split_list(line, ',');
  if (header.empty()) throw IngestionError("results table: empty header", 1);
  table.row_header = header.front();
  table.columns.assign(header.begin() + 1, header.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto fields = text::split_list(line, ',');
    if (fields.size() != header.size()) {
      throw IngestionError("results table: expected " + std::to_string(header.size()) + " fields", line_no);
    }
    std::vector<std::optional<double>> values;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (fields[i] == "NA") {
        values.emplace_back();
        continue;
      }
      const auto v = text::parse_double(fields[i]);
      if (!v) throw IngestionError("results table: bad number '" + fields[i] + "'", line_no);
      values.emplace_back(*v);
    }
    table.add_row(fields.front(), std::move(values));
  }
  return table;
}

std::string render_table(const ResultsTable& table, bool percent) {
  auto fmt = [&](const std::optional<double>& v) -> std::string {
    if (!v) return "NA";
    if (percent) return text::format_fixed(*v, 2) + "%";
    std::ostringstream s;
    s.precision(6);
    s << *v;
    return s.str();
  };
  std::size_t first = table.row_header.size();
  for (const auto& r : table.rows) first = std::max(first, r.size());
  std::vector<std::size_t> width(table.columns.size());
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    width[c] = table.columns[c].size();
    for (const auto& row : table.cells) width[c] = std::max(width[c], fmt(row[c]).size());
  }
  std::ostringstream out;
  if (!table.title.empty()) out << table.title << '\n';
  auto pad_right = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
  auto pad_left = [](const std::string& s, std::size_t w) { return std::string(w - s.size(), ' ') + s; };
  out << pad_right(table.row_header, first);
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << "  " << pad_left(table.columns[c], width[c]);
  out << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << pad_right(table.rows[r], first);
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      out << "  " << pad_left(fmt(table.cells[r][c]), width[c]);
    }
    out << '\n';
  }
  return out.str();
}

void write_text_file(const std::filesystem::path& dir, const std::string& name,
                     const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace asymcast
