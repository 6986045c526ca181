#include "asymcast/dataset.hpp"

#include "asymcast/errors.hpp"
#include "asymcast/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace asymcast {

namespace {

constexpr double kTargetMax = 1.5;

std::string_view column_type_name(ColumnType t) {
  switch (t) {
    case ColumnType::Numeric: return "numeric";
    case ColumnType::Categorical: return "categorical";
    case ColumnType::Target: return "target";
  }
  return "numeric";
}

// Splits one CSV record. Double quotes may wrap a field; "" inside quotes is
// a literal quote. Returns false on an unterminated quote.
bool split_record(std::string_view line, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(text::trim(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) return false;
  fields.emplace_back(text::trim(field));
  return true;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void hash_bytes(std::uint64_t& h, const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

std::string_view partition_name(Partition p) noexcept {
  switch (p) {
    case Partition::Source: return "source";
    case Partition::Ats: return "ats";
    case Partition::Validation: return "validation";
    case Partition::Test: return "test";
    case Partition::FullTrain: return "full_train";
  }
  return "source";
}

bool CategoricalMap::is_dummy(std::size_t feature_column) const {
  for (const auto& c : columns) {
    if (std::find(c.dummy_columns.begin(), c.dummy_columns.end(), feature_column) !=
        c.dummy_columns.end()) {
      return true;
    }
  }
  return false;
}

const std::string& CategoricalMap::decode(const Matrix& features, Eigen::Index row,
                                          std::size_t which) const {
  const auto& col = columns.at(which);
  for (std::size_t d = 0; d < col.dummy_columns.size(); ++d) {
    if (features(row, static_cast<Eigen::Index>(col.dummy_columns[d])) != 0.0) {
      return col.levels[d + 1];
    }
  }
  return col.levels.front();
}

void Dataset::validate() const {
  if (features.rows() < 1 || features.cols() < 1) {
    throw InvalidInputError("dataset must have at least one row and one feature column");
  }
  if (target.size() != features.rows()) {
    throw InvalidInputError("dataset target length does not match feature rows");
  }
  if (feature_names.size() != cols()) {
    throw InvalidInputError("dataset has " + std::to_string(feature_names.size()) +
                            " feature names for " + std::to_string(cols()) + " columns");
  }
  if (row_ids.size() != rows()) {
    throw InvalidInputError("dataset row ids do not match row count");
  }
  if (!features.allFinite()) throw InvalidInputError("dataset features contain NaN or infinity");
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    const double t = target[i];
    if (!(std::isfinite(t) && t > 0.0 && t <= kTargetMax)) {
      throw InvalidInputError("target value " + text::format_double(t) + " at row " +
                              std::to_string(i) + " is outside (0, 1.5]");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices, Partition p) const {
  Dataset out;
  const auto n = static_cast<Eigen::Index>(indices.size());
  out.features.resize(n, features.cols());
  out.target.resize(n);
  out.row_ids.reserve(indices.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto src = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(i)]);
    out.features.row(i) = features.row(src);
    out.target[i] = target[src];
    out.row_ids.push_back(row_ids[static_cast<std::size_t>(src)]);
  }
  out.feature_names = feature_names;
  out.categorical_map = categorical_map;
  out.partition = p;
  return out;
}

Dataset concat(const Dataset& first, const Dataset& second, Partition partition) {
  if (first.feature_names != second.feature_names) {
    throw InvalidInputError("concat: datasets have different columns");
  }
  Dataset out;
  out.features.resize(first.features.rows() + second.features.rows(), first.features.cols());
  out.features << first.features, second.features;
  out.target.resize(first.target.size() + second.target.size());
  out.target << first.target, second.target;
  out.feature_names = first.feature_names;
  out.categorical_map = first.categorical_map;
  out.row_ids = first.row_ids;
  out.row_ids.insert(out.row_ids.end(), second.row_ids.begin(), second.row_ids.end());
  out.partition = partition;
  return out;
}

Schema Schema::parse(std::string_view text_block) {
  Schema schema;
  std::size_t line_no = 0;
  int targets = 0;
  std::istringstream in{std::string(text_block)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = text::trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = text::trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw IngestionError("schema line " + std::to_string(line_no) + ": expected name:type", 0);
    }
    ColumnSpec spec;
    spec.name = std::string(text::trim(line.substr(0, colon)));
    std::string_view type = text::trim(line.substr(colon + 1));
    std::string_view levels;
    if (const auto eq = type.find('='); eq != std::string_view::npos) {
      levels = text::trim(type.substr(eq + 1));
      type = text::trim(type.substr(0, eq));
    }
    const std::string t = text::lower(type);
    if (t == "numeric") spec.type = ColumnType::Numeric;
    else if (t == "categorical") spec.type = ColumnType::Categorical;
    else if (t == "target") spec.type = ColumnType::Target;
    else {
      throw IngestionError("schema line " + std::to_string(line_no) + ": unknown type '" +
                               std::string(type) + "'", 0);
    }
    if (!levels.empty()) {
      if (spec.type != ColumnType::Categorical) {
        throw IngestionError("schema line " + std::to_string(line_no) +
                                 ": levels are only allowed on categorical columns", 0);
      }
      spec.levels = text::split_list(levels, '|');
    }
    if (spec.name.empty()) {
      throw IngestionError("schema line " + std::to_string(line_no) + ": empty column name", 0);
    }
    if (spec.type == ColumnType::Target) ++targets;
    schema.columns.push_back(std::move(spec));
  }
  if (targets != 1) throw IngestionError("schema must name exactly one target column", 0);
  return schema;
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open schema file " + path.string(), 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string Schema::to_text() const {
  std::string out;
  for (const auto& c : columns) {
    out += c.name;
    out += ':';
    out += column_type_name(c.type);
    if (!c.levels.empty()) {
      out += '=';
      for (std::size_t i = 0; i < c.levels.size(); ++i) {
        if (i) out += '|';
        out += c.levels[i];
      }
    }
    out += '\n';
  }
  return out;
}

const ColumnSpec& Schema::target() const {
  for (const auto& c : columns) {
    if (c.type == ColumnType::Target) return c;
  }
  throw IngestionError("schema has no target column", 0);
}

Dataset read_csv(std::istream& in, const Schema& schema) {
  std::string line;
  std::vector<std::string> fields;
  std::size_t line_no = 0;

  // Header.
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && std::memcmp(line.data(), "\xEF\xBB\xBF", 3) == 0) {
      line.erase(0, 3);  // UTF-8 BOM
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    have_header = true;
    break;
  }
  if (!have_header) throw IngestionError("CSV input is empty", 0);
  if (!split_record(line, fields)) throw IngestionError("unterminated quote in header", line_no);
  if (fields.size() != schema.columns.size()) {
    throw IngestionError("header has " + std::to_string(fields.size()) + " columns, schema has " +
                             std::to_string(schema.columns.size()), line_no);
  }
  for (std::size_t c = 0; c < fields.size(); ++c) {
    if (fields[c] != schema.columns[c].name) {
      throw IngestionError("header column " + std::to_string(c + 1) + " is '" + fields[c] +
                               "', schema expects '" + schema.columns[c].name + "'", line_no);
    }
  }

  // Body: numeric cells parsed now, categorical labels kept as strings.
  const std::size_t ncols = schema.columns.size();
  std::vector<std::vector<double>> numeric(ncols);
  std::vector<std::vector<std::string>> labels(ncols);
  std::size_t nrows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (!split_record(line, fields)) throw IngestionError("unterminated quote", line_no);
    if (fields.size() != ncols) {
      throw IngestionError("expected " + std::to_string(ncols) + " fields, found " +
                               std::to_string(fields.size()), line_no);
    }
    for (std::size_t c = 0; c < ncols; ++c) {
      const auto& spec = schema.columns[c];
      if (spec.type == ColumnType::Categorical) {
        if (fields[c].empty()) {
          throw IngestionError("empty value in categorical column '" + spec.name + "'", line_no);
        }
        if (!spec.levels.empty() &&
            std::find(spec.levels.begin(), spec.levels.end(), fields[c]) == spec.levels.end()) {
          throw IngestionError("unknown category '" + fields[c] + "' in column '" + spec.name +
                                   "'", line_no);
        }
        labels[c].push_back(fields[c]);
      } else {
        const auto v = text::parse_double(fields[c]);
        if (!v || !std::isfinite(*v)) {
          throw IngestionError("non-numeric value '" + fields[c] + "' in column '" + spec.name +
                                   "'", line_no);
        }
        if (spec.type == ColumnType::Target && !(*v > 0.0 && *v <= kTargetMax)) {
          throw IngestionError("target " + fields[c] + " outside (0, 1.5]", line_no);
        }
        numeric[c].push_back(*v);
      }
    }
    ++nrows;
  }
  if (nrows == 0) throw IngestionError("CSV contains a header but no data rows", line_no);

  // Encode.
  Dataset out;
  for (std::size_t c = 0; c < ncols; ++c) {
    const auto& spec = schema.columns[c];
    if (spec.type == ColumnType::Target) continue;
    if (spec.type == ColumnType::Numeric) {
      out.feature_names.push_back(spec.name);
      continue;
    }
    CategoricalColumn cat;
    cat.name = spec.name;
    if (!spec.levels.empty()) {
      cat.levels = spec.levels;
    } else {
      cat.levels = labels[c];
      std::sort(cat.levels.begin(), cat.levels.end());
      cat.levels.erase(std::unique(cat.levels.begin(), cat.levels.end()), cat.levels.end());
    }
    for (std::size_t l = 1; l < cat.levels.size(); ++l) {
      cat.dummy_columns.push_back(out.feature_names.size());
      out.feature_names.push_back(spec.name + "=" + cat.levels[l]);
    }
    out.categorical_map.columns.push_back(std::move(cat));
  }
  if (out.feature_names.empty()) throw IngestionError("schema yields no feature columns", 0);

  out.features = Matrix::Zero(static_cast<Eigen::Index>(nrows),
                              static_cast<Eigen::Index>(out.feature_names.size()));
  out.target.resize(static_cast<Eigen::Index>(nrows));
  std::size_t feature = 0;
  std::size_t cat_index = 0;
  for (std::size_t c = 0; c < ncols; ++c) {
    const auto& spec = schema.columns[c];
    if (spec.type == ColumnType::Target) {
      for (std::size_t r = 0; r < nrows; ++r) out.target[static_cast<Eigen::Index>(r)] = numeric[c][r];
    } else if (spec.type == ColumnType::Numeric) {
      for (std::size_t r = 0; r < nrows; ++r) {
        out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(feature)) = numeric[c][r];
      }
      ++feature;
    } else {
      const auto& cat = out.categorical_map.columns[cat_index++];
      for (std::size_t r = 0; r < nrows; ++r) {
        const auto it = std::find(cat.levels.begin(), cat.levels.end(), labels[c][r]);
        const auto level = static_cast<std::size_t>(it - cat.levels.begin());
        if (level > 0) {
          out.features(static_cast<Eigen::Index>(r),
                       static_cast<Eigen::Index>(cat.dummy_columns[level - 1])) = 1.0;
        }
      }
      feature += cat.dummy_columns.size();
    }
  }
  out.row_ids.resize(nrows);
  for (std::size_t r = 0; r < nrows; ++r) out.row_ids[r] = r;

  return out;
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open CSV file " + path.string(), 0);
  return read_csv(in, schema);
}

Schema write_csv(const Dataset& data, std::ostream& out, std::string_view target_name) {
  Schema schema;
  // Each output column is either a numeric feature index or a categorical index.
  struct OutCol {
    bool categorical;
    std::size_t index;
  };
  std::vector<OutCol> plan;
  for (std::size_t f = 0; f < data.cols(); ++f) {
    bool handled = false;
    for (std::size_t c = 0; c < data.categorical_map.columns.size(); ++c) {
      const auto& cat = data.categorical_map.columns[c];
      const auto& d = cat.dummy_columns;
      if (std::find(d.begin(), d.end(), f) == d.end()) continue;
      handled = true;
      if (d.front() == f) {
        plan.push_back({true, c});
        schema.columns.push_back({cat.name, ColumnType::Categorical, cat.levels});
      }
    }
    if (!handled) {
      plan.push_back({false, f});
      schema.columns.push_back({data.feature_names[f], ColumnType::Numeric, {}});
    }
  }
  schema.columns.push_back({std::string(target_name), ColumnType::Target, {}});

  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (c) out << ',';
    out << quote_if_needed(schema.columns[c].name);
  }
  out << '\n';
  for (Eigen::Index r = 0; r < data.features.rows(); ++r) {
    for (const auto& col : plan) {
      if (col.categorical) {
        out << quote_if_needed(data.categorical_map.decode(data.features, r, col.index));
      } else {
        out << text::format_double(data.features(r, static_cast<Eigen::Index>(col.index)));
      }
      out << ',';
    }
    out << text::format_double(data.target[r]) << '\n';
  }
  if (!out) throw IoError("failed while writing CSV output");
  return schema;
}

Schema write_csv(const Dataset& data, const std::filesystem::path& path,
                 std::string_view target_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return write_csv(data, out, target_name);
}

std::uint64_t dataset_hash(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::uint64_t shape[2] = {data.rows(), data.cols()};
  hash_bytes(h, shape, sizeof(shape));
  for (const auto& name : data.feature_names) hash_bytes(h, name.data(), name.size() + 1);
  // Column-major storage; hash element by element so padding never matters.
  for (Eigen::Index c = 0; c < data.features.cols(); ++c) {
    for (Eigen::Index r = 0; r < data.features.rows(); ++r) {
      const double v = data.features(r, c);
      hash_bytes(h, &v, sizeof v);
    }
  }
  for (Eigen::Index r = 0; r < data.target.size(); ++r) {
    const double v = data.target[r];
    hash_bytes(h, &v, sizeof v);
  }
  return h;
}

}  // namespace asymcast
