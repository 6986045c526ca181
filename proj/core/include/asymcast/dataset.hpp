#pragma once

#include "asymcast/types.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace asymcast {

/// Which slice of the source data a Dataset holds. Carried on every split so
/// that code paths touching test rows can be audited.
enum class Partition { Source, Ats, Validation, Test, FullTrain };

std::string_view partition_name(Partition p) noexcept;

/// One categorical source column after dummy encoding. `levels[0]` is the
/// dropped reference level; `levels[i]` for i >= 1 owns `dummy_columns[i-1]`.
struct CategoricalColumn {
  std::string name;
  std::vector<std::string> levels;
  std::vector<std::size_t> dummy_columns;
};

struct CategoricalMap {
  std::vector<CategoricalColumn> columns;

  bool is_dummy(std::size_t feature_column) const;
  /// Recovers the original label of categorical `which` for `row`.
  const std::string& decode(const Matrix& features, Eigen::Index row, std::size_t which) const;
};

/// Feature matrix with named columns and a resale-ratio target.
///
/// `row_ids` are indices into the dataset the rows were drawn from, so the
/// union of a split's partitions can be checked against the source.
struct Dataset {
  Matrix features;
  std::vector<std::string> feature_names;
  Vector target;
  CategoricalMap categorical_map;
  std::vector<std::size_t> row_ids;
  Partition partition = Partition::Source;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

  /// Throws InvalidInputError when the shape or value invariants are broken.
  void validate() const;

  /// Rows `indices` (in that order), tagged with `partition`.
  Dataset subset(std::span<const std::size_t> indices, Partition partition) const;
};

/// Concatenates rows of `first` then `second`; both must share columns.
Dataset concat(const Dataset& first, const Dataset& second, Partition partition);

enum class ColumnType { Numeric, Categorical, Target };

struct ColumnSpec {
  std::string name;
  ColumnType type = ColumnType::Numeric;
  /// Optional for categoricals. When given, the first level is the reference
  /// and any other value in the data is rejected.
  std::vector<std::string> levels;
};

/// Plain-text schema: one "name:type" per line, type one of numeric,
/// categorical, target. A categorical may fix its levels with
/// "name:categorical=lvl1|lvl2|lvl3". '#' starts a comment.
struct Schema {
  std::vector<ColumnSpec> columns;

  static Schema parse(std::string_view text);
  static Schema load(const std::filesystem::path& path);
  std::string to_text() const;
  const ColumnSpec& target() const;
};

/// Reads a UTF-8, comma-delimited CSV whose header matches `schema` (same
/// names, same order). Numeric columns stay in place; each categorical is
/// replaced by its dummies (reference level dropped, remaining levels in
/// sorted order unless the schema fixes them).
Dataset load_csv(const std::filesystem::path& path, const Schema& schema);
Dataset read_csv(std::istream& in, const Schema& schema);

/// Writes `data` back in source form: numeric features and decoded
/// categoricals in their original positions, then the target. Returns the
/// schema describing the written file (levels pinned), so loading the file
/// with it reproduces the features and target exactly.
Schema write_csv(const Dataset& data, std::ostream& out, std::string_view target_name = "target");
Schema write_csv(const Dataset& data, const std::filesystem::path& path,
                 std::string_view target_name = "target");

/// FNV-1a over shape, names and values; stable across platforms.
std::uint64_t dataset_hash(const Dataset& data);

}  // namespace asymcast
