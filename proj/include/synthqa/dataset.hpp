#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "synthqa/error.hpp"

namespace synthqa {

// Literal level used for categorical cells equal to the schema's missing token.
inline constexpr std::string_view kMissingLevel = "\xC2\xABmissing\xC2\xBB";  // «missing»

enum class ColumnKind { Categorical, Numerical };

std::string_view to_string(ColumnKind kind);
ColumnKind column_kind_from_string(std::string_view text);

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Categorical;

  bool operator==(const ColumnSpec&) const = default;
};

struct Schema {
  std::vector<ColumnSpec> columns;
  std::string missing_token;

  // Throws InvalidSchema on empty/duplicate names or no columns.
  void validate() const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t count(ColumnKind kind) const;
  std::vector<std::size_t> indices_of(ColumnKind kind) const;

  bool same_columns(const Schema& other) const { return columns == other.columns; }
};

Schema parse_schema_json(const std::string& text);
Schema load_schema(const std::filesystem::path& path);
std::string schema_to_json(const Schema& schema);

struct CategoricalColumn {
  std::vector<std::string> levels;
  std::vector<std::uint32_t> codes;
  // Only populated for columns derived from binned numerical data; 1 marks a
  // row whose source value was missing.
  std::vector<std::uint8_t> excluded;

  bool is_excluded(std::size_t row) const { return !excluded.empty() && excluded[row] != 0; }
};

struct NumericalColumn {
  std::vector<double> values;
  std::vector<std::uint8_t> missing;

  std::vector<double> present_values() const;
  std::size_t missing_count() const;
};

using Column = std::variant<CategoricalColumn, NumericalColumn>;

// Column-typed dataset. Immutable once constructed.
class TableData {
 public:
  TableData(Schema schema, std::vector<Column> columns);

  // Builds a table from text cells laid out in schema column order, applying the
  // same conversion rules as load_csv. `first_line` only affects error messages.
  static TableData from_rows(const Schema& schema, const std::vector<std::vector<std::string>>& rows,
                             std::size_t first_line = 1);

  const Schema& schema() const { return schema_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_columns() const { return columns_.size(); }

  const Column& column(std::size_t index) const { return columns_.at(index); }
  const CategoricalColumn& categorical(std::size_t index) const;
  const NumericalColumn& numerical(std::size_t index) const;

  // Cell rendered back to its CSV text (missing cells become the missing token).
  std::string cell_text(std::size_t row, std::size_t col) const;

  // Copy with unused categorical levels dropped; remaining levels keep their order.
  TableData compacted() const;

 private:
  Schema schema_;
  std::size_t n_rows_ = 0;
  std::vector<Column> columns_;
};

struct DatasetProfile {
  std::size_t n_samples = 0;
  std::size_t n_categorical = 0;
  std::size_t n_numerical = 0;
  std::size_t total_categories = 0;
  std::size_t vector_size = 0;
};

// Categories are counted from the levels present in the rows, so unused
// dictionary entries never inflate the encoded vector size.
DatasetProfile profile(const TableData& data);

TableData load_csv(const std::filesystem::path& path, const Schema& schema);
TableData parse_csv(const std::string& text, const Schema& schema);
void write_csv(const TableData& data, const std::filesystem::path& path);
std::string to_csv(const TableData& data);

enum class LevelOrigin : std::uint8_t { Shared, RealOnly, SynthOnly, Unobserved };

std::string_view to_string(LevelOrigin origin);

// Real and synthetic tables re-coded against one merged dictionary per
// categorical column. Merged levels are sorted lexicographically (byte order).
struct AlignedPair {
  Schema schema;
  TableData real;
  TableData synth;
  // Indexed [column][level]; empty for numerical columns.
  std::vector<std::vector<LevelOrigin>> origins;
};

AlignedPair align_dictionaries(const TableData& real, const TableData& synth);

}  // namespace synthqa
