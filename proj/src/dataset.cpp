#include "synthqa/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace synthqa {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// RFC-4180 record splitter. Returns the physical line number each record starts on.
struct CsvRecords {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;
};

CsvRecords split_csv(const std::string& text) {
  CsvRecords out;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A bare blank line is not a record.
    if (!(record.size() == 1 && record[0].empty())) {
      out.rows.push_back(std::move(record));
      out.lines.push_back(record_line);
    }
    record.clear();
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  // Skip UTF-8 byte order mark.
  if (n >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    i = 3;
  }
  for (; i < n; ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": stray quote inside unquoted field");
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < n && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(record_line) + ": unterminated quoted field");
  }
  if (!field.empty() || field_started || !record.empty()) {
    end_record();
  }
  return out;
}

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

void append_field(std::string& out, const std::string& s) {
  if (!needs_quoting(s)) {
    out += s;
    return;
  }
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

std::string format_double(double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

}  // namespace

std::string_view to_string(ColumnKind kind) {
  return kind == ColumnKind::Categorical ? "categorical" : "numerical";
}

ColumnKind column_kind_from_string(std::string_view text) {
  if (text == "categorical") return ColumnKind::Categorical;
  if (text == "numerical") return ColumnKind::Numerical;
  throw Error(ErrorCode::InvalidSchema, "unknown column kind '" + std::string(text) + "'");
}

std::string_view to_string(LevelOrigin origin) {
  switch (origin) {
    case LevelOrigin::Shared: return "shared";
    case LevelOrigin::RealOnly: return "real_only";
    case LevelOrigin::SynthOnly: return "synth_only";
    case LevelOrigin::Unobserved: return "unobserved";
  }
  return "unobserved";
}

void Schema::validate() const {
  if (columns.empty()) {
    throw Error(ErrorCode::InvalidSchema, "schema has no columns");
  }
  std::unordered_set<std::string> seen;
  for (const auto& col : columns) {
    if (col.name.empty()) {
      throw Error(ErrorCode::InvalidSchema, "column with empty name");
    }
    if (!seen.insert(col.name).second) {
      throw Error(ErrorCode::InvalidSchema, "duplicate column name '" + col.name + "'");
    }
  }
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::count(ColumnKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(columns.begin(), columns.end(), [kind](const ColumnSpec& c) { return c.kind == kind; }));
}

std::vector<std::size_t> Schema::indices_of(ColumnKind kind) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].kind == kind) out.push_back(i);
  }
  return out;
}

Schema parse_schema_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSchema, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_array()) {
    throw Error(ErrorCode::InvalidSchema, "expected an object with a \"columns\" array");
  }
  Schema schema;
  for (const auto& col : doc["columns"]) {
    if (!col.is_object() || !col.contains("name") || !col["name"].is_string() || !col.contains("kind") ||
        !col["kind"].is_string()) {
      throw Error(ErrorCode::InvalidSchema, "each column needs string \"name\" and \"kind\"");
    }
    schema.columns.push_back({col["name"].get<std::string>(), column_kind_from_string(col["kind"].get<std::string>())});
  }
  if (doc.contains("missing_token")) {
    if (!doc["missing_token"].is_string()) {
      throw Error(ErrorCode::InvalidSchema, "\"missing_token\" must be a string");
    }
    schema.missing_token = doc["missing_token"].get<std::string>();
  }
  schema.validate();
  return schema;
}

Schema load_schema(const std::filesystem::path& path) {
  return parse_schema_json(read_file(path));
}

std::string schema_to_json(const Schema& schema) {
  nlohmann::json doc;
  doc["columns"] = nlohmann::json::array();
  for (const auto& c : schema.columns) {
    doc["columns"].push_back({{"name", c.name}, {"kind", std::string(to_string(c.kind))}});
  }
  doc["missing_token"] = schema.missing_token;
  return doc.dump(2);
}

std::vector<double> NumericalColumn::present_values() const {
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!missing[i]) out.push_back(values[i]);
  }
  return out;
}

std::size_t NumericalColumn::missing_count() const {
  return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), std::uint8_t{1}));
}

TableData::TableData(Schema schema, std::vector<Column> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  schema_.validate();
  if (columns_.size() != schema_.columns.size()) {
    throw Error(ErrorCode::SchemaMismatch, "column count does not match schema");
  }
  bool first = true;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto& spec = schema_.columns[c];
    std::size_t rows = 0;
    if (const auto* cat = std::get_if<CategoricalColumn>(&columns_[c])) {
      if (spec.kind != ColumnKind::Categorical) {
        throw Error(ErrorCode::SchemaMismatch, "column '" + spec.name + "' is declared numerical");
      }
      rows = cat->codes.size();
      std::unordered_set<std::string_view> seen;
      for (const auto& level : cat->levels) {
        if (!seen.insert(level).second) {
          throw Error(ErrorCode::InvalidArgument, "duplicate level '" + level + "' in column '" + spec.name + "'");
        }
      }
      for (auto code : cat->codes) {
        if (code >= cat->levels.size()) {
          throw Error(ErrorCode::InvalidArgument, "code out of range in column '" + spec.name + "'");
        }
      }
      if (!cat->excluded.empty() && cat->excluded.size() != rows) {
        throw Error(ErrorCode::InvalidArgument, "exclusion mask length mismatch in '" + spec.name + "'");
      }
    } else {
      const auto& num = std::get<NumericalColumn>(columns_[c]);
      if (spec.kind != ColumnKind::Numerical) {
        throw Error(ErrorCode::SchemaMismatch, "column '" + spec.name + "' is declared categorical");
      }
      if (num.missing.size() != num.values.size()) {
        throw Error(ErrorCode::InvalidArgument, "missing mask length mismatch in '" + spec.name + "'");
      }
      rows = num.values.size();
    }
    if (first) {
      n_rows_ = rows;
      first = false;
    } else if (rows != n_rows_) {
      throw Error(ErrorCode::InvalidArgument, "column '" + spec.name + "' has a different row count");
    }
  }
}

TableData TableData::from_rows(const Schema& schema, const std::vector<std::vector<std::string>>& rows,
                               std::size_t first_line) {
  schema.validate();
  std::vector<Column> columns;
  columns.reserve(schema.columns.size());
  std::vector<std::unordered_map<std::string, std::uint32_t>> lookup(schema.columns.size());
  for (const auto& spec : schema.columns) {
    if (spec.kind == ColumnKind::Categorical) {
      CategoricalColumn col;
      col.codes.reserve(rows.size());
      columns.emplace_back(std::move(col));
    } else {
      NumericalColumn col;
      col.values.reserve(rows.size());
      col.missing.reserve(rows.size());
      columns.emplace_back(std::move(col));
    }
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != schema.columns.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(first_line + r) + ": expected " +
                                             std::to_string(schema.columns.size()) + " fields, got " +
                                             std::to_string(row.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string& cell = row[c];
      if (auto* cat = std::get_if<CategoricalColumn>(&columns[c])) {
        const std::string& level = cell == schema.missing_token ? std::string(kMissingLevel) : cell;
        auto [it, inserted] = lookup[c].try_emplace(level, static_cast<std::uint32_t>(cat->levels.size()));
        if (inserted) cat->levels.push_back(level);
        cat->codes.push_back(it->second);
      } else {
        auto& num = std::get<NumericalColumn>(columns[c]);
        if (cell == schema.missing_token) {
          num.values.push_back(0.0);
          num.missing.push_back(1);
          continue;
        }
        double value = 0.0;
        const char* begin = cell.data();
        const char* end = begin + cell.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
          throw Error(ErrorCode::ParseError, "line " + std::to_string(first_line + r) + ", column '" +
                                                 schema.columns[c].name + "': not a number: '" + cell + "'");
        }
        num.values.push_back(value);
        num.missing.push_back(0);
      }
    }
  }
  return TableData(schema, std::move(columns));
}

const CategoricalColumn& TableData::categorical(std::size_t index) const {
  const auto* col = std::get_if<CategoricalColumn>(&columns_.at(index));
  if (!col) {
    throw Error(ErrorCode::BadTuple, "column '" + schema_.columns[index].name + "' is not categorical");
  }
  return *col;
}

const NumericalColumn& TableData::numerical(std::size_t index) const {
  const auto* col = std::get_if<NumericalColumn>(&columns_.at(index));
  if (!col) {
    throw Error(ErrorCode::InvalidArgument, "column '" + schema_.columns[index].name + "' is not numerical");
  }
  return *col;
}

std::string TableData::cell_text(std::size_t row, std::size_t col) const {
  if (const auto* cat = std::get_if<CategoricalColumn>(&columns_.at(col))) {
    const std::string& level = cat->levels[cat->codes.at(row)];
    return level == kMissingLevel ? schema_.missing_token : level;
  }
  const auto& num = std::get<NumericalColumn>(columns_[col]);
  if (num.missing.at(row)) return schema_.missing_token;
  return format_double(num.values[row]);
}

TableData TableData::compacted() const {
  std::vector<Column> columns = columns_;
  for (auto& column : columns) {
    auto* cat = std::get_if<CategoricalColumn>(&column);
    if (!cat) continue;
    std::vector<std::uint8_t> used(cat->levels.size(), 0);
    for (auto code : cat->codes) used[code] = 1;
    std::vector<std::uint32_t> remap(cat->levels.size(), 0);
    std::vector<std::string> levels;
    for (std::size_t l = 0; l < cat->levels.size(); ++l) {
      if (used[l]) {
        remap[l] = static_cast<std::uint32_t>(levels.size());
        levels.push_back(cat->levels[l]);
      }
    }
    for (auto& code : cat->codes) code = remap[code];
    cat->levels = std::move(levels);
  }
  return TableData(schema_, std::move(columns));
}

DatasetProfile profile(const TableData& data) {
  DatasetProfile p;
  p.n_samples = data.n_rows();
  for (std::size_t c = 0; c < data.n_columns(); ++c) {
    if (const auto* cat = std::get_if<CategoricalColumn>(&data.column(c))) {
      ++p.n_categorical;
      std::vector<std::uint8_t> used(cat->levels.size(), 0);
      for (auto code : cat->codes) used[code] = 1;
      p.total_categories += static_cast<std::size_t>(std::count(used.begin(), used.end(), std::uint8_t{1}));
    } else {
      ++p.n_numerical;
    }
  }
  p.vector_size = p.total_categories + p.n_numerical;
  return p;
}

TableData parse_csv(const std::string& text, const Schema& schema) {
  schema.validate();
  CsvRecords records = split_csv(text);
  if (records.rows.empty()) {
    throw Error(ErrorCode::EmptyFile, "no header row");
  }
  const auto& header = records.rows.front();
  std::vector<std::size_t> source(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), schema.columns[c].name);
    if (it == header.end()) {
      throw Error(ErrorCode::MissingColumn, "column '" + schema.columns[c].name + "' not found in header");
    }
    source[c] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<std::vector<std::string>> rows;
  rows.reserve(records.rows.size() - 1);
  for (std::size_t r = 1; r < records.rows.size(); ++r) {
    auto& raw = records.rows[r];
    if (raw.size() != header.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(records.lines[r]) + ": expected " +
                                             std::to_string(header.size()) + " fields, got " +
                                             std::to_string(raw.size()));
    }
    std::vector<std::string> row(schema.columns.size());
    for (std::size_t c = 0; c < source.size(); ++c) row[c] = std::move(raw[source[c]]);
    rows.push_back(std::move(row));
  }
  return TableData::from_rows(schema, rows, 2);
}

TableData load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::string text = read_file(path);
  if (text.empty()) {
    throw Error(ErrorCode::EmptyFile, "'" + path.string() + "' is empty");
  }
  try {
    return parse_csv(text, schema);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::EmptyFile ||
        e.code() == ErrorCode::MissingColumn) {
      throw Error(e.code(), path.string() + ": " + e.what());
    }
    throw;
  }
}

std::string to_csv(const TableData& data) {
  std::string out;
  const auto& cols = data.schema().columns;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out.push_back(',');
    append_field(out, cols[c].name);
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < data.n_rows(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out.push_back(',');
      append_field(out, data.cell_text(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const TableData& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  }
  out << to_csv(data);
}

AlignedPair align_dictionaries(const TableData& real, const TableData& synth) {
  if (!real.schema().same_columns(synth.schema())) {
    throw Error(ErrorCode::SchemaMismatch, "real and synthetic schemas differ");
  }
  const Schema& schema = real.schema();
  std::vector<Column> real_cols;
  std::vector<Column> synth_cols;
  std::vector<std::vector<LevelOrigin>> origins(schema.columns.size());

  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (schema.columns[c].kind == ColumnKind::Numerical) {
      real_cols.push_back(real.column(c));
      synth_cols.push_back(synth.column(c));
      continue;
    }
    const auto& rc = real.categorical(c);
    const auto& sc = synth.categorical(c);
    std::vector<std::uint8_t> in_real(rc.levels.size(), 0);
    std::vector<std::uint8_t> in_synth(sc.levels.size(), 0);
    for (auto code : rc.codes) in_real[code] = 1;
    for (auto code : sc.codes) in_synth[code] = 1;

    std::vector<std::string> merged;
    for (std::size_t l = 0; l < rc.levels.size(); ++l) {
      if (in_real[l]) merged.push_back(rc.levels[l]);
    }
    for (std::size_t l = 0; l < sc.levels.size(); ++l) {
      if (in_synth[l]) merged.push_back(sc.levels[l]);
    }
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    auto recode = [&merged](const CategoricalColumn& src) {
      std::vector<std::uint32_t> remap(src.levels.size(), 0);
      for (std::size_t l = 0; l < src.levels.size(); ++l) {
        auto it = std::lower_bound(merged.begin(), merged.end(), src.levels[l]);
        if (it != merged.end() && *it == src.levels[l]) {
          remap[l] = static_cast<std::uint32_t>(it - merged.begin());
        }
      }
      CategoricalColumn out;
      out.levels = merged;
      out.codes.resize(src.codes.size());
      for (std::size_t r = 0; r < src.codes.size(); ++r) out.codes[r] = remap[src.codes[r]];
      out.excluded = src.excluded;
      return out;
    };
    CategoricalColumn real_out = recode(rc);
    CategoricalColumn synth_out = recode(sc);

    std::vector<std::uint8_t> seen_real(merged.size(), 0);
    std::vector<std::uint8_t> seen_synth(merged.size(), 0);
    for (auto code : real_out.codes) seen_real[code] = 1;
    for (auto code : synth_out.codes) seen_synth[code] = 1;
    auto& flags = origins[c];
    flags.resize(merged.size());
    for (std::size_t l = 0; l < merged.size(); ++l) {
      flags[l] = seen_real[l] ? (seen_synth[l] ? LevelOrigin::Shared : LevelOrigin::RealOnly)
                              : LevelOrigin::SynthOnly;
    }
    real_cols.emplace_back(std::move(real_out));
    synth_cols.emplace_back(std::move(synth_out));
  }
  return AlignedPair{schema, TableData(schema, std::move(real_cols)), TableData(schema, std::move(synth_cols)),
                     std::move(origins)};
}

}  // namespace synthqa
