#include "synthqa/refsynth.hpp"

#include <algorithm>
#include <map>

#include "synthqa/random.hpp"

namespace synthqa {

namespace {

void require_input(const TableData& real, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample size must be at least 1");
  if (real.n_rows() == 0) throw Error(ErrorCode::InvalidArgument, "real table has no rows");
}

NumericalColumn missing_column(std::size_t n) {
  NumericalColumn out;
  out.values.assign(n, 0.0);
  out.missing.assign(n, 1);
  return out;
}

}  // namespace

TableData independent_sample(const TableData& real, std::size_t n, std::uint64_t seed) {
  require_input(real, n);
  std::vector<Column> columns;
  for (std::size_t c = 0; c < real.n_columns(); ++c) {
    Rng rng(derive_seed({seed, c}));
    if (real.schema().columns[c].kind == ColumnKind::Categorical) {
      const auto& src = real.categorical(c);
      CategoricalColumn out;
      out.levels = src.levels;
      out.codes.resize(n);
      for (auto& code : out.codes) code = src.codes[rng.index(src.codes.size())];
      columns.emplace_back(std::move(out));
    } else {
      const auto observed = real.numerical(c).present_values();
      if (observed.empty()) {
        columns.emplace_back(missing_column(n));
        continue;
      }
      NumericalColumn out;
      out.values.resize(n);
      out.missing.assign(n, 0);
      for (auto& v : out.values) v = observed[rng.index(observed.size())];
      columns.emplace_back(std::move(out));
    }
  }
  return TableData(real.schema(), std::move(columns)).compacted();
}

TableData bootstrap_sample(const TableData& real, std::size_t n, std::uint64_t seed) {
  require_input(real, n);
  Rng rng(derive_seed({seed}));
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = rng.index(real.n_rows());
  std::vector<Column> columns;
  for (std::size_t c = 0; c < real.n_columns(); ++c) {
    if (real.schema().columns[c].kind == ColumnKind::Categorical) {
      const auto& src = real.categorical(c);
      CategoricalColumn out;
      out.levels = src.levels;
      out.codes.reserve(n);
      for (auto r : rows) out.codes.push_back(src.codes[r]);
      columns.emplace_back(std::move(out));
    } else {
      const auto& src = real.numerical(c);
      NumericalColumn out;
      out.values.reserve(n);
      out.missing.reserve(n);
      for (auto r : rows) {
        out.values.push_back(src.values[r]);
        out.missing.push_back(src.missing[r]);
      }
      columns.emplace_back(std::move(out));
    }
  }
  return TableData(real.schema(), std::move(columns)).compacted();
}

TableData mode_collapse_sample(const TableData& real, std::size_t n) {
  require_input(real, n);
  std::vector<Column> columns;
  for (std::size_t c = 0; c < real.n_columns(); ++c) {
    if (real.schema().columns[c].kind == ColumnKind::Categorical) {
      const auto& src = real.categorical(c);
      std::vector<std::size_t> counts(src.levels.size(), 0);
      for (auto code : src.codes) ++counts[code];
      std::uint32_t best = 0;
      for (std::uint32_t l = 1; l < counts.size(); ++l) {
        if (counts[l] > counts[best] || (counts[l] == counts[best] && src.levels[l] < src.levels[best])) best = l;
      }
      CategoricalColumn out;
      out.levels = {src.levels[best]};
      out.codes.assign(n, 0);
      columns.emplace_back(std::move(out));
    } else {
      std::map<double, std::size_t> counts;
      for (double v : real.numerical(c).present_values()) ++counts[v];
      if (counts.empty()) {
        columns.emplace_back(missing_column(n));
        continue;
      }
      auto best = counts.begin();
      for (auto it = counts.begin(); it != counts.end(); ++it) {
        if (it->second > best->second) best = it;
      }
      NumericalColumn out;
      out.values.assign(n, best->first);
      out.missing.assign(n, 0);
      columns.emplace_back(std::move(out));
    }
  }
  return TableData(real.schema(), std::move(columns));
}

}  // namespace synthqa
