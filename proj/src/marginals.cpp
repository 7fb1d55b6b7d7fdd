#include "synthqa/marginals.hpp"

#include <algorithm>
#include <unordered_map>

namespace synthqa {

namespace {

// Dense counting is used while the joint level space fits in this many cells.
constexpr std::uint64_t kDenseLimit = std::uint64_t{1} << 20;

struct TupleView {
  std::vector<const CategoricalColumn*> real;
  std::vector<const CategoricalColumn*> synth;
  std::vector<std::uint64_t> radix;  // per-position stride of the composite key
  std::uint64_t space = 1;
  bool any_excluded = false;
};

TupleView make_view(const AlignedPair& pair, const VariableTuple& tuple) {
  TupleView view;
  const std::size_t k = tuple.degree();
  view.radix.assign(k, 1);
  std::vector<std::uint64_t> sizes(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t col = tuple[i];
    if (col >= pair.schema.columns.size()) {
      throw Error(ErrorCode::BadTuple, "column index " + std::to_string(col) + " out of range");
    }
    const auto* rc = std::get_if<CategoricalColumn>(&pair.real.column(col));
    const auto* sc = std::get_if<CategoricalColumn>(&pair.synth.column(col));
    if (!rc || !sc) {
      throw Error(ErrorCode::BadTuple,
                  "column '" + pair.schema.columns[col].name + "' is numerical; bin it before counting");
    }
    if (rc->levels.size() != sc->levels.size()) {
      throw Error(ErrorCode::BadTuple, "column '" + pair.schema.columns[col].name + "' is not aligned");
    }
    view.real.push_back(rc);
    view.synth.push_back(sc);
    sizes[i] = std::max<std::uint64_t>(rc->levels.size(), 1);
    view.any_excluded = view.any_excluded || !rc->excluded.empty() || !sc->excluded.empty();
  }
  for (std::size_t i = k; i-- > 0;) {
    view.radix[i] = view.space;
    // Saturate rather than overflow; huge spaces always take the hashed path.
    view.space = view.space > (UINT64_MAX / sizes[i]) ? UINT64_MAX : view.space * sizes[i];
  }
  return view;
}

template <typename Sink>
std::uint64_t scan(const std::vector<const CategoricalColumn*>& cols, const std::vector<std::uint64_t>& radix,
                   bool any_excluded, Sink&& sink) {
  const std::size_t k = cols.size();
  const std::size_t rows = cols[0]->codes.size();
  std::uint64_t n = 0;
  if (k == 2 && !any_excluded) {
    const auto* a = cols[0]->codes.data();
    const auto* b = cols[1]->codes.data();
    const std::uint64_t ra = radix[0];
    for (std::size_t r = 0; r < rows; ++r) sink(a[r] * ra + b[r]);
    return rows;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    bool skip = false;
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (cols[i]->is_excluded(r)) {
        skip = true;
        break;
      }
      key += cols[i]->codes[r] * radix[i];
    }
    if (skip) continue;
    sink(key);
    ++n;
  }
  return n;
}

MarginalCell decode(std::uint64_t key, const std::vector<std::uint64_t>& radix) {
  MarginalCell cell;
  for (std::size_t i = 0; i < radix.size(); ++i) {
    cell.codes[i] = static_cast<std::uint32_t>(key / radix[i]);
    key %= radix[i];
  }
  return cell;
}

}  // namespace

VariableTuple::VariableTuple(std::vector<std::size_t> columns) : columns_(std::move(columns)) {
  if (columns_.empty() || columns_.size() > kMaxDegree) {
    throw Error(ErrorCode::BadTuple, "tuple degree must be in [1, " + std::to_string(kMaxDegree) + "]");
  }
  for (std::size_t i = 1; i < columns_.size(); ++i) {
    if (columns_[i] <= columns_[i - 1]) {
      throw Error(ErrorCode::BadTuple, "tuple columns must be strictly increasing");
    }
  }
}

std::string VariableTuple::label(const Schema& schema) const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += " x ";
    out += schema.columns.at(columns_[i]).name;
  }
  return out;
}

MarginalTable count_marginal(const AlignedPair& pair, const VariableTuple& tuple) {
  if (tuple.degree() == 0) {
    throw Error(ErrorCode::BadTuple, "empty tuple");
  }
  TupleView view = make_view(pair, tuple);
  MarginalTable table;
  table.tuple = tuple;

  if (view.space <= kDenseLimit) {
    std::vector<std::uint64_t> real_counts(view.space, 0);
    std::vector<std::uint64_t> synth_counts(view.space, 0);
    table.n_real = scan(view.real, view.radix, view.any_excluded, [&](std::uint64_t key) { ++real_counts[key]; });
    table.n_synth =
        scan(view.synth, view.radix, view.any_excluded, [&](std::uint64_t key) { ++synth_counts[key]; });
    for (std::uint64_t key = 0; key < view.space; ++key) {
      if (real_counts[key] == 0 && synth_counts[key] == 0) continue;
      MarginalCell cell = decode(key, view.radix);
      cell.count_real = real_counts[key];
      cell.count_synth = synth_counts[key];
      table.cells.push_back(cell);
    }
    return table;
  }

  std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> counts;
  table.n_real = scan(view.real, view.radix, view.any_excluded, [&](std::uint64_t key) { ++counts[key].first; });
  table.n_synth =
      scan(view.synth, view.radix, view.any_excluded, [&](std::uint64_t key) { ++counts[key].second; });
  std::vector<std::uint64_t> keys;
  keys.reserve(counts.size());
  for (const auto& [key, _] : counts) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  table.cells.reserve(keys.size());
  for (auto key : keys) {
    MarginalCell cell = decode(key, view.radix);
    cell.count_real = counts[key].first;
    cell.count_synth = counts[key].second;
    table.cells.push_back(cell);
  }
  return table;
}

std::vector<VariableTuple> enumerate_tuples(const Schema& schema, std::size_t k, ColumnKind kind) {
  if (k == 0 || k > kMaxDegree) {
    throw Error(ErrorCode::BadTuple, "tuple degree must be in [1, " + std::to_string(kMaxDegree) + "]");
  }
  const auto cols = schema.indices_of(kind);
  std::vector<VariableTuple> out;
  if (cols.size() < k) return out;
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    std::vector<std::size_t> tuple(k);
    for (std::size_t i = 0; i < k; ++i) tuple[i] = cols[pick[i]];
    out.emplace_back(std::move(tuple));
    // Advance to the next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == cols.size() - k + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

}  // namespace synthqa
