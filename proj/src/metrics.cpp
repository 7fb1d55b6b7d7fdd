#include "synthqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include "synthqa/parallel.hpp"

namespace synthqa {

__extension__ typedef unsigned __int128 u128;

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SYNTHQA_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<std::size_t>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string_view to_string(NormalizationMode mode) {
  return mode == NormalizationMode::PointMean ? "point-mean" : "variable-l1";
}

NormalizationMode normalization_mode_from_string(std::string_view text) {
  if (text == "point-mean") return NormalizationMode::PointMean;
  if (text == "variable-l1" || text == "variable-L1") return NormalizationMode::VariableL1;
  throw Error(ErrorCode::InvalidArgument, "unknown normalization mode '" + std::string(text) + "'");
}

double mae(const MarginalTable& table, NormalizationMode mode) {
  if (table.cells.empty()) {
    throw Error(ErrorCode::EmptyTable, "marginal table '" + std::to_string(table.tuple.degree()) + "-way' has no cells");
  }
  double sum = 0.0;
  if (table.n_real > 0 && table.n_synth > 0) {
    // Σ|a/nr − b/ns| = Σ|a·ns − b·nr| / (nr·ns), summed exactly.
    u128 num = 0;
    for (const auto& cell : table.cells) {
      const u128 a = static_cast<u128>(cell.count_real) * table.n_synth;
      const u128 b = static_cast<u128>(cell.count_synth) * table.n_real;
      num += a > b ? a - b : b - a;
    }
    const u128 den = static_cast<u128>(table.n_real) * table.n_synth;
    sum = static_cast<double>(num) / static_cast<double>(den);
  } else {
    for (const auto& cell : table.cells) sum += std::abs(table.p_real(cell) - table.p_synth(cell));
  }
  return mode == NormalizationMode::PointMean ? sum / static_cast<double>(table.cells.size()) : sum;
}

double mae_k(std::span<const MarginalTable> tables, NormalizationMode mode) {
  if (tables.empty()) {
    throw Error(ErrorCode::EmptyList, "no marginal tables");
  }
  const std::size_t degree = tables.front().tuple.degree();
  double sum = 0.0;
  for (const auto& t : tables) {
    if (t.tuple.degree() != degree) {
      throw Error(ErrorCode::InvalidArgument, "tables of mixed degree");
    }
    sum += mae(t, mode);
  }
  return sum / static_cast<double>(tables.size());
}

double coverage(const MarginalTable& table) {
  std::size_t supported = 0;
  std::size_t generated = 0;
  for (const auto& cell : table.cells) {
    if (cell.count_real == 0) continue;
    ++supported;
    if (cell.count_synth > 0) ++generated;
  }
  if (supported == 0) {
    throw Error(ErrorCode::NoRealSupport, "no real-supported cells");
  }
  return static_cast<double>(generated) / static_cast<double>(supported);
}

double invented(const MarginalTable& table) {
  if (table.n_synth == 0) {
    throw Error(ErrorCode::EmptySynth, "no synthetic rows");
  }
  std::uint64_t outside = 0;
  for (const auto& cell : table.cells) {
    if (cell.count_real == 0) outside += cell.count_synth;
  }
  return static_cast<double>(outside) / static_cast<double>(table.n_synth);
}

double hist_iou(const MarginalTable& table) {
  double inter = 0.0;
  double uni = 0.0;
  if (table.n_real > 0 && table.n_synth > 0) {
    u128 lo = 0, hi = 0;
    for (const auto& cell : table.cells) {
      const u128 a = static_cast<u128>(cell.count_real) * table.n_synth;
      const u128 b = static_cast<u128>(cell.count_synth) * table.n_real;
      lo += std::min(a, b);
      hi += std::max(a, b);
    }
    inter = static_cast<double>(lo);
    uni = static_cast<double>(hi);
  } else {
    for (const auto& cell : table.cells) {
      const double p = table.p_real(cell);
      const double q = table.p_synth(cell);
      inter += std::min(p, q);
      uni += std::max(p, q);
    }
  }
  if (uni <= 0.0) {
    throw Error(ErrorCode::EmptyTable, "histogram has no mass");
  }
  return inter / uni;
}

double jsd(const MarginalTable& table) {
  if (table.cells.empty() || table.n_real == 0 || table.n_synth == 0) {
    throw Error(ErrorCode::EmptyTable, "JSD needs mass on both sides");
  }
  double divergence = 0.0;
  for (const auto& cell : table.cells) {
    const double p = table.p_real(cell);
    const double q = table.p_synth(cell);
    const double m = 0.5 * (p + q);
    if (p > 0.0) divergence += 0.5 * p * std::log2(p / m);
    if (q > 0.0) divergence += 0.5 * q * std::log2(q / m);
  }
  return std::sqrt(std::clamp(divergence, 0.0, 1.0));
}

std::vector<double> quantiles(std::span<const double> values, std::size_t n_points) {
  if (values.empty()) {
    throw Error(ErrorCode::EmptyColumn, "no values");
  }
  if (n_points == 0) return {};
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t last = sorted.size() - 1;
  std::vector<double> out(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double pos = n_points == 1 ? 0.5 * static_cast<double>(last)
                                     : static_cast<double>(i * last) / static_cast<double>(n_points - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    out[i] = (lo >= last || frac == 0.0) ? sorted[std::min(lo, last)]
                                         : sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
  }
  return out;
}

double wasserstein1d(std::span<const double> real_values, std::span<const double> synth_values) {
  if (real_values.empty() || synth_values.empty()) {
    throw Error(ErrorCode::EmptyColumn, "Wasserstein distance needs values on both sides");
  }
  std::vector<double> a;
  std::vector<double> b;
  if (real_values.size() == synth_values.size()) {
    a.assign(real_values.begin(), real_values.end());
    b.assign(synth_values.begin(), synth_values.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
  } else if (real_values.size() > synth_values.size()) {
    b.assign(synth_values.begin(), synth_values.end());
    std::sort(b.begin(), b.end());
    a = quantiles(real_values, b.size());
  } else {
    a.assign(real_values.begin(), real_values.end());
    std::sort(a.begin(), a.end());
    b = quantiles(synth_values, a.size());
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

std::size_t BinRange::index_of(double value) const {
  if (bins <= 1 || !(upper > lower)) return 0;
  const double pos = (value - lower) / (upper - lower) * static_cast<double>(bins);
  if (!(pos > 0.0)) return 0;
  const auto idx = static_cast<std::size_t>(std::floor(pos));
  return std::min(idx, bins - 1);
}

std::string BinRange::label(std::size_t bin) const {
  char buf[96];
  if (bins <= 1 || !(upper > lower)) {
    std::snprintf(buf, sizeof buf, "[%.6g, %.6g]", lower, upper);
    return buf;
  }
  const double width = (upper - lower) / static_cast<double>(bins);
  const double lo = lower + width * static_cast<double>(bin);
  const double hi = bin + 1 == bins ? upper : lower + width * static_cast<double>(bin + 1);
  // Narrow ranges need more digits to keep edges distinct.
  int digits = 6;
  for (; digits < 17; ++digits) {
    char a[40], b[40];
    std::snprintf(a, sizeof a, "%.*g", digits, lo);
    std::snprintf(b, sizeof b, "%.*g", digits, hi);
    if (std::string_view(a) != std::string_view(b)) break;
  }
  std::snprintf(buf, sizeof buf, bin + 1 == bins ? "[%.*g, %.*g]" : "[%.*g, %.*g)", digits, lo, digits, hi);
  return buf;
}

BinSpec fit_bins(const TableData& real, std::size_t bins) {
  if (bins == 0) {
    throw Error(ErrorCode::InvalidArgument, "bin count must be at least 1");
  }
  BinSpec spec;
  spec.columns.resize(real.n_columns());
  for (std::size_t c = 0; c < real.n_columns(); ++c) {
    if (real.schema().columns[c].kind != ColumnKind::Numerical) continue;
    const auto& col = real.numerical(c);
    BinRange range;
    bool any = false;
    for (std::size_t r = 0; r < col.values.size(); ++r) {
      if (col.missing[r]) continue;
      if (!any) {
        range.lower = range.upper = col.values[r];
        any = true;
      } else {
        range.lower = std::min(range.lower, col.values[r]);
        range.upper = std::max(range.upper, col.values[r]);
      }
    }
    range.bins = range.upper > range.lower ? bins : 1;
    spec.columns[c] = range;
  }
  return spec;
}

AlignedPair bin_numeric(const AlignedPair& pair, const BinSpec& spec) {
  Schema schema = pair.schema;
  std::vector<Column> real_cols;
  std::vector<Column> synth_cols;
  auto origins = pair.origins;
  origins.resize(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (schema.columns[c].kind != ColumnKind::Numerical) {
      real_cols.push_back(pair.real.column(c));
      synth_cols.push_back(pair.synth.column(c));
      continue;
    }
    if (c >= spec.columns.size() || !spec.columns[c]) {
      throw Error(ErrorCode::InvalidArgument, "no bin range for column '" + schema.columns[c].name + "'");
    }
    const BinRange& range = *spec.columns[c];
    std::vector<std::string> labels(range.bins);
    for (std::size_t b = 0; b < range.bins; ++b) labels[b] = range.label(b);

    std::vector<std::uint8_t> seen_real(range.bins, 0);
    std::vector<std::uint8_t> seen_synth(range.bins, 0);
    auto convert = [&](const NumericalColumn& src, std::vector<std::uint8_t>& seen) {
      CategoricalColumn out;
      out.levels = labels;
      out.codes.resize(src.values.size());
      const bool any_missing = std::find(src.missing.begin(), src.missing.end(), 1) != src.missing.end();
      if (any_missing) out.excluded = src.missing;
      for (std::size_t r = 0; r < src.values.size(); ++r) {
        if (src.missing[r]) continue;
        const auto bin = static_cast<std::uint32_t>(range.index_of(src.values[r]));
        out.codes[r] = bin;
        seen[bin] = 1;
      }
      return out;
    };
    real_cols.emplace_back(convert(pair.real.numerical(c), seen_real));
    synth_cols.emplace_back(convert(pair.synth.numerical(c), seen_synth));
    auto& flags = origins[c];
    flags.resize(range.bins);
    for (std::size_t b = 0; b < range.bins; ++b) {
      flags[b] = seen_real[b] ? (seen_synth[b] ? LevelOrigin::Shared : LevelOrigin::RealOnly)
                              : (seen_synth[b] ? LevelOrigin::SynthOnly : LevelOrigin::Unobserved);
    }
    schema.columns[c].kind = ColumnKind::Categorical;
  }
  return AlignedPair{schema, TableData(schema, std::move(real_cols)), TableData(schema, std::move(synth_cols)),
                     std::move(origins)};
}

std::optional<double> QualityReport::metric(std::string_view name) const {
  if (name == "mae1") return mae1;
  if (name == "mae2") return mae2;
  if (name == "mae1_point_mean") return mae1_point_mean;
  if (name == "mae2_point_mean") return mae2_point_mean;
  if (name == "mae1_variable_l1") return mae1_variable_l1;
  if (name == "mae2_variable_l1") return mae2_variable_l1;
  if (name == "coverage1") return coverage1;
  if (name == "coverage2") return coverage2;
  if (name == "invented1") return invented1;
  if (name == "invented2") return invented2;
  if (name == "hist_iou1") return hist_iou1;
  if (name == "hist_iou2") return hist_iou2;
  if (name == "jsd2") return jsd2;
  if (name == "wd1_mean") {
    if (wd1.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& w : wd1) sum += w.distance;
    return sum / static_cast<double>(wd1.size());
  }
  return std::nullopt;
}

namespace {

std::optional<double> mean_of(const std::vector<TupleDetail>& details, ColumnKind kind, std::size_t degree,
                              std::optional<double> TupleDetail::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& d : details) {
    if (d.kind != kind || d.tuple.degree() != degree) continue;
    const auto& v = d.*field;
    if (!v) continue;
    sum += *v;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> mean_of(const std::vector<TupleDetail>& details, ColumnKind kind, std::size_t degree,
                              double TupleDetail::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& d : details) {
    if (d.kind != kind || d.tuple.degree() != degree) continue;
    sum += d.*field;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

Evaluation evaluate_full(const TableData& real, const TableData& synth, const EvaluateOptions& options) {
  if (!real.schema().same_columns(synth.schema())) {
    throw Error(ErrorCode::SchemaMismatch, "real and synthetic schemas differ");
  }
  if (real.n_rows() == 0) throw Error(ErrorCode::EmptyTable, "real table has no rows");
  if (synth.n_rows() == 0) throw Error(ErrorCode::EmptySynth, "synthetic table has no rows");
  const Schema& schema = real.schema();
  Evaluation out;
  out.pair = bin_numeric(align_dictionaries(real, synth), fit_bins(real, options.bins));
  const AlignedPair& binned = *out.pair;

  std::vector<std::pair<VariableTuple, ColumnKind>> work;
  for (ColumnKind kind : {ColumnKind::Categorical, ColumnKind::Numerical}) {
    for (std::size_t k = 1; k <= 2; ++k) {
      for (auto& t : enumerate_tuples(schema, k, kind)) work.emplace_back(std::move(t), kind);
    }
  }

  out.tables.resize(work.size());
  out.report.details.resize(work.size());
  parallel_for(work.size(), resolve_threads(options.threads), [&](std::size_t i) {
    const auto& [tuple, kind] = work[i];
    MarginalTable table = count_marginal(binned, tuple);
    TupleDetail d;
    d.tuple = tuple;
    d.label = tuple.label(schema);
    d.kind = kind;
    d.n_cells = table.cells.size();
    if (!table.cells.empty()) {
      d.mae_point_mean = mae(table, NormalizationMode::PointMean);
      d.mae_variable_l1 = mae(table, NormalizationMode::VariableL1);
    }
    if (kind == ColumnKind::Categorical) {
      d.coverage = coverage(table);
      d.invented = invented(table);
      if (tuple.degree() == 2) d.jsd = jsd(table);
    } else {
      if (table.n_real > 0 || table.n_synth > 0) d.hist_iou = hist_iou(table);
      // Informational for binned data; undefined when one side has no present values.
      if (table.n_real > 0 && table.n_synth > 0) {
        d.coverage = coverage(table);
        d.invented = invented(table);
        if (tuple.degree() == 2) d.jsd = jsd(table);
      }
    }
    out.report.details[i] = std::move(d);
    out.tables[i] = std::move(table);
  });

  QualityReport& r = out.report;
  r.dataset_id = options.dataset_id;
  r.model_id = options.model_id;
  r.normalization_mode = options.mode;
  r.bins = options.bins;
  r.n_real = real.n_rows();
  r.n_synth = synth.n_rows();

  const auto& d = r.details;
  constexpr auto cat = ColumnKind::Categorical;
  constexpr auto num = ColumnKind::Numerical;
  r.mae1_point_mean = mean_of(d, cat, 1, &TupleDetail::mae_point_mean);
  r.mae2_point_mean = mean_of(d, cat, 2, &TupleDetail::mae_point_mean);
  r.mae1_variable_l1 = mean_of(d, cat, 1, &TupleDetail::mae_variable_l1);
  r.mae2_variable_l1 = mean_of(d, cat, 2, &TupleDetail::mae_variable_l1);
  const bool point = options.mode == NormalizationMode::PointMean;
  r.mae1 = point ? r.mae1_point_mean : r.mae1_variable_l1;
  r.mae2 = point ? r.mae2_point_mean : r.mae2_variable_l1;
  r.coverage1 = mean_of(d, cat, 1, &TupleDetail::coverage);
  r.coverage2 = mean_of(d, cat, 2, &TupleDetail::coverage);
  r.invented1 = mean_of(d, cat, 1, &TupleDetail::invented);
  r.invented2 = mean_of(d, cat, 2, &TupleDetail::invented);
  r.hist_iou1 = mean_of(d, num, 1, &TupleDetail::hist_iou);
  r.hist_iou2 = mean_of(d, num, 2, &TupleDetail::hist_iou);

  double jsd_sum = 0.0;
  std::size_t jsd_n = 0;
  for (const auto& detail : d) {
    if (detail.tuple.degree() == 2 && detail.jsd) {
      jsd_sum += *detail.jsd;
      ++jsd_n;
    }
  }
  if (jsd_n) r.jsd2 = jsd_sum / static_cast<double>(jsd_n);

  for (std::size_t c : schema.indices_of(num)) {
    const auto& rc = real.numerical(c);
    const auto& sc = synth.numerical(c);
    const auto rv = rc.present_values();
    const auto sv = sc.present_values();
    r.wd1.push_back({schema.columns[c].name, wasserstein1d(rv, sv)});
    r.numeric_missing.push_back(
        {schema.columns[c].name,
         rc.values.empty() ? 0.0 : static_cast<double>(rc.missing_count()) / static_cast<double>(rc.values.size()),
         sc.values.empty() ? 0.0 : static_cast<double>(sc.missing_count()) / static_cast<double>(sc.values.size())});
  }
  return out;
}

QualityReport evaluate(const TableData& real, const TableData& synth, const EvaluateOptions& options) {
  return evaluate_full(real, synth, options).report;
}

}  // namespace synthqa
