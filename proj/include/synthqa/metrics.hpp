#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthqa/dataset.hpp"
#include "synthqa/marginals.hpp"

namespace synthqa {

// How per-cell absolute differences of one marginal table are aggregated.
//   PointMean:  mean over union-support cells (distance of scatter points from the diagonal)
//   VariableL1: sum over cells, i.e. twice the total variation distance
enum class NormalizationMode { PointMean, VariableL1 };

std::string_view to_string(NormalizationMode mode);
NormalizationMode normalization_mode_from_string(std::string_view text);

double mae(const MarginalTable& table, NormalizationMode mode);
double mae_k(std::span<const MarginalTable> tables, NormalizationMode mode);

// Share of real-supported cells that the synthetic data produced at least once.
double coverage(const MarginalTable& table);
// Share of synthetic rows whose tuple value never occurs in the real data.
double invented(const MarginalTable& table);

double hist_iou(const MarginalTable& table);
// Jensen-Shannon distance (square root of the base-2 divergence), in [0, 1].
double jsd(const MarginalTable& table);

double wasserstein1d(std::span<const double> real_values, std::span<const double> synth_values);
// n_points quantiles at ranks i/(n_points-1) with linear interpolation between
// order statistics. A single point is the median.
std::vector<double> quantiles(std::span<const double> values, std::size_t n_points);

inline constexpr std::size_t kDefaultBins = 10;

struct BinRange {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t bins = 1;

  std::size_t index_of(double value) const;
  std::string label(std::size_t bin) const;
};

// Indexed by column; empty for categorical columns.
struct BinSpec {
  std::vector<std::optional<BinRange>> columns;
};

// Equal-width bins over the observed real range of every numerical column.
BinSpec fit_bins(const TableData& real, std::size_t bins = kDefaultBins);

// Replaces numerical columns with categorical bin-index columns. Synthetic values
// outside the real range clamp to the edge bins; missing cells stay excluded.
AlignedPair bin_numeric(const AlignedPair& pair, const BinSpec& spec);

struct TupleDetail {
  VariableTuple tuple;
  std::string label;
  ColumnKind kind = ColumnKind::Categorical;
  std::size_t n_cells = 0;
  double mae_point_mean = 0.0;
  double mae_variable_l1 = 0.0;
  std::optional<double> coverage;
  std::optional<double> invented;
  std::optional<double> hist_iou;
  std::optional<double> jsd;
};

struct ColumnMissingRate {
  std::string column;
  double real = 0.0;
  double synth = 0.0;
};

struct Wasserstein {
  std::string column;
  double distance = 0.0;
};

struct QualityReport {
  std::string dataset_id;
  std::string model_id;
  NormalizationMode normalization_mode = NormalizationMode::PointMean;
  std::size_t bins = kDefaultBins;
  std::size_t n_real = 0;
  std::size_t n_synth = 0;

  // Values in the selected normalization mode.
  std::optional<double> mae1;
  std::optional<double> mae2;
  // Both modes, always reported when defined. Ranking uses the point-mean values.
  std::optional<double> mae1_point_mean;
  std::optional<double> mae2_point_mean;
  std::optional<double> mae1_variable_l1;
  std::optional<double> mae2_variable_l1;

  std::optional<double> coverage1;
  std::optional<double> coverage2;
  std::optional<double> invented1;
  std::optional<double> invented2;
  std::optional<double> hist_iou1;
  std::optional<double> hist_iou2;
  std::optional<double> jsd2;
  std::vector<Wasserstein> wd1;
  std::vector<ColumnMissingRate> numeric_missing;

  std::vector<TupleDetail> details;

  // Looks up a headline metric by name ("mae2", "hist_iou2", "wd1_mean", ...).
  std::optional<double> metric(std::string_view name) const;
};

struct EvaluateOptions {
  NormalizationMode mode = NormalizationMode::PointMean;
  std::size_t bins = kDefaultBins;
  std::size_t threads = 0;  // 0: SYNTHQA_THREADS, then hardware concurrency
  std::string dataset_id;
  std::string model_id;
};

// Report plus the marginal tables behind it (tables[i] belongs to details[i]).
struct Evaluation {
  QualityReport report;
  std::vector<MarginalTable> tables;
  // Aligned and binned data the tables were counted on (level names for plots).
  std::optional<AlignedPair> pair;
};

Evaluation evaluate_full(const TableData& real, const TableData& synth, const EvaluateOptions& options = {});
QualityReport evaluate(const TableData& real, const TableData& synth, const EvaluateOptions& options = {});

}  // namespace synthqa
