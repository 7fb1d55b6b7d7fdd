#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "synthqa/metrics.hpp"
#include "synthqa/pareto.hpp"

namespace synthqa {

enum class DatasetKind { Categorical, Numerical, Mixed };

std::string_view to_string(DatasetKind kind);

struct TableColumn {
  std::string metric;
  Direction direction;
};

// Column layout of the main results table.
const std::vector<TableColumn>& ranking_columns();

struct RankedModel {
  std::size_t rank = 0;
  std::string model_id;
  std::map<std::string, std::optional<double>> values;
  std::vector<std::string> best_in;  // columns where this model holds the best value
  bool pareto = false;               // mixed datasets: non-dominated on (mae2, hist_iou2)
};

struct Ranking {
  std::string dataset_id;
  DatasetKind kind = DatasetKind::Categorical;
  std::string sort_metric;
  std::vector<RankedModel> rows;
};

// Categorical data sorts by mae2 ascending, numerical by hist_iou2 descending,
// mixed by mae2 with Pareto membership on (mae2, hist_iou2). mae2 is the
// point-mean value. Ties fall back to model_id. Throws MixedDatasets, EmptyList.
Ranking rank_models(const std::vector<QualityReport>& reports);

nlohmann::json ranking_to_json(const Ranking& ranking);
std::string ranking_to_csv(const std::vector<Ranking>& rankings);

struct Improvement {
  std::string metric;
  std::optional<double> default_value;
  std::optional<double> hpo_value;
  std::optional<double> delta;
  std::optional<double> pct;  // fraction, sign preserved
  bool zero_baseline = false;
};

Improvement improvement(double default_value, double hpo_value);
// One entry per headline metric (mae2, hist_iou2). Throws InvalidArgument when
// the reports belong to different datasets or models.
std::vector<Improvement> improvement(const QualityReport& default_report, const QualityReport& hpo_report);

struct ImprovementRow {
  std::string dataset_id;
  std::string model_id;
  std::vector<Improvement> metrics;
};

nlohmann::json improvements_to_json(const std::vector<ImprovementRow>& rows);
std::string improvements_to_csv(const std::vector<ImprovementRow>& rows);

// Model ids ordered by one metric; reports lacking it are left out.
std::vector<std::string> ranking_by(const std::vector<QualityReport>& reports, std::string_view metric,
                                    Direction direction);

// Kendall tau-a between two orderings of the same models.
double kendall_tau(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct RankingComparison {
  std::vector<std::string> metrics;
  std::vector<std::vector<double>> tau;  // [i][j] between metrics[i] and metrics[j]
  std::map<std::string, std::vector<std::string>> orders;
};

// Throws ModelSetMismatch when the rankings do not cover the same models.
RankingComparison compare_rankings(const std::map<std::string, std::vector<std::string>>& rankings);

nlohmann::json comparison_to_json(const RankingComparison& comparison);
// Side-by-side order table: one row per position, one column per metric.
std::string comparison_to_csv(const RankingComparison& comparison);

}  // namespace synthqa
