#include "synthqa/rank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace synthqa {

using nlohmann::json;

namespace {

std::optional<double> table_value(const QualityReport& r, std::string_view metric) {
  if (metric == "mae1") return r.mae1_point_mean ? r.mae1_point_mean : r.mae1;
  if (metric == "mae2") return r.mae2_point_mean ? r.mae2_point_mean : r.mae2;
  return r.metric(metric);
}

bool better(double a, double b, Direction d) { return d == Direction::Minimize ? a < b : a > b; }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fmt(const std::optional<double>& v, const char* pattern = "%.17g") {
  if (!v) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, pattern, *v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::Categorical: return "categorical";
    case DatasetKind::Numerical: return "numerical";
    case DatasetKind::Mixed: return "mixed";
  }
  return "categorical";
}

const std::vector<TableColumn>& ranking_columns() {
  static const std::vector<TableColumn> columns = {
      {"mae1", Direction::Minimize},      {"mae2", Direction::Minimize},      {"coverage1", Direction::Maximize},
      {"coverage2", Direction::Maximize}, {"invented2", Direction::Minimize}, {"hist_iou1", Direction::Maximize},
      {"hist_iou2", Direction::Maximize}};
  return columns;
}

Ranking rank_models(const std::vector<QualityReport>& reports) {
  if (reports.empty()) throw Error(ErrorCode::EmptyList, "no reports to rank");
  Ranking ranking;
  ranking.dataset_id = reports[0].dataset_id;
  std::set<std::string> models;
  for (const auto& r : reports) {
    if (r.dataset_id != ranking.dataset_id) {
      throw Error(ErrorCode::MixedDatasets,
                  "reports cover datasets '" + ranking.dataset_id + "' and '" + r.dataset_id + "'");
    }
    if (!models.insert(r.model_id).second) {
      throw Error(ErrorCode::InvalidArgument, "model '" + r.model_id + "' reported twice for '" + r.dataset_id + "'");
    }
  }
  auto all_have = [&](std::string_view m) {
    return std::all_of(reports.begin(), reports.end(), [&](const QualityReport& r) { return table_value(r, m).has_value(); });
  };
  const bool cat = all_have("mae2");
  const bool num = all_have("hist_iou2");
  if (cat && num) {
    ranking.kind = DatasetKind::Mixed;
    ranking.sort_metric = "mae2";
  } else if (cat) {
    ranking.kind = DatasetKind::Categorical;
    ranking.sort_metric = "mae2";
  } else if (num) {
    ranking.kind = DatasetKind::Numerical;
    ranking.sort_metric = "hist_iou2";
  } else {
    throw Error(ErrorCode::InvalidArgument,
                "reports for '" + ranking.dataset_id + "' share neither mae2 nor hist_iou2; nothing to rank by");
  }
  const Direction dir = ranking.kind == DatasetKind::Numerical ? Direction::Maximize : Direction::Minimize;

  std::vector<std::size_t> order(reports.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double x = *table_value(reports[a], ranking.sort_metric);
    const double y = *table_value(reports[b], ranking.sort_metric);
    if (x != y) return better(x, y, dir);
    return reports[a].model_id < reports[b].model_id;
  });

  std::vector<bool> on_front(reports.size(), false);
  if (ranking.kind == DatasetKind::Mixed) {
    std::vector<Point> points;
    for (const auto& r : reports) points.push_back({*table_value(r, "mae2"), *table_value(r, "hist_iou2")});
    const auto fronts = non_dominated_sort(points, {Direction::Minimize, Direction::Maximize});
    for (auto i : fronts.front()) on_front[i] = true;
  }

  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto& r = reports[order[pos]];
    RankedModel row;
    row.rank = pos + 1;
    row.model_id = r.model_id;
    row.pareto = on_front[order[pos]];
    for (const auto& col : ranking_columns()) row.values[col.metric] = table_value(r, col.metric);
    ranking.rows.push_back(std::move(row));
  }
  for (const auto& col : ranking_columns()) {
    std::optional<double> best;
    for (const auto& row : ranking.rows) {
      const auto& v = row.values.at(col.metric);
      if (v && (!best || better(*v, *best, col.direction))) best = v;
    }
    if (!best) continue;
    for (auto& row : ranking.rows) {
      if (row.values.at(col.metric) == best) row.best_in.push_back(col.metric);
    }
  }
  return ranking;
}

json ranking_to_json(const Ranking& ranking) {
  json rows = json::array();
  for (const auto& row : ranking.rows) {
    json values = json::object();
    for (const auto& col : ranking_columns()) values[col.metric] = opt(row.values.at(col.metric));
    json item{{"rank", row.rank}, {"model_id", row.model_id}, {"metrics", std::move(values)}, {"best_in", row.best_in}};
    if (ranking.kind == DatasetKind::Mixed) item["pareto"] = row.pareto;
    rows.push_back(std::move(item));
  }
  return json{{"dataset_id", ranking.dataset_id},
              {"kind", std::string(to_string(ranking.kind))},
              {"sort_metric", ranking.sort_metric},
              {"rows", std::move(rows)}};
}

std::string ranking_to_csv(const std::vector<Ranking>& rankings) {
  std::string out = "dataset,rank,model";
  for (const auto& col : ranking_columns()) out += "," + col.metric;
  out += ",pareto,best_in\n";
  for (const auto& ranking : rankings) {
    for (const auto& row : ranking.rows) {
      out += csv_field(ranking.dataset_id) + "," + std::to_string(row.rank) + "," + csv_field(row.model_id);
      for (const auto& col : ranking_columns()) out += "," + fmt(row.values.at(col.metric), "%.4f");
      out += ",";
      if (ranking.kind == DatasetKind::Mixed) out += row.pareto ? "yes" : "no";
      std::string best;
      for (const auto& m : row.best_in) best += (best.empty() ? "" : ";") + m;
      out += "," + best + "\n";
    }
  }
  return out;
}

Improvement improvement(double default_value, double hpo_value) {
  Improvement imp;
  imp.default_value = default_value;
  imp.hpo_value = hpo_value;
  imp.delta = hpo_value - default_value;
  if (default_value == 0.0) {
    imp.zero_baseline = true;
  } else {
    imp.pct = *imp.delta / default_value;
  }
  return imp;
}

std::vector<Improvement> improvement(const QualityReport& default_report, const QualityReport& hpo_report) {
  if (default_report.dataset_id != hpo_report.dataset_id || default_report.model_id != hpo_report.model_id) {
    throw Error(ErrorCode::InvalidArgument, "improvement needs reports of the same dataset and model");
  }
  std::vector<Improvement> out;
  for (const char* metric : {"mae2", "hist_iou2"}) {
    const auto d = table_value(default_report, metric);
    const auto h = table_value(hpo_report, metric);
    Improvement imp;
    if (d && h) imp = improvement(*d, *h);
    imp.metric = metric;
    imp.default_value = d;
    imp.hpo_value = h;
    out.push_back(std::move(imp));
  }
  return out;
}

json improvements_to_json(const std::vector<ImprovementRow>& rows) {
  json arr = json::array();
  for (const auto& row : rows) {
    json metrics = json::object();
    for (const auto& m : row.metrics) {
      metrics[m.metric] = {{"default", opt(m.default_value)},
                           {"hpo", opt(m.hpo_value)},
                           {"delta", opt(m.delta)},
                           {"pct", opt(m.pct)},
                           {"zero_baseline", m.zero_baseline}};
    }
    arr.push_back({{"dataset_id", row.dataset_id}, {"model_id", row.model_id}, {"metrics", std::move(metrics)}});
  }
  return arr;
}

std::string improvements_to_csv(const std::vector<ImprovementRow>& rows) {
  std::string out = "dataset,model";
  for (const char* m : {"mae2", "hist_iou2"}) {
    const std::string p(m);
    out += "," + p + "_default," + p + "_hpo," + p + "_delta," + p + "_pct";
  }
  out += "\n";
  for (const auto& row : rows) {
    out += csv_field(row.dataset_id) + "," + csv_field(row.model_id);
    for (const auto& m : row.metrics) {
      const bool na = m.default_value && !m.hpo_value;
      out += "," + fmt(m.default_value, "%.4f");
      out += "," + (na ? std::string("N/A") : fmt(m.hpo_value, "%.4f"));
      out += "," + (na ? std::string("N/A") : fmt(m.delta, "%.4f"));
      std::string pct;
      if (na) {
        pct = "N/A";
      } else if (m.zero_baseline) {
        pct = "zero baseline";
      } else if (m.pct) {
        pct = fmt(*m.pct * 100.0, "%.0f") + "%";
      }
      out += "," + pct;
    }
    out += "\n";
  }
  return out;
}

std::vector<std::string> ranking_by(const std::vector<QualityReport>& reports, std::string_view metric,
                                    Direction direction) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& r : reports) {
    if (auto v = table_value(r, metric)) scored.emplace_back(*v, r.model_id);
  }
  std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return better(a.first, b.first, direction);
    return a.second < b.second;
  });
  std::vector<std::string> out;
  for (auto& [v, id] : scored) out.push_back(std::move(id));
  return out;
}

double kendall_tau(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.size() != b.size() || std::set<std::string>(a.begin(), a.end()) != std::set<std::string>(b.begin(), b.end())) {
    throw Error(ErrorCode::ModelSetMismatch, "rankings cover different models");
  }
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::map<std::string, std::size_t> pos_b;
  for (std::size_t i = 0; i < n; ++i) pos_b[b[i]] = i;
  long long concordant = 0;
  long long discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (pos_b[a[i]] < pos_b[a[j]]) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  return static_cast<double>(concordant - discordant) / static_cast<double>(n * (n - 1) / 2);
}

RankingComparison compare_rankings(const std::map<std::string, std::vector<std::string>>& rankings) {
  if (rankings.empty()) throw Error(ErrorCode::EmptyList, "no rankings to compare");
  RankingComparison cmp;
  for (const auto& [metric, order] : rankings) cmp.metrics.push_back(metric);
  cmp.orders = rankings;
  const std::size_t m = cmp.metrics.size();
  cmp.tau.assign(m, std::vector<double>(m, 1.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double t = kendall_tau(rankings.at(cmp.metrics[i]), rankings.at(cmp.metrics[j]));
      cmp.tau[i][j] = cmp.tau[j][i] = t;
    }
  }
  if (m == 1) kendall_tau(rankings.begin()->second, rankings.begin()->second);
  return cmp;
}

json comparison_to_json(const RankingComparison& cmp) {
  return json{{"metrics", cmp.metrics}, {"kendall_tau", cmp.tau}, {"orders", cmp.orders}};
}

std::string comparison_to_csv(const RankingComparison& cmp) {
  std::string out = "position";
  for (const auto& m : cmp.metrics) out += "," + csv_field(m);
  out += "\n";
  const std::size_t n = cmp.orders.empty() ? 0 : cmp.orders.begin()->second.size();
  for (std::size_t pos = 0; pos < n; ++pos) {
    out += std::to_string(pos + 1);
    for (const auto& m : cmp.metrics) out += "," + csv_field(cmp.orders.at(m)[pos]);
    out += "\n";
  }
  return out;
}

}  // namespace synthqa
