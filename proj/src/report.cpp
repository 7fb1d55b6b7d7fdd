#include "synthqa/report.hpp"

#include <fstream>
#include <sstream>

namespace synthqa {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> get_opt(const json& obj, const char* key) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  return obj[key].get<double>();
}

constexpr const char* kMetricNames[] = {"mae1",      "mae2",      "mae1_point_mean", "mae2_point_mean",
                                        "mae1_variable_l1", "mae2_variable_l1", "coverage1", "coverage2",
                                        "invented1", "invented2", "hist_iou1", "hist_iou2", "jsd2"};

std::optional<double>* metric_slot(QualityReport& r, std::string_view name) {
  if (name == "mae1") return &r.mae1;
  if (name == "mae2") return &r.mae2;
  if (name == "mae1_point_mean") return &r.mae1_point_mean;
  if (name == "mae2_point_mean") return &r.mae2_point_mean;
  if (name == "mae1_variable_l1") return &r.mae1_variable_l1;
  if (name == "mae2_variable_l1") return &r.mae2_variable_l1;
  if (name == "coverage1") return &r.coverage1;
  if (name == "coverage2") return &r.coverage2;
  if (name == "invented1") return &r.invented1;
  if (name == "invented2") return &r.invented2;
  if (name == "hist_iou1") return &r.hist_iou1;
  if (name == "hist_iou2") return &r.hist_iou2;
  if (name == "jsd2") return &r.jsd2;
  return nullptr;
}

json points_json(const std::vector<ScatterPoint>& points) {
  json arr = json::array();
  for (const auto& p : points) {
    arr.push_back(json::array({p.table, p.x, p.y, std::string(to_string(p.cls)), p.label}));
  }
  return arr;
}

std::vector<ScatterPoint> points_from_json(const json& arr) {
  std::vector<ScatterPoint> out;
  for (const auto& e : arr) {
    ScatterPoint p;
    p.table = e.at(0).get<std::size_t>();
    p.x = e.at(1).get<double>();
    p.y = e.at(2).get<double>();
    p.cls = point_class_from_string(e.at(3).get<std::string>());
    p.label = e.at(4).get<std::string>();
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

json report_to_json(const QualityReport& r, const PlotData* plots) {
  json doc;
  doc["dataset_id"] = r.dataset_id;
  doc["model_id"] = r.model_id;
  doc["normalization_mode"] = std::string(to_string(r.normalization_mode));
  doc["bins"] = r.bins;
  doc["n_real"] = r.n_real;
  doc["n_synth"] = r.n_synth;
  json metrics = json::object();
  for (const char* name : kMetricNames) metrics[name] = opt(r.metric(name));
  doc["metrics"] = std::move(metrics);

  json wd = json::array();
  for (const auto& w : r.wd1) wd.push_back({{"column", w.column}, {"distance", w.distance}});
  doc["wd1"] = std::move(wd);
  json missing = json::array();
  for (const auto& m : r.numeric_missing) missing.push_back({{"column", m.column}, {"real", m.real}, {"synth", m.synth}});
  doc["numeric_missing"] = std::move(missing);

  json details = json::array();
  for (const auto& d : r.details) {
    details.push_back({{"tuple", d.tuple.columns()},
                       {"label", d.label},
                       {"kind", std::string(to_string(d.kind))},
                       {"degree", d.tuple.degree()},
                       {"n_cells", d.n_cells},
                       {"mae_point_mean", d.mae_point_mean},
                       {"mae_variable_l1", d.mae_variable_l1},
                       {"coverage", opt(d.coverage)},
                       {"invented", opt(d.invented)},
                       {"hist_iou", opt(d.hist_iou)},
                       {"jsd", opt(d.jsd)}});
  }
  doc["details"] = std::move(details);

  if (plots) {
    json pd;
    pd["scatter1"] = plots->has_scatter1 ? points_json(plots->scatter1) : json(nullptr);
    pd["scatter2"] = plots->has_scatter2 ? points_json(plots->scatter2) : json(nullptr);
    json qq = json::array();
    for (const auto& s : plots->qq) qq.push_back({{"name", s.name}, {"real", s.real_q}, {"synth", s.synth_q}});
    pd["qq"] = std::move(qq);
    doc["plot_data"] = std::move(pd);
  }
  return doc;
}

QualityReport report_from_json(const json& doc) {
  QualityReport r;
  try {
    r.dataset_id = doc.at("dataset_id").get<std::string>();
    r.model_id = doc.at("model_id").get<std::string>();
    r.normalization_mode = normalization_mode_from_string(doc.value("normalization_mode", "point-mean"));
    r.bins = doc.value("bins", kDefaultBins);
    r.n_real = doc.value("n_real", std::size_t{0});
    r.n_synth = doc.value("n_synth", std::size_t{0});
    const json& metrics = doc.at("metrics");
    for (const char* name : kMetricNames) *metric_slot(r, name) = get_opt(metrics, name);
    if (doc.contains("wd1")) {
      for (const auto& w : doc["wd1"]) r.wd1.push_back({w.at("column").get<std::string>(), w.at("distance").get<double>()});
    }
    if (doc.contains("numeric_missing")) {
      for (const auto& m : doc["numeric_missing"]) {
        r.numeric_missing.push_back(
            {m.at("column").get<std::string>(), m.at("real").get<double>(), m.at("synth").get<double>()});
      }
    }
    if (doc.contains("details")) {
      for (const auto& d : doc["details"]) {
        TupleDetail t;
        t.tuple = VariableTuple(d.at("tuple").get<std::vector<std::size_t>>());
        t.label = d.value("label", "");
        t.kind = column_kind_from_string(d.at("kind").get<std::string>());
        t.n_cells = d.value("n_cells", std::size_t{0});
        t.mae_point_mean = d.at("mae_point_mean").get<double>();
        t.mae_variable_l1 = d.at("mae_variable_l1").get<double>();
        t.coverage = get_opt(d, "coverage");
        t.invented = get_opt(d, "invented");
        t.hist_iou = get_opt(d, "hist_iou");
        t.jsd = get_opt(d, "jsd");
        r.details.push_back(std::move(t));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed quality report: ") + e.what());
  }
  return r;
}

std::optional<PlotData> plot_data_from_json(const json& doc) {
  if (!doc.contains("plot_data") || doc["plot_data"].is_null()) return std::nullopt;
  const json& pd = doc["plot_data"];
  PlotData data;
  try {
    if (pd.contains("scatter1") && !pd["scatter1"].is_null()) {
      data.has_scatter1 = true;
      data.scatter1 = points_from_json(pd["scatter1"]);
    }
    if (pd.contains("scatter2") && !pd["scatter2"].is_null()) {
      data.has_scatter2 = true;
      data.scatter2 = points_from_json(pd["scatter2"]);
    }
    if (pd.contains("qq")) {
      for (const auto& s : pd["qq"]) {
        data.qq.push_back({s.at("name").get<std::string>(), s.at("real").get<std::vector<double>>(),
                           s.at("synth").get<std::vector<double>>()});
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed plot data: ") + e.what());
  }
  return data;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": malformed JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  }
  out << text;
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace synthqa
