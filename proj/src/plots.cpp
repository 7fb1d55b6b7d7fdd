#include "synthqa/plots.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "synthqa/random.hpp"

namespace synthqa {

namespace {

constexpr double kWidth = 520.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 70.0;
constexpr double kTop = 50.0;
constexpr double kSide = 400.0;  // square plot area
constexpr double kLogFloor = 1e-5;

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* class_color(PointClass cls) {
  switch (cls) {
    case PointClass::Shared: return "#1f77b4";
    case PointClass::RealOnly: return "#d62728";
    case PointClass::SynthOnly: return "#2ca02c";
  }
  return "#000000";
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Axis {
  bool log_scale = false;

  double map(double v) const {
    if (!log_scale) return std::clamp(v, 0.0, 1.0);
    const double lv = std::log10(std::max(v, kLogFloor));
    const double lo = std::log10(kLogFloor);
    return std::clamp((lv - lo) / (0.0 - lo), 0.0, 1.0);
  }
  double px(double v) const { return kLeft + map(v) * kSide; }
  double py(double v) const { return kTop + kSide - map(v) * kSide; }
};

void open_svg(std::string& out, const std::string& title) {
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(kWidth) + "\" height=\"" +
         fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) + "\" fill=\"#ffffff\"/>\n";
  out += "<text x=\"" + fmt(kLeft + kSide / 2) + "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" + escape(title) + "</text>\n";
}

void draw_frame(std::string& out, const Axis& axis, const std::string& xlabel, const std::string& ylabel) {
  out += "<g class=\"axes\" stroke=\"#000000\" stroke-width=\"1\" fill=\"none\">\n";
  out += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(kSide) + "\" height=\"" +
         fmt(kSide) + "\"/>\n";
  std::vector<std::pair<double, std::string>> ticks;
  if (axis.log_scale) {
    for (int e = -5; e <= 0; ++e) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "1e%d", e);
      ticks.emplace_back(std::pow(10.0, e), buf);
    }
  } else {
    for (int i = 0; i <= 5; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%.1f", i * 0.2);
      ticks.emplace_back(i * 0.2, buf);
    }
  }
  for (const auto& [v, _] : ticks) {
    out += "<line x1=\"" + fmt(axis.px(v)) + "\" y1=\"" + fmt(kTop + kSide) + "\" x2=\"" + fmt(axis.px(v)) +
           "\" y2=\"" + fmt(kTop + kSide + 5) + "\"/>\n";
    out += "<line x1=\"" + fmt(kLeft - 5) + "\" y1=\"" + fmt(axis.py(v)) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" +
           fmt(axis.py(v)) + "\"/>\n";
  }
  out += "</g>\n<g class=\"tick-labels\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#000000\">\n";
  for (const auto& [v, text] : ticks) {
    out += "<text x=\"" + fmt(axis.px(v)) + "\" y=\"" + fmt(kTop + kSide + 18) + "\" text-anchor=\"middle\">" +
           text + "</text>\n";
    out += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(axis.py(v) + 4) + "\" text-anchor=\"end\">" + text +
           "</text>\n";
  }
  out += "<text x=\"" + fmt(kLeft + kSide / 2) + "\" y=\"" + fmt(kTop + kSide + 38) +
         "\" text-anchor=\"middle\" font-size=\"13\">" + escape(xlabel) + "</text>\n";
  out += "<text x=\"" + fmt(kLeft - 48) + "\" y=\"" + fmt(kTop + kSide / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 " + fmt(kLeft - 48) + " " +
         fmt(kTop + kSide / 2) + ")\">" + escape(ylabel) + "</text>\n";
  out += "</g>\n";
}

void draw_diagonal(std::string& out) {
  out += "<line class=\"diagonal\" x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + kSide) + "\" x2=\"" +
         fmt(kLeft + kSide) + "\" y2=\"" + fmt(kTop) + "\" stroke=\"#808080\" stroke-width=\"1\" "
         "stroke-dasharray=\"4 3\"/>\n";
}

// Indices of at most `cap` points, chosen deterministically from `seed`, in input order.
std::vector<std::size_t> subsample(std::size_t n, std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (n <= cap) return idx;
  Rng rng(seed);
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::string_view to_string(PointClass cls) {
  switch (cls) {
    case PointClass::Shared: return "shared";
    case PointClass::RealOnly: return "real_only";
    case PointClass::SynthOnly: return "synth_only";
  }
  return "shared";
}

PointClass point_class_from_string(std::string_view text) {
  if (text == "shared") return PointClass::Shared;
  if (text == "real_only") return PointClass::RealOnly;
  if (text == "synth_only") return PointClass::SynthOnly;
  throw Error(ErrorCode::InvalidArgument, "unknown point class '" + std::string(text) + "'");
}

std::vector<ScatterPoint> scatter_points(std::span<const MarginalTable> tables, std::size_t degree,
                                         const AlignedPair* labels) {
  std::vector<ScatterPoint> points;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    const auto& table = tables[t];
    if (table.tuple.degree() != degree) {
      throw Error(ErrorCode::InvalidArgument, "table degree does not match requested degree");
    }
    for (const auto& cell : table.cells) {
      ScatterPoint p;
      p.table = t;
      p.x = table.p_real(cell);
      p.y = table.p_synth(cell);
      p.cls = cell.count_real == 0 ? PointClass::SynthOnly
                                   : (cell.count_synth == 0 ? PointClass::RealOnly : PointClass::Shared);
      if (labels) {
        for (std::size_t i = 0; i < degree; ++i) {
          const std::size_t col = table.tuple[i];
          if (i) p.label += ", ";
          p.label += labels->schema.columns[col].name + "=" + labels->real.categorical(col).levels[cell.codes[i]];
        }
      }
      points.push_back(std::move(p));
    }
  }
  return points;
}

QQSeries qq_series(std::string name, std::span<const double> real_values, std::span<const double> synth_values,
                   std::size_t n_points) {
  QQSeries s;
  s.name = std::move(name);
  s.real_q = quantiles(real_values, n_points);
  s.synth_q = quantiles(synth_values, n_points);
  const auto [lo_it, hi_it] = std::minmax_element(real_values.begin(), real_values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  // A constant real column is centred in the plot instead of normalized.
  const double scale = range > 0.0 ? range : 1.0;
  const double offset = range > 0.0 ? lo : lo - 0.5;
  for (auto& v : s.real_q) v = (v - offset) / scale;
  for (auto& v : s.synth_q) v = (v - offset) / scale;
  return s;
}

std::string render_scatter(std::span<const ScatterPoint> points, const std::string& title,
                           const ScatterStyle& style) {
  const Axis axis{style.log_scale};
  std::string out;
  open_svg(out, title);
  draw_frame(out, axis, style.log_scale ? "p real (log)" : "p real", style.log_scale ? "p synth (log)" : "p synth");
  draw_diagonal(out);

  const auto keep = subsample(points.size(), style.max_points, style.seed);
  for (PointClass cls : {PointClass::Shared, PointClass::RealOnly, PointClass::SynthOnly}) {
    out += "<g class=\"points " + std::string(to_string(cls)) + "\" fill=\"" + class_color(cls) +
           "\" fill-opacity=\"0.6\">\n";
    for (auto i : keep) {
      const auto& p = points[i];
      if (p.cls != cls) continue;
      out += "<circle cx=\"" + fmt(axis.px(p.x)) + "\" cy=\"" + fmt(axis.py(p.y)) + "\" r=\"2.5\"";
      if (p.label.empty()) {
        out += "/>\n";
      } else {
        out += "><title>" + escape(p.label) + "</title></circle>\n";
      }
    }
    out += "</g>\n";
  }
  if (keep.size() < points.size()) {
    out += "<text x=\"" + fmt(kLeft + kSide) + "\" y=\"" + fmt(kTop - 6) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">showing " +
           std::to_string(keep.size()) + " of " + std::to_string(points.size()) + " points</text>\n";
  }
  const std::array<std::pair<PointClass, const char*>, 3> legend = {
      {{PointClass::Shared, "in both"}, {PointClass::RealOnly, "real only (x-axis)"},
       {PointClass::SynthOnly, "synthetic only (y-axis)"}}};
  double y = kTop + 12;
  out += "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (const auto& [cls, text] : legend) {
    out += "<circle cx=\"" + fmt(kLeft + 10) + "\" cy=\"" + fmt(y - 4) + "\" r=\"4\" fill=\"" + class_color(cls) +
           "\"/>\n";
    out += "<text x=\"" + fmt(kLeft + 18) + "\" y=\"" + fmt(y) + "\">" + text + "</text>\n";
    y += 15;
  }
  out += "</g>\n</svg>\n";
  return out;
}

std::string render_qq(std::span<const QQSeries> series, const std::string& title) {
  if (series.empty()) {
    throw Error(ErrorCode::EmptySeries, "QQ plot needs at least one series");
  }
  const Axis axis{false};
  std::string out;
  open_svg(out, title);
  out += "<defs><clipPath id=\"plot-area\"><rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" +
         fmt(kSide) + "\" height=\"" + fmt(kSide) + "\"/></clipPath></defs>\n";
  draw_frame(out, axis, "real quantile (normalized)", "synthetic quantile (normalized)");
  draw_diagonal(out);
  out += "<g class=\"series\" clip-path=\"url(#plot-area)\" fill=\"none\" stroke-width=\"1.5\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    out += "<polyline stroke=\"" + std::string(kPalette[i % kPalette.size()]) + "\" points=\"";
    for (std::size_t j = 0; j < s.real_q.size() && j < s.synth_q.size(); ++j) {
      if (j) out.push_back(' ');
      // Unclamped so shifted series keep their offset; the clip path trims them.
      out += fmt(kLeft + s.real_q[j] * kSide) + "," + fmt(kTop + kSide - s.synth_q[j] * kSide);
    }
    out += "\"><title>" + escape(s.name) + "</title></polyline>\n";
  }
  out += "</g>\n<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
  double y = kTop + 12;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % kPalette.size()];
    out += "<line x1=\"" + fmt(kLeft + 6) + "\" y1=\"" + fmt(y - 4) + "\" x2=\"" + fmt(kLeft + 20) + "\" y2=\"" +
           fmt(y - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + fmt(kLeft + 24) + "\" y=\"" + fmt(y) + "\">" + escape(series[i].name) + "</text>\n";
    y += 14;
  }
  out += "</g>\n</svg>\n";
  return out;
}

PlotData collect_plot_data(const Evaluation& evaluation, const TableData& real, const TableData& synth) {
  PlotData data;
  const auto& details = evaluation.report.details;
  std::vector<MarginalTable> deg1;
  std::vector<MarginalTable> deg2;
  for (std::size_t i = 0; i < details.size(); ++i) {
    if (details[i].kind != ColumnKind::Categorical) continue;
    (details[i].tuple.degree() == 1 ? deg1 : deg2).push_back(evaluation.tables[i]);
  }
  const AlignedPair* labels = evaluation.pair ? &*evaluation.pair : nullptr;
  data.has_scatter1 = !deg1.empty();
  data.has_scatter2 = !deg2.empty();
  data.scatter1 = scatter_points(deg1, 1, labels);
  data.scatter2 = scatter_points(deg2, 2, labels);
  const Schema& schema = real.schema();
  for (std::size_t c : schema.indices_of(ColumnKind::Numerical)) {
    const auto rv = real.numerical(c).present_values();
    const auto sv = synth.numerical(c).present_values();
    if (rv.empty() || sv.empty()) continue;
    data.qq.push_back(qq_series(schema.columns[c].name, rv, sv));
  }
  return data;
}

std::vector<std::filesystem::path> write_figures(const std::filesystem::path& dir, const std::string& dataset,
                                                 const std::string& model, const PlotData& data,
                                                 const ScatterStyle& style) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& figure, const std::string& svg) {
    const auto path = dir / (dataset + "_" + model + "_" + figure + ".svg");
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    }
    out << svg;
    written.push_back(path);
  };
  const std::string prefix = dataset + " / " + model;
  if (data.has_scatter1) emit("scatter1", render_scatter(data.scatter1, prefix + ": 1-way marginals", style));
  if (data.has_scatter2) emit("scatter2", render_scatter(data.scatter2, prefix + ": 2-way marginals", style));
  if (!data.qq.empty()) emit("qq", render_qq(data.qq, prefix + ": QQ"));
  return written;
}

}  // namespace synthqa
