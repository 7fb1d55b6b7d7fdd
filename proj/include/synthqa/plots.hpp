#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "synthqa/metrics.hpp"

namespace synthqa {

enum class PointClass : std::uint8_t { Shared, RealOnly, SynthOnly };

std::string_view to_string(PointClass cls);
PointClass point_class_from_string(std::string_view text);

// One union-support cell of a marginal table: x = p_real, y = p_synth.
// Points on the x-axis are real-only (coverage loss); on the y-axis synth-only (invented).
struct ScatterPoint {
  std::size_t table = 0;
  std::string label;
  double x = 0.0;
  double y = 0.0;
  PointClass cls = PointClass::Shared;
};

struct QQSeries {
  std::string name;
  std::vector<double> real_q;
  std::vector<double> synth_q;
};

// `labels` supplies level names; without it labels stay empty.
std::vector<ScatterPoint> scatter_points(std::span<const MarginalTable> tables, std::size_t degree,
                                         const AlignedPair* labels = nullptr);

inline constexpr std::size_t kQQPoints = 101;

// Quantile pairs, both sides min-max normalized by the real range.
QQSeries qq_series(std::string name, std::span<const double> real_values, std::span<const double> synth_values,
                   std::size_t n_points = kQQPoints);

struct ScatterStyle {
  bool log_scale = false;
  std::size_t max_points = 200000;
  std::uint64_t seed = 0;
};

std::string render_scatter(std::span<const ScatterPoint> points, const std::string& title,
                           const ScatterStyle& style = {});
std::string render_qq(std::span<const QQSeries> series, const std::string& title);

struct PlotData {
  std::vector<ScatterPoint> scatter1;
  std::vector<ScatterPoint> scatter2;
  std::vector<QQSeries> qq;
  bool has_scatter1 = false;
  bool has_scatter2 = false;
};

PlotData collect_plot_data(const Evaluation& evaluation, const TableData& real, const TableData& synth);

// Writes <dataset>_<model>_{scatter1,scatter2,qq}.svg for the figures that apply.
std::vector<std::filesystem::path> write_figures(const std::filesystem::path& dir, const std::string& dataset,
                                                 const std::string& model, const PlotData& data,
                                                 const ScatterStyle& style = {});

}  // namespace synthqa
