#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracle.hpp"
#include "synthqa/plots.hpp"
#include "synthqa/report.hpp"

using namespace synthqa;

namespace {

Schema cat_schema(std::size_t n) {
  Schema s;
  for (std::size_t i = 0; i < n; ++i) s.columns.push_back({"c" + std::to_string(i), ColumnKind::Categorical});
  return s;
}

std::vector<MarginalTable> tables_of_degree(const Evaluation& ev, std::size_t degree) {
  std::vector<MarginalTable> out;
  for (std::size_t i = 0; i < ev.tables.size(); ++i) {
    if (ev.report.details[i].kind == ColumnKind::Categorical && ev.tables[i].tuple.degree() == degree) {
      out.push_back(ev.tables[i]);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("toy scatter points") {
  const Schema s = cat_schema(2);
  const auto real = TableData::from_rows(s, {{"A", "X"}, {"A", "X"}, {"B", "Y"}, {"B", "Y"}});
  const auto synth = TableData::from_rows(s, {{"A", "X"}, {"A", "Y"}, {"B", "Y"}, {"B", "X"}});
  const auto ev = evaluate_full(real, synth);
  const auto tables = tables_of_degree(ev, 2);
  const auto pts = scatter_points(tables, 2, &*ev.pair);
  REQUIRE(pts.size() == 4);
  std::size_t shared = 0, synth_only = 0;
  for (const auto& p : pts) {
    if (p.cls == PointClass::Shared) {
      ++shared;
      CHECK(p.x == 0.5);
      CHECK(p.y == 0.25);
    } else {
      CHECK(p.cls == PointClass::SynthOnly);
      ++synth_only;
      CHECK(p.x == 0.0);
      CHECK(p.y == 0.25);
    }
    CHECK_FALSE(p.label.empty());
  }
  CHECK(shared == 2);
  CHECK(synth_only == 2);
}

TEST_CASE("scatter point at the reported cell frequencies") {
  const Schema s = cat_schema(2);
  std::vector<std::vector<std::string>> real, synth;
  for (int i = 0; i < 100; ++i) real.push_back({"MALE", i < 47 ? "C20" : "C50"});
  for (int i = 0; i < 100; ++i) synth.push_back({"MALE", i < 55 ? "C20" : "C50"});
  const auto ev = evaluate_full(TableData::from_rows(s, real), TableData::from_rows(s, synth));
  const auto pts = scatter_points(tables_of_degree(ev, 2), 2, &*ev.pair);
  bool found = false;
  for (const auto& p : pts) {
    if (p.label.find("C20") != std::string::npos) {
      CHECK(p.x == doctest::Approx(0.47));
      CHECK(p.y == doctest::Approx(0.55));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("scatter mean distance equals point-mean mae") {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 30; ++iter) {
    const auto d = oracle::random_pair(rng, 5, 4, 80, false);
    const auto ev = evaluate_full(oracle::table(d.schema, d.real), oracle::table(d.schema, d.synth));
    for (std::size_t degree : {1, 2}) {
      const auto tables = tables_of_degree(ev, degree);
      if (tables.empty()) continue;
      for (std::size_t t = 0; t < tables.size(); ++t) {
        const auto pts = scatter_points(std::span(tables).subspan(t, 1), degree);
        double s = 0;
        for (const auto& p : pts) s += std::abs(p.y - p.x);
        CHECK(std::abs(s / static_cast<double>(pts.size()) - mae(tables[t], NormalizationMode::PointMean)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("svg rendering") {
  const auto empty = render_scatter({}, "empty");
  CHECK(empty.find("<svg") != std::string::npos);
  CHECK(empty.find("</svg>") != std::string::npos);
  std::vector<ScatterPoint> one{{0, "a", 0.5, 0.5, PointClass::Shared}};
  const auto a = render_scatter(one, "one");
  CHECK(a == render_scatter(one, "one"));
  CHECK(a.find("<circle") != std::string::npos);
  ScatterStyle log;
  log.log_scale = true;
  CHECK(render_scatter(one, "one", log) != a);

  std::vector<double> v{1, 2, 3, 4, 5, 6};
  const auto same = qq_series("x", v, v, 11);
  for (std::size_t i = 0; i < same.real_q.size(); ++i) CHECK(same.real_q[i] == same.synth_q[i]);
  std::vector<double> shifted{2, 3, 4, 5, 6, 7};
  const auto up = qq_series("x", v, shifted, 11);
  for (std::size_t i = 0; i < up.real_q.size(); ++i) CHECK(up.synth_q[i] - up.real_q[i] == doctest::Approx(0.2));
  std::vector<QQSeries> series{same, up};
  const auto qq = render_qq(series, "qq");
  CHECK(qq.find("<polyline") != std::string::npos);
  CHECK_THROWS_AS(render_qq({}, "qq"), Error);
}

TEST_CASE("figures written and re-rendered from report plot data") {
  Schema s = cat_schema(2);
  s.columns.push_back({"x", ColumnKind::Numerical});
  const auto real = TableData::from_rows(s, {{"a", "p", "1"}, {"b", "q", "2"}, {"a", "q", "3"}});
  const auto synth = TableData::from_rows(s, {{"a", "p", "1.5"}, {"b", "p", "9"}});
  const auto ev = evaluate_full(real, synth);
  const auto data = collect_plot_data(ev, real, synth);
  CHECK(data.has_scatter1);
  CHECK(data.has_scatter2);
  REQUIRE(data.qq.size() == 1);
  const auto dir = std::filesystem::temp_directory_path() / "synthqa_plot_test";
  std::filesystem::remove_all(dir);
  const auto paths = write_figures(dir, "ds", "m", data);
  CHECK(paths.size() == 3);
  for (const auto& p : paths) CHECK(std::filesystem::exists(p));

  const auto doc = report_to_json(ev.report, &data);
  const auto back = plot_data_from_json(doc);
  REQUIRE(back);
  CHECK(back->scatter2.size() == data.scatter2.size());
  CHECK(render_scatter(back->scatter2, "t") == render_scatter(data.scatter2, "t"));
  CHECK_FALSE(plot_data_from_json(report_to_json(ev.report)));
  std::filesystem::remove_all(dir);
}
