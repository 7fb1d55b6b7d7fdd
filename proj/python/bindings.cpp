#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "synthqa/cli.hpp"
#include "synthqa/dataset.hpp"
#include "synthqa/domain.hpp"
#include "synthqa/metrics.hpp"
#include "synthqa/plots.hpp"
#include "synthqa/rank.hpp"
#include "synthqa/refsynth.hpp"
#include "synthqa/report.hpp"
#include "synthqa/tuner.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace synthqa;

namespace {

py::object to_py(const json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

json from_py(const py::handle& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return json::parse(text);
}

Schema schema_from_py(const py::handle& obj) { return parse_schema_json(from_py(obj).dump()); }

Direction direction_of(const std::string& text) {
  if (text == "minimize") return Direction::Minimize;
  if (text == "maximize") return Direction::Maximize;
  throw Error(ErrorCode::InvalidArgument, "direction must be minimize or maximize");
}

Study make_study(const py::handle& space, const std::vector<std::pair<std::string, std::string>>& objectives,
                 std::uint64_t seed, std::size_t budget, const std::string& stratum, const py::handle& trials) {
  Study study;
  study.space = parse_search_space(from_py(space));
  study.config.seed = seed;
  study.config.budget = budget;
  for (const auto& [metric, dir] : objectives) study.config.objectives.push_back({metric, direction_of(dir)});
  study.stratum = stratum;
  if (!trials.is_none()) {
    for (const auto& t : from_py(trials)) study.trials.push_back(trial_from_json(t));
  }
  return study;
}

py::list trials_to_py(const std::vector<Trial>& trials) {
  py::list out;
  for (const auto& t : trials) out.append(to_py(trial_to_json(t)));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fidelity metrics, domain rules, ranking and tuning for synthetic tabular data";
  py::register_exception<Error>(m, "SynthQAError", PyExc_ValueError);

  py::class_<TableData>(m, "Table")
      .def_static(
          "load", [](const std::string& csv, const std::string& schema) { return load_csv(csv, load_schema(schema)); },
          py::arg("csv"), py::arg("schema"))
      .def_static(
          "parse", [](const std::string& text, const py::dict& schema) { return parse_csv(text, schema_from_py(schema)); },
          py::arg("text"), py::arg("schema"))
      .def_property_readonly("n_rows", &TableData::n_rows)
      .def_property_readonly("columns",
                             [](const TableData& t) {
                               std::vector<std::string> names;
                               for (const auto& c : t.schema().columns) names.push_back(c.name);
                               return names;
                             })
      .def("schema", [](const TableData& t) { return to_py(json::parse(schema_to_json(t.schema()))); })
      .def("cell", &TableData::cell_text, py::arg("row"), py::arg("column"))
      .def("to_csv", [](const TableData& t) { return to_csv(t); })
      .def("save", [](const TableData& t, const std::string& path) { write_csv(t, path); }, py::arg("path"))
      .def("profile", [](const TableData& t) {
        const auto p = profile(t);
        py::dict d;
        d["n_samples"] = p.n_samples;
        d["n_categorical"] = p.n_categorical;
        d["n_numerical"] = p.n_numerical;
        d["total_categories"] = p.total_categories;
        d["vector_size"] = p.vector_size;
        return d;
      });

  m.def(
      "evaluate",
      [](const TableData& real, const TableData& synth, const std::string& mode, std::size_t bins, std::size_t threads,
         const std::string& dataset_id, const std::string& model_id, bool plot_data) {
        EvaluateOptions opt;
        opt.mode = normalization_mode_from_string(mode);
        opt.bins = bins;
        opt.threads = threads;
        opt.dataset_id = dataset_id;
        opt.model_id = model_id;
        Evaluation ev;
        PlotData plots;
        {
          py::gil_scoped_release release;
          ev = evaluate_full(real, synth, opt);
          if (plot_data) plots = collect_plot_data(ev, real, synth);
        }
        return to_py(report_to_json(ev.report, plot_data ? &plots : nullptr));
      },
      py::arg("real"), py::arg("synth"), py::arg("mode") = "point-mean", py::arg("bins") = kDefaultBins,
      py::arg("threads") = 0, py::arg("dataset_id") = "", py::arg("model_id") = "", py::arg("plot_data") = false,
      "Quality report of synth against real, as a dict.");

  m.def(
      "render_figures",
      [](const py::dict& report, const std::string& out_dir, bool log_scale) {
        const json doc = from_py(report);
        const auto plots = plot_data_from_json(doc);
        if (!plots) throw Error(ErrorCode::InvalidArgument, "report carries no plot data");
        const auto r = report_from_json(doc);
        ScatterStyle style;
        style.log_scale = log_scale;
        std::vector<std::string> paths;
        for (const auto& p : write_figures(out_dir, r.dataset_id, r.model_id, *plots, style)) paths.push_back(p.string());
        return paths;
      },
      py::arg("report"), py::arg("out_dir"), py::arg("log_scale") = false);

  m.def(
      "check_rules",
      [](const py::dict& rules, const TableData& data, const TableData* reference, const TableData* fit_ranges_from) {
        RuleSet set = parse_rules(from_py(rules));
        if (fit_ranges_from) set = fit_range_rules(set, *fit_ranges_from);
        return to_py(violation_report_to_json(check(set, data, reference)));
      },
      py::arg("rules"), py::arg("data"), py::arg("reference") = nullptr, py::arg("fit_ranges_from") = nullptr);

  m.def("independent_sample", &independent_sample, py::arg("real"), py::arg("n"), py::arg("seed") = 0);
  m.def("bootstrap_sample", &bootstrap_sample, py::arg("real"), py::arg("n"), py::arg("seed") = 0);
  m.def("mode_collapse_sample", &mode_collapse_sample, py::arg("real"), py::arg("n"));

  m.def(
      "rank_models",
      [](const py::list& reports) {
        std::vector<QualityReport> rs;
        for (const auto& r : reports) rs.push_back(report_from_json(from_py(r)));
        return to_py(ranking_to_json(rank_models(rs)));
      },
      py::arg("reports"));
  m.def(
      "improvement",
      [](double default_value, double hpo_value) {
        const auto imp = improvement(default_value, hpo_value);
        return py::make_tuple(*imp.delta, imp.pct ? py::cast(*imp.pct) : py::none());
      },
      py::arg("default_value"), py::arg("hpo_value"), "(delta, pct); pct is None for a zero baseline.");
  m.def("kendall_tau", &kendall_tau, py::arg("a"), py::arg("b"));

  m.def(
      "suggest",
      [](const py::dict& space, const py::object& trials, const std::vector<std::pair<std::string, std::string>>& objectives,
         std::uint64_t seed, const std::string& stratum) {
        return to_py(suggest(make_study(space, objectives, seed, 1, stratum, trials)));
      },
      py::arg("space"), py::arg("trials") = py::none(),
      py::arg("objectives") = std::vector<std::pair<std::string, std::string>>{{"objective", "minimize"}},
      py::arg("seed") = 0, py::arg("stratum") = "");

  m.def(
      "optimize",
      [](const py::dict& space, const py::function& objective, std::size_t budget,
         const std::vector<std::pair<std::string, std::string>>& objectives, std::uint64_t seed) {
        Study study = make_study(space, objectives, seed, budget, "", py::none());
        TrialRunner runner = [&](const json& params, std::size_t) {
          TrialOutcome out;
          const py::object result = objective(to_py(params));
          if (result.is_none()) {
            out.status = TrialStatus::FailedTrain;
            out.message = "objective returned None";
          } else if (py::isinstance<py::float_>(result) || py::isinstance<py::int_>(result)) {
            out.objectives = {result.cast<double>()};
          } else {
            out.objectives = result.cast<std::vector<double>>();
          }
          return out;
        };
        std::size_t next_id = 0;
        optimize(study, runner, next_id);
        py::dict d;
        d["trials"] = trials_to_py(study.trials);
        d["best"] = trials_to_py(best(study));
        return d;
      },
      py::arg("space"), py::arg("objective"), py::arg("budget"),
      py::arg("objectives") = std::vector<std::pair<std::string, std::string>>{{"objective", "minimize"}},
      py::arg("seed") = 0,
      "Tune a Python callable. It returns one float, a list of floats, or None for a failed trial.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> storage{"synthqa"};
        storage.insert(storage.end(), args.begin(), args.end());
        std::vector<char*> argv;
        for (auto& s : storage) argv.push_back(s.data());
        py::gil_scoped_release release;
        return run_cli(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"));
}
