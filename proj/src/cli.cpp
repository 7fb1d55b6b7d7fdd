#include "synthqa/cli.hpp"

#include <glob.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "synthqa/dataset.hpp"
#include "synthqa/domain.hpp"
#include "synthqa/metrics.hpp"
#include "synthqa/parallel.hpp"
#include "synthqa/plots.hpp"
#include "synthqa/rank.hpp"
#include "synthqa/refsynth.hpp"
#include "synthqa/report.hpp"
#include "synthqa/subprocess.hpp"
#include "synthqa/tuner.hpp"

namespace synthqa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct EvaluateArgs {
  std::string real, synth, schema, out, plots, mode = "point-mean", dataset_id, model_id;
  std::size_t bins = kDefaultBins;
  std::size_t threads = 0;
  bool no_plot_data = false;
  bool log_scale = false;
};

struct PlotArgs {
  std::string report, out_dir;
  bool log_scale = false;
};

struct ValidateArgs {
  std::string data, schema, rules, fit_ranges_from, reference, out;
};

struct TuneArgs {
  std::string space, study, command, journal, workdir;
  std::optional<std::size_t> budget;
  std::optional<double> train_timeout, synth_timeout;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
};

struct RankArgs {
  std::vector<std::string> reports, defaults;
  std::string out;
};

struct RefsynthArgs {
  std::string method = "bootstrap";
  std::uint64_t seed = 0;
  std::string real, schema, params, workdir, out;
  std::size_t n = 0;
};

std::vector<fs::path> expand_globs(const std::vector<std::string>& patterns) {
  std::set<fs::path> found;
  for (const auto& pattern : patterns) {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) found.insert(g.gl_pathv[i]);
    }
    ::globfree(&g);
  }
  return {found.begin(), found.end()};
}

fs::path resolve_against(const fs::path& base_file, const std::string& value) {
  const fs::path p(value);
  if (p.is_absolute() || !base_file.has_parent_path()) return p;
  return base_file.parent_path() / p;
}

Direction direction_from_string(const std::string& text) {
  if (text == "minimize") return Direction::Minimize;
  if (text == "maximize") return Direction::Maximize;
  throw Error(ErrorCode::InvalidStudy, "direction must be minimize or maximize, got '" + text + "'");
}

std::string_view to_string(Direction d) { return d == Direction::Minimize ? "minimize" : "maximize"; }

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const Schema schema = load_schema(a.schema);
  const TableData real = load_csv(a.real, schema);
  const TableData synth = load_csv(a.synth, schema);
  EvaluateOptions opt;
  opt.mode = normalization_mode_from_string(a.mode);
  opt.bins = a.bins;
  opt.threads = a.threads;
  opt.dataset_id = a.dataset_id.empty() ? fs::path(a.real).stem().string() : a.dataset_id;
  opt.model_id = a.model_id.empty() ? fs::path(a.synth).stem().string() : a.model_id;
  const Evaluation ev = evaluate_full(real, synth, opt);
  const bool need_plots = !a.plots.empty() || !a.no_plot_data;
  PlotData plots;
  if (need_plots) plots = collect_plot_data(ev, real, synth);
  write_json_file(a.out, report_to_json(ev.report, a.no_plot_data ? nullptr : &plots));
  if (!a.plots.empty()) {
    ScatterStyle style;
    style.log_scale = a.log_scale;
    for (const auto& p : write_figures(a.plots, opt.dataset_id, opt.model_id, plots, style)) {
      out << "wrote " << p.string() << "\n";
    }
  }
  out << "wrote " << a.out << "\n";
  return 0;
}

int cmd_plot(const PlotArgs& a, std::ostream& out) {
  const json doc = read_json_file(a.report);
  const QualityReport report = report_from_json(doc);
  const auto plots = plot_data_from_json(doc);
  if (!plots) {
    throw Error(ErrorCode::InvalidArgument, a.report + " carries no plot data; re-run evaluate without --no-plot-data");
  }
  ScatterStyle style;
  style.log_scale = a.log_scale;
  for (const auto& p : write_figures(a.out_dir, report.dataset_id, report.model_id, *plots, style)) {
    out << "wrote " << p.string() << "\n";
  }
  return 0;
}

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  const Schema schema = load_schema(a.schema);
  const TableData data = load_csv(a.data, schema);
  RuleSet rules = load_rules(a.rules);
  validate_rules(rules, schema);
  std::optional<TableData> reference;
  const std::string ref_path = !a.reference.empty() ? a.reference : a.fit_ranges_from;
  if (!ref_path.empty()) reference = load_csv(ref_path, schema);
  if (!a.fit_ranges_from.empty()) {
    const TableData fit_source = ref_path == a.fit_ranges_from ? *reference : load_csv(a.fit_ranges_from, schema);
    rules = fit_range_rules(rules, fit_source);
  }
  for (const auto& rule : rules.rules) {
    if (const auto* r = std::get_if<RangeRule>(&rule); r && r->bounds.empty()) {
      throw Error(ErrorCode::InvalidRule, "range rule '" + r->name + "' has no bounds; pass --fit-ranges-from");
    }
  }
  const ViolationReport report = check(rules, data, reference ? &*reference : nullptr);
  fs::path json_path(a.out);
  fs::path csv_path = json_path;
  csv_path.replace_extension(".csv");
  json doc = violation_report_to_json(report);
  doc["rules_applied"] = rules_to_json(rules)["rules"];
  write_json_file(json_path, doc);
  write_text_file(csv_path, violation_report_to_csv(report));
  for (const auto& r : report.rules) {
    out << r.name << ": " << r.n_rows_violating << " violating rows, " << r.n_distinct_violating_level_pairs
        << " distinct level pairs\n";
  }
  out << "wrote " << json_path.string() << " and " << csv_path.string() << "\n";
  return 0;
}

int cmd_tune(const TuneArgs& a, std::ostream& out, std::ostream& err) {
  const SearchSpace space = load_search_space(a.space);
  const json study_doc = read_json_file(a.study);
  const fs::path study_path(a.study);
  StudyConfig config;
  ExternalSynthCommand command;
  std::string dataset_id;
  try {
    command.real_csv = resolve_against(study_path, study_doc.at("real").get<std::string>());
    command.schema_json = resolve_against(study_path, study_doc.at("schema").get<std::string>());
    config.budget = study_doc.value("budget", std::size_t{1});
    config.train_timeout = study_doc.value("train_timeout", 0.0);
    config.synth_timeout = study_doc.value("synth_timeout", 0.0);
    config.seed = study_doc.value("seed", std::uint64_t{0});
    command.n_synth = study_doc.value("n_synth", std::size_t{0});
    command.evaluate.mode = normalization_mode_from_string(study_doc.value("mode", "point-mean"));
    command.evaluate.bins = study_doc.value("bins", kDefaultBins);
    dataset_id = study_doc.value("dataset_id", command.real_csv.stem().string());
    if (study_doc.contains("objectives")) {
      for (const auto& o : study_doc["objectives"]) {
        config.objectives.push_back(
            {o.at("metric").get<std::string>(), direction_from_string(o.value("direction", "minimize"))});
      }
    }
    if (study_doc.contains("tpe")) {
      const auto& t = study_doc["tpe"];
      config.tpe.gamma = t.value("gamma", config.tpe.gamma);
      config.tpe.n_candidates = t.value("n_candidates", config.tpe.n_candidates);
      config.tpe.n_startup = t.value("n_startup", config.tpe.n_startup);
      config.tpe.bandwidth_floor = t.value("bandwidth_floor", config.tpe.bandwidth_floor);
      config.tpe.prior_weight = t.value("prior_weight", config.tpe.prior_weight);
    }
    if (study_doc.contains("workdir")) command.workdir = resolve_against(study_path, study_doc["workdir"]);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidStudy, a.study + ": " + e.what());
  }
  if (a.budget) config.budget = *a.budget;
  if (a.train_timeout) config.train_timeout = *a.train_timeout;
  if (a.synth_timeout) config.synth_timeout = *a.synth_timeout;
  if (a.seed) config.seed = *a.seed;
  command.argv = split_command(a.command);
  if (command.argv.empty()) throw Error(ErrorCode::InvalidArgument, "--command is empty");
  command.evaluate.threads = a.threads;
  command.evaluate.dataset_id = dataset_id;
  if (!a.workdir.empty()) command.workdir = a.workdir;
  if (command.workdir.empty()) command.workdir = fs::path(a.journal).string() + ".work";

  const Schema schema = load_schema(command.schema_json);
  const TableData real = load_csv(command.real_csv, schema);
  if (config.objectives.empty()) config.objectives = objectives_for_schema(schema);

  const auto objectives = config.objectives;
  const double train_timeout = config.train_timeout;
  const double synth_timeout = config.synth_timeout;
  TrialRunner runner = [&](const json& params, std::size_t id) {
    return run_external(command, real, objectives, params, id, train_timeout, synth_timeout);
  };
  auto progress = [&](const Trial& t) {
    err << "trial " << t.id << (t.stratum.empty() ? "" : " [" + t.stratum + "]") << ": " << to_string(t.status);
    for (double v : t.objectives) err << " " << v;
    if (!t.message.empty()) err << " (" << t.message << ")";
    err << "\n";
  };
  const auto studies = optimize_space(space, config, runner, fs::path(a.journal), progress);

  json summary = json::array();
  for (const auto& study : studies) {
    json objs = json::array();
    for (const auto& o : config.objectives) objs.push_back({{"metric", o.metric}, {"direction", to_string(o.direction)}});
    json best_trials = json::array();
    for (const auto& t : best(study)) best_trials.push_back(trial_to_json(t));
    std::size_t failed = study.trials.size() - study.n_completed();
    summary.push_back({{"stratum", study.stratum},
                       {"objectives", std::move(objs)},
                       {"completed", study.n_completed()},
                       {"failed", failed},
                       {config.objectives.size() == 1 ? "best" : "pareto_front", std::move(best_trials)}});
  }
  out << summary.dump(2) << "\n";
  return 0;
}

int cmd_rank(const RankArgs& a, std::ostream& out) {
  const auto paths = expand_globs(a.reports);
  if (paths.empty()) throw Error(ErrorCode::EmptyList, "no report files match the given patterns");
  std::map<std::string, std::vector<QualityReport>> by_dataset;
  for (const auto& p : paths) {
    auto r = report_from_json(read_json_file(p));
    by_dataset[r.dataset_id].push_back(std::move(r));
  }
  const fs::path dir(a.out);
  fs::create_directories(dir);

  std::vector<Ranking> rankings;
  json rankings_doc = json::array();
  json comparisons_doc = json::object();
  std::string comparison_csv;
  for (auto& [dataset, reports] : by_dataset) {
    std::sort(reports.begin(), reports.end(),
              [](const QualityReport& x, const QualityReport& y) { return x.model_id < y.model_id; });
    rankings.push_back(rank_models(reports));
    rankings_doc.push_back(ranking_to_json(rankings.back()));

    std::map<std::string, std::vector<std::string>> orders;
    const std::pair<const char*, Direction> candidates[] = {{"mae2", Direction::Minimize},
                                                            {"hist_iou2", Direction::Maximize},
                                                            {"jsd2", Direction::Minimize},
                                                            {"wd1_mean", Direction::Minimize}};
    for (const auto& [metric, dir_] : candidates) {
      auto order = ranking_by(reports, metric, dir_);
      if (order.size() == reports.size()) orders[metric] = std::move(order);
    }
    if (!orders.empty()) {
      const auto cmp = compare_rankings(orders);
      comparisons_doc[dataset] = comparison_to_json(cmp);
      comparison_csv += "# " + dataset + "\n" + comparison_to_csv(cmp);
    }
  }
  write_json_file(dir / "ranking.json", rankings_doc);
  write_text_file(dir / "ranking.csv", ranking_to_csv(rankings));
  write_json_file(dir / "comparison.json", comparisons_doc);
  write_text_file(dir / "comparison.csv", comparison_csv);
  out << "ranked " << paths.size() << " reports over " << by_dataset.size() << " dataset(s)\n";

  if (!a.defaults.empty()) {
    const auto default_paths = expand_globs(a.defaults);
    if (default_paths.empty()) throw Error(ErrorCode::EmptyList, "no default report files match the given patterns");
    std::map<std::pair<std::string, std::string>, QualityReport> tuned;
    for (const auto& [dataset, reports] : by_dataset) {
      for (const auto& r : reports) tuned[{r.dataset_id, r.model_id}] = r;
    }
    std::map<std::pair<std::string, std::string>, QualityReport> defaults;
    for (const auto& p : default_paths) {
      auto r = report_from_json(read_json_file(p));
      defaults[{r.dataset_id, r.model_id}] = std::move(r);
    }
    std::vector<ImprovementRow> rows;
    for (const auto& [key, def] : defaults) {
      ImprovementRow row{key.first, key.second, {}};
      if (auto it = tuned.find(key); it != tuned.end()) {
        row.metrics = improvement(def, it->second);
      } else {
        QualityReport missing;
        missing.dataset_id = key.first;
        missing.model_id = key.second;
        row.metrics = improvement(def, missing);
      }
      rows.push_back(std::move(row));
    }
    write_json_file(dir / "improvement.json", improvements_to_json(rows));
    write_text_file(dir / "improvement.csv", improvements_to_csv(rows));
    out << "compared " << rows.size() << " default report(s)\n";
  }
  out << "wrote tables to " << dir.string() << "\n";
  return 0;
}

TableData run_sampler(const std::string& method, const TableData& real, std::size_t n, std::uint64_t seed) {
  if (method == "independent") return independent_sample(real, n, seed);
  if (method == "bootstrap") return bootstrap_sample(real, n, seed);
  if (method == "mode") return mode_collapse_sample(real, n);
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + method + "'");
}

int cmd_refsynth_train(const RefsynthArgs& a, std::ostream& out) {
  const Schema schema = load_schema(a.schema);
  load_csv(a.real, schema);
  json params = json::object();
  if (!a.params.empty()) params = read_json_file(a.params);
  std::uint64_t seed = a.seed;
  if (params.is_object() && params.contains("seed") && params["seed"].is_number_integer()) {
    seed = params["seed"].get<std::uint64_t>();
  }
  json model{{"method", a.method},
             {"real", fs::absolute(a.real).string()},
             {"schema", fs::absolute(a.schema).string()},
             {"seed", seed},
             {"params", params}};
  fs::create_directories(a.workdir);
  write_json_file(fs::path(a.workdir) / "model.json", model);
  out << "trained " << a.method << " sampler in " << a.workdir << "\n";
  return 0;
}

int cmd_refsynth_synth(const RefsynthArgs& a, std::ostream& out) {
  const json model = read_json_file(fs::path(a.workdir) / "model.json");
  std::string method;
  std::uint64_t seed = 0;
  fs::path real_path, schema_path;
  try {
    method = model.at("method").get<std::string>();
    seed = model.at("seed").get<std::uint64_t>();
    real_path = model.at("real").get<std::string>();
    schema_path = model.at("schema").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed model.json: ") + e.what());
  }
  const Schema schema = load_schema(schema_path);
  const TableData real = load_csv(real_path, schema);
  write_csv(run_sampler(method, real, a.n, seed), a.out);
  out << "wrote " << a.n << " rows to " << a.out << "\n";
  return 0;
}

int cmd_refsynth_sample(const RefsynthArgs& a, std::ostream& out) {
  const Schema schema = load_schema(a.schema);
  const TableData real = load_csv(a.real, schema);
  const std::size_t n = a.n ? a.n : real.n_rows();
  write_csv(run_sampler(a.method, real, n, a.seed), a.out);
  out << "wrote " << n << " rows to " << a.out << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) { return run_cli(argc, argv, std::cout, std::cerr); }

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fidelity metrics, domain rules, ranking and tuning for synthetic tabular data"};
  app.name("synthqa");
  app.require_subcommand(1);
  app.set_version_flag("--version", "synthqa 0.1.0");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score a synthetic table against the real one");
  evaluate->add_option("--real", ev.real, "Real data CSV")->required();
  evaluate->add_option("--synth", ev.synth, "Synthetic data CSV")->required();
  evaluate->add_option("--schema", ev.schema, "Schema JSON")->required();
  evaluate->add_option("--out", ev.out, "Output report JSON")->required();
  evaluate->add_option("--plots", ev.plots, "Directory for scatter and QQ SVG figures");
  evaluate->add_option("--mode", ev.mode, "MAE normalization")
      ->check(CLI::IsMember({"point-mean", "variable-l1"}))
      ->capture_default_str();
  evaluate->add_option("--bins", ev.bins, "Equal-width bins per numerical column")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  evaluate->add_option("--threads", ev.threads, "Worker threads (0: SYNTHQA_THREADS or all cores)");
  evaluate->add_option("--dataset-id", ev.dataset_id, "Dataset id (default: real file stem)");
  evaluate->add_option("--model-id", ev.model_id, "Model id (default: synthetic file stem)");
  evaluate->add_flag("--no-plot-data", ev.no_plot_data, "Do not embed plot data in the report");
  evaluate->add_flag("--log-scale", ev.log_scale, "Log axes on scatter plots");

  PlotArgs pl;
  auto* plot = app.add_subcommand("plot", "Render figures from the plot data of a report");
  plot->add_option("--report", pl.report, "Report JSON written by evaluate")->required();
  plot->add_option("--out-dir", pl.out_dir, "Output directory")->required();
  plot->add_flag("--log-scale", pl.log_scale, "Log axes on scatter plots");

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Count domain rule violations");
  validate->add_option("--data", va.data, "CSV to check")->required();
  validate->add_option("--schema", va.schema, "Schema JSON")->required();
  validate->add_option("--rules", va.rules, "Rule file JSON")->required();
  validate->add_option("--fit-ranges-from", va.fit_ranges_from, "Real CSV used to fit range rules without bounds");
  validate->add_option("--reference", va.reference, "Real CSV for observed level counts (default: --fit-ranges-from)");
  validate->add_option("--out", va.out, "Output JSON; a CSV table is written next to it")->required();

  TuneArgs tu;
  auto* tune = app.add_subcommand("tune", "Tune an external synthesizer command");
  tune->add_option("--space", tu.space, "Search space JSON")->required();
  tune->add_option("--study", tu.study, "Study config JSON")->required();
  tune->add_option("--command", tu.command, "Synthesizer command (split on whitespace)")->required();
  tune->add_option("--budget", tu.budget, "Completed trials per study");
  tune->add_option("--train-timeout", tu.train_timeout, "Train phase timeout, seconds");
  tune->add_option("--synth-timeout", tu.synth_timeout, "Synth phase timeout, seconds");
  tune->add_option("--seed", tu.seed, "Sampler seed");
  tune->add_option("--journal", tu.journal, "Trial journal (JSON Lines); resumed when present")->required();
  tune->add_option("--workdir", tu.workdir, "Trial working directories (default: <journal>.work)");
  tune->add_option("--threads", tu.threads, "Metric threads");

  RankArgs ra;
  auto* rank = app.add_subcommand("rank", "Rank models from evaluate reports");
  rank->add_option("--reports", ra.reports, "Report files or glob patterns")->required();
  rank->add_option("--defaults", ra.defaults, "Reports of default hyperparameters, for the improvement table");
  rank->add_option("--out", ra.out, "Output directory")->required();

  RefsynthArgs rs;
  auto* refsynth = app.add_subcommand("refsynth", "Reference samplers following the synthesizer contract");
  refsynth->require_subcommand(1);
  refsynth->add_option("--method", rs.method, "Sampler")
      ->check(CLI::IsMember({"independent", "bootstrap", "mode"}))
      ->capture_default_str();
  refsynth->add_option("--seed", rs.seed, "Seed (a \"seed\" entry in --params wins)");
  auto* rs_train = refsynth->add_subcommand("train", "Record the real data for later sampling");
  rs_train->add_option("--real", rs.real, "Real data CSV")->required();
  rs_train->add_option("--schema", rs.schema, "Schema JSON")->required();
  rs_train->add_option("--params", rs.params, "Parameter JSON");
  rs_train->add_option("--workdir", rs.workdir, "Model directory")->required();
  auto* rs_synth = refsynth->add_subcommand("synth", "Sample from a trained model directory");
  rs_synth->add_option("--workdir", rs.workdir, "Model directory")->required();
  rs_synth->add_option("--n", rs.n, "Rows to sample")->required()->check(CLI::PositiveNumber);
  rs_synth->add_option("--out", rs.out, "Output CSV")->required();
  auto* rs_sample = refsynth->add_subcommand("sample", "Train and sample in one step");
  rs_sample->add_option("--real", rs.real, "Real data CSV")->required();
  rs_sample->add_option("--schema", rs.schema, "Schema JSON")->required();
  rs_sample->add_option("--n", rs.n, "Rows to sample (default: as many as the real data)");
  rs_sample->add_option("--out", rs.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "synthqa: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*evaluate) return cmd_evaluate(ev, out);
    if (*plot) return cmd_plot(pl, out);
    if (*validate) return cmd_validate(va, out);
    if (*tune) return cmd_tune(tu, out, err);
    if (*rank) return cmd_rank(ra, out);
    if (*rs_train) return cmd_refsynth_train(rs, out);
    if (*rs_synth) return cmd_refsynth_synth(rs, out);
    if (*rs_sample) return cmd_refsynth_sample(rs, out);
  } catch (const Error& e) {
    err << "synthqa: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "synthqa: Io: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "synthqa: internal error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace synthqa
