#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "synthqa/pareto.hpp"
#include "synthqa/subprocess.hpp"
#include "synthqa/tuner.hpp"

using namespace synthqa;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = SYNTHQA_FIXTURES;
const std::string kConfigs = SYNTHQA_CONFIGS;

SearchSpace mixed_space() {
  return parse_search_space(json::parse(R"({"parameters":[
    {"name":"lr","type":"float","min":1e-6,"max":0.1,"log":true},
    {"name":"epochs","type":"int","min":10,"max":1000},
    {"name":"dropout","type":"float","min":0,"max":0.5},
    {"name":"act","type":"categorical","choices":["relu","tanh",3]},
    {"name":"delta","type":"fixed","value":0.5}],
    "strata":[{"name":"small","values":{"dim":[256,256]}},{"name":"big","values":{"dim":[512,512]}}]})"));
}

Study study_of(const SearchSpace& space, std::size_t budget, std::uint64_t seed,
               std::vector<Objective> objectives = {{"f", Direction::Minimize}}) {
  Study s;
  s.space = space;
  s.config.budget = budget;
  s.config.seed = seed;
  s.config.objectives = std::move(objectives);
  return s;
}

void check_in_bounds(const SearchSpace& space, const json& params) {
  for (const auto& p : space.parameters) {
    REQUIRE(params.contains(p.name));
    const auto& v = params[p.name];
    switch (p.kind) {
      case ParamKind::Float:
        CHECK(v.get<double>() >= p.min);
        CHECK(v.get<double>() <= p.max);
        break;
      case ParamKind::Int:
        REQUIRE(v.is_number_integer());
        CHECK(v.get<double>() >= p.min);
        CHECK(v.get<double>() <= p.max);
        break;
      case ParamKind::Categorical:
        CHECK(std::find(p.choices.begin(), p.choices.end(), v) != p.choices.end());
        break;
      case ParamKind::Fixed:
        CHECK(v == p.value);
        break;
    }
  }
}

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("search space parsing and errors") {
  const auto space = mixed_space();
  CHECK(space.parameters.size() == 5);
  CHECK(space.find("lr")->log_scale);
  CHECK(parse_search_space(search_space_to_json(space)).parameters.size() == 5);
  for (const char* file : {"ctgan.json", "privsyn.json", "refsynth.json"}) {
    CHECK_NOTHROW(load_search_space(kConfigs + std::string("/spaces/") + file));
  }
  const char* bad[] = {
      R"({"parameters":[{"name":"a","type":"float","min":1,"max":0}]})",
      R"({"parameters":[{"name":"a","type":"float","min":0,"max":1,"log":true}]})",
      R"({"parameters":[{"name":"a","type":"int","min":0.5,"max":3}]})",
      R"({"parameters":[{"name":"a","type":"categorical","choices":[]}]})",
      R"({"parameters":[{"name":"a","type":"fixed"}]})",
      R"({"parameters":[{"name":"a","type":"float","min":0,"max":1},{"name":"a","type":"int","min":0,"max":1}]})",
      R"({"parameters":[{"name":"a","type":"weird"}]})",
  };
  for (const char* text : bad) {
    try {
      parse_search_space(json::parse(text));
      FAIL("accepted: " << text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidSearchSpace);
    }
  }
}

TEST_CASE("suggestions respect bounds and overlays") {
  const auto space = mixed_space();
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Study s = study_of(space, 40, seed);
    s.stratum = "big";
    std::size_t id = 0;
    optimize(
        s,
        [&](const json& p, std::size_t) {
          TrialOutcome o;
          o.objectives = {std::abs(std::log10(p["lr"].get<double>()) + 3) + p["dropout"].get<double>()};
          return o;
        },
        id);
    for (const auto& t : s.trials) {
      check_in_bounds(space, t.params);
      CHECK(t.params["dim"] == json::array({512, 512}));
    }
  }
  Study empty = study_of(space, 1, 3);
  check_in_bounds(space, suggest(empty));
  CHECK(suggest(empty) == suggest(empty));
}

TEST_CASE("trial json round trip and status strings") {
  Trial t;
  t.id = 7;
  t.stratum = "s";
  t.params = {{"a", 1}};
  t.status = TrialStatus::TimeoutSynth;
  t.train_seconds = 1.5;
  t.message = "late";
  const auto j = trial_to_json(t);
  CHECK(j["status"] == "timeout_synth");
  CHECK(j["objectives"].is_null());
  const auto back = trial_from_json(j);
  CHECK(back.id == 7);
  CHECK(back.status == TrialStatus::TimeoutSynth);
  CHECK(back.objectives.empty());
  for (auto s : {TrialStatus::Completed, TrialStatus::FailedTrain, TrialStatus::FailedSynth, TrialStatus::TimeoutTrain,
                 TrialStatus::TimeoutSynth}) {
    CHECK(trial_status_from_string(to_string(s)) == s);
  }
}

TEST_CASE("objectives follow the column kinds") {
  auto schema = [](std::initializer_list<ColumnKind> kinds) {
    Schema s;
    int i = 0;
    for (auto k : kinds) s.columns.push_back({"c" + std::to_string(i++), k});
    return s;
  };
  const auto cat = objectives_for_schema(schema({ColumnKind::Categorical, ColumnKind::Categorical}));
  REQUIRE(cat.size() == 1);
  CHECK(cat[0].metric == "mae2");
  CHECK(cat[0].direction == Direction::Minimize);
  const auto num = objectives_for_schema(schema({ColumnKind::Numerical, ColumnKind::Numerical}));
  REQUIRE(num.size() == 1);
  CHECK(num[0].metric == "hist_iou2");
  CHECK(num[0].direction == Direction::Maximize);
  const auto mixed = objectives_for_schema(
      schema({ColumnKind::Categorical, ColumnKind::Categorical, ColumnKind::Numerical, ColumnKind::Numerical}));
  CHECK(mixed.size() == 2);
  const auto abalone = objectives_for_schema(schema({ColumnKind::Categorical, ColumnKind::Numerical,
                                                     ColumnKind::Numerical}));
  REQUIRE(abalone.size() == 2);
  CHECK(abalone[0].metric == "mae1");
}

TEST_CASE("budget counts completed trials only") {
  const auto space = mixed_space();
  Study s = study_of(space, 5, 2);
  std::size_t calls = 0;
  std::size_t id = 0;
  optimize(
      s,
      [&](const json&, std::size_t) {
        TrialOutcome o;
        if (++calls % 2 == 0) {
          o.status = TrialStatus::FailedTrain;
        } else {
          o.objectives = {1.0};
        }
        return o;
      },
      id);
  CHECK(s.n_completed() == 5);
  CHECK(s.trials.size() == 9);

  Study one = study_of(space, 1, 2);
  std::size_t id1 = 0;
  optimize(one, [](const json&, std::size_t) { return TrialOutcome{TrialStatus::Completed, {0.4}, 0, 0, ""}; }, id1);
  CHECK(best(one).at(0).id == one.trials[0].id);
}

TEST_CASE("invalid runner outputs become failures") {
  Study s = study_of(mixed_space(), 1, 0);
  const auto params = suggest(s);
  CHECK(run_trial(s, params, 0, [](const json&, std::size_t) -> TrialOutcome { throw std::runtime_error("boom"); })
            .status == TrialStatus::FailedTrain);
  CHECK(run_trial(s, params, 0, [](const json&, std::size_t) { return TrialOutcome{TrialStatus::Completed, {NAN}, 0, 0, ""}; })
            .status == TrialStatus::FailedSynth);
  CHECK(run_trial(s, params, 0, [](const json&, std::size_t) { return TrialOutcome{TrialStatus::Completed, {1, 2}, 0, 0, ""}; })
            .status == TrialStatus::FailedSynth);
}

TEST_CASE("journal resume and torn final line") {
  const auto dir = temp_dir("synthqa_tuner_journal");
  const auto journal = dir / "j.jsonl";
  auto config = StudyConfig{};
  config.budget = 4;
  config.seed = 5;
  config.objectives = {{"f", Direction::Minimize}};
  auto runner = [](const json& p, std::size_t) {
    TrialOutcome o;
    o.objectives = {p["dropout"].get<double>()};
    return o;
  };
  const auto space = mixed_space();
  const auto full = optimize_space(space, config, runner);

  config.budget = 2;
  optimize_space(space, config, runner, journal);
  {
    std::ofstream out(journal, std::ios::app);
    out << "{\"id\": 99, \"stra";
  }
  CHECK(load_journal(journal).size() == 4);
  config.budget = 4;
  const auto resumed = optimize_space(space, config, runner, journal);
  REQUIRE(resumed.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    REQUIRE(resumed[s].trials.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(resumed[s].trials[i].params == full[s].trials[i].params);
  }
  fs::remove_all(dir);
}

TEST_CASE("best trial selection") {
  Study s = study_of(mixed_space(), 3, 0);
  for (std::size_t i = 0; i < 3; ++i) {
    Trial t;
    t.id = i + 1;
    t.objectives = {i == 0 ? 0.3 : 0.1};
    s.trials.push_back(t);
  }
  CHECK(best(s).at(0).id == 2);

  Study two = study_of(mixed_space(), 2, 0, {{"mae2", Direction::Minimize}, {"hist_iou2", Direction::Maximize}});
  two.trials.push_back(Trial{0, "", json::object(), TrialStatus::Completed, {0.1, 0.9}, 0, 0, ""});
  two.trials.push_back(Trial{1, "", json::object(), TrialStatus::Completed, {0.2, 0.8}, 0, 0, ""});
  two.trials.push_back(Trial{2, "", json::object(), TrialStatus::FailedTrain, {}, 0, 0, ""});
  const auto front = best(two);
  REQUIRE(front.size() == 1);
  CHECK(front[0].id == 0);

  Study none = study_of(mixed_space(), 1, 0);
  CHECK_THROWS_AS(best(none), Error);
}

TEST_CASE("pareto helpers") {
  const std::vector<Direction> dirs{Direction::Minimize, Direction::Maximize};
  CHECK(dominates({0.1, 0.9}, {0.2, 0.8}, dirs));
  CHECK_FALSE(dominates({0.1, 0.9}, {0.1, 0.9}, dirs));
  CHECK_FALSE(dominates({0.1, 0.5}, {0.2, 0.8}, dirs));
  const std::vector<Point> pts{{1, 1}, {2, 2}, {0, 0}, {1, 0}};
  const auto fronts = non_dominated_sort(pts, {Direction::Maximize, Direction::Maximize});
  REQUIRE(fronts.size() == 4);
  CHECK(fronts[0] == std::vector<std::size_t>{1});
  CHECK(fronts[1] == std::vector<std::size_t>{0});
  CHECK(fronts[2] == std::vector<std::size_t>{3});
  CHECK(fronts[3] == std::vector<std::size_t>{2});
  const auto tied = non_dominated_sort({{0, 1}, {1, 0}, {0, 0}}, {Direction::Maximize, Direction::Maximize});
  CHECK(tied[0] == std::vector<std::size_t>{0, 1});
  const std::vector<Point> line{{0, 3}, {1, 2}, {2, 1}, {3, 0}};
  const auto cd = crowding_distance(line, {0, 1, 2, 3});
  CHECK(std::isinf(cd[0]));
  CHECK(std::isinf(cd[3]));
  CHECK(cd[1] == doctest::Approx(cd[2]));
}

TEST_CASE("subprocess runner") {
  const auto dir = temp_dir("synthqa_subprocess");
  const auto ok = run_process({"/bin/sh", "-c", "echo hello"}, 5.0, dir / "ok.log");
  CHECK(ok.ok());
  std::ifstream log(dir / "ok.log");
  std::string line;
  std::getline(log, line);
  CHECK(line == "hello");
  CHECK(run_process({"/bin/sh", "-c", "exit 3"}, 5.0, dir / "f.log").exit_code == 3);
  const auto slow = run_process({"/bin/sh", "-c", "sleep 10"}, 0.3, dir / "t.log");
  CHECK(slow.timed_out);
  CHECK(slow.seconds < 5.0);
  const auto missing = run_process({"/nonexistent/binary"}, 1.0, dir / "m.log");
  CHECK_FALSE(missing.ok());
  CHECK(split_command("a  b\tc") == std::vector<std::string>{"a", "b", "c"});
  fs::remove_all(dir);
}

TEST_CASE("external adapter end to end") {
  const auto dir = temp_dir("synthqa_external");
  const Schema schema = load_schema(kFixtures + "/epicancer_schema.json");
  const auto real = load_csv(kFixtures + "/epicancer_real.csv", schema);
  ExternalSynthCommand cmd;
  cmd.real_csv = kFixtures + "/epicancer_real.csv";
  cmd.schema_json = kFixtures + "/epicancer_schema.json";
  cmd.workdir = dir;
  const std::vector<Objective> obj{{"mae2", Direction::Minimize}};
  const json params = {{"seed", 3}};

  cmd.argv = {SYNTHQA_BINARY, "refsynth", "--method", "bootstrap"};
  const auto done = run_external(cmd, real, obj, params, 0, 30, 30);
  CHECK(done.status == TrialStatus::Completed);
  REQUIRE(done.objectives.size() == 1);
  CHECK(done.objectives[0] >= 0.0);
  CHECK(fs::exists(dir / "trial_0" / "synth.csv"));

  cmd.argv = {"/bin/sh", "-c", "exit 1", "sh"};
  CHECK(run_external(cmd, real, obj, params, 1, 30, 30).status == TrialStatus::FailedTrain);
  cmd.argv = {"/bin/sh", "-c", "sleep 10", "sh"};
  const auto late = run_external(cmd, real, obj, params, 2, 0.3, 30);
  CHECK(late.status == TrialStatus::TimeoutTrain);
  CHECK(late.objectives.empty());
  cmd.argv = {"/bin/sh", "-c", "[ \"$0\" = train ] || exit 4"};
  CHECK(run_external(cmd, real, obj, params, 3, 30, 30).status == TrialStatus::FailedSynth);
  cmd.argv = {"/bin/sh", "-c", "[ \"$0\" = train ] || echo garbage > \"$6\""};
  CHECK(run_external(cmd, real, obj, params, 4, 30, 30).status == TrialStatus::FailedSynth);
  fs::remove_all(dir);
}
